"""Gray codes, the Walsh-Hadamard/Gray angle solver and the rotation-Z tree solver.

All kernels operate along axis 0 of their input and broadcast over any
trailing axes, so one call can process every column of a matrix at once.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

MAX_GRAY_BITS = 30


@dataclass
class OpCounter:
    """Tally of tree-node visits, used to check linear-time angle finding."""

    count: int = 0

    def add(self, k: int) -> None:
        self.count += int(k)


def log2_exact(size: int) -> int:
    """Return ``k`` with ``2**k == size``; raise ``ValueError`` otherwise."""
    if size < 1 or size & (size - 1):
        raise ValueError(f"length {size} is not a power of two")
    return size.bit_length() - 1


def _check_bits(n: int) -> None:
    if not isinstance(n, (int, np.integer)) or not 1 <= n <= MAX_GRAY_BITS:
        raise ValueError(f"bit width must be an integer in [1, {MAX_GRAY_BITS}], got {n!r}")


def gray_sequence(n: int) -> np.ndarray:
    """Binary-reflected Gray codes ``j ^ (j >> 1)`` for ``j = 0 .. 2**n - 1``."""
    _check_bits(n)
    j = np.arange(1 << n, dtype=np.int64)
    return j ^ (j >> 1)


def gray_indices(n: int) -> np.ndarray:
    """Like :func:`gray_sequence` but also defined for ``n == 0`` (returns ``[0]``)."""
    if n == 0:
        return np.zeros(1, dtype=np.int64)
    return gray_sequence(n)


def control_schedule(n: int) -> np.ndarray:
    """Control index of each CNOT in an ``n``-control Gray-code chain.

    Entry ``j`` names the bit flipped between ``g_j`` and ``g_{j+1}`` (cyclically).
    Indices are 1-based and count control lines top-down, so index 1 is the
    most significant control bit and index ``n`` the least significant one.

    >>> control_schedule(3).tolist()
    [3, 2, 3, 1, 3, 2, 3, 1]
    """
    g = gray_sequence(n)
    flips = g ^ np.roll(g, -1)
    # flips are one-hot; position of the set bit counted from the LSB
    bit = np.log2(flips).astype(np.int64)
    return n - bit


def walsh_hadamard_(x: np.ndarray) -> np.ndarray:
    """Unnormalized fast Walsh-Hadamard transform along axis 0, in place."""
    if not x.flags.c_contiguous:
        raise ValueError("in-place transform needs a C-contiguous buffer")
    size = x.shape[0]
    log2_exact(size)
    rest = x.shape[1:]
    h = 1
    while h < size:
        view = x.reshape((size // (2 * h), 2, h) + rest)
        lo = view[:, 0].copy()
        view[:, 0] += view[:, 1]
        lo -= view[:, 1]
        view[:, 1] = lo
        h *= 2
    return x


def fwht_gray_solve(beta, *, overwrite: bool = False) -> np.ndarray:
    """Solve ``M beta_tilde = beta`` with ``M = H^{(x)n} P_G`` along axis 0.

    ``H`` is the +-1 Sylvester-Hadamard matrix and ``P_G`` sends column ``i`` to
    Gray code ``g_i``, i.e. ``M[j, i] = (-1)**popcount(j & g_i)``. This is the
    angle relation of a Gray-code CNOT chain: the target sees rotation ``i``
    with sign flipped once per set control bit shared with ``g_i``. The inverse
    is therefore ``beta_tilde[i] = (H beta)[g_i] / 2**n``, which costs
    ``O(n 2**n)`` instead of a dense solve.

    With ``overwrite=True`` a float64 input buffer is transformed in place and
    only the Gray permutation allocates.
    """
    beta = np.asarray(beta, dtype=np.float64)
    if beta.ndim == 0:
        raise ValueError("angle vector must be at least one-dimensional")
    size = beta.shape[0]
    n = log2_exact(size)
    in_place = overwrite and beta.flags.writeable and beta.flags.c_contiguous
    work = beta if in_place else np.ascontiguousarray(beta).copy()
    walsh_hadamard_(work)
    work *= 1.0 / size
    return work[gray_indices(n)]


def walsh_gray_matrix(n: int) -> np.ndarray:
    """Dense ``M = H^{(x)n} P_G`` (for tests and small problems only)."""
    g = gray_indices(n)
    j = np.arange(1 << n)[:, None]
    parity = np.bitwise_count((j & g[None, :]).astype(np.uint64)) & 1
    return np.where(parity == 1, -1.0, 1.0)


def rz_tree_solve(phases, *, counter: OpCounter | None = None) -> tuple[np.ndarray, np.ndarray]:
    """Global phase and rotation-Z tree angles reproducing the given leaf phases.

    Leaf phase ``k`` is rebuilt as ``-theta_g/2 + sum_t s_t theta_{t, k >> (n-t)} / 2``
    where ``s_t`` is ``-1`` if bit ``n-1-t`` of ``k`` is 0 and ``+1`` otherwise.
    Angles come back breadth-first: ``theta[2**t - 1 + node]``.

    The sweep replaces each sibling pair ``(a, b)`` with its mean and writes
    the difference straight into the output, level by level, for
    ``Theta(2**n)`` work and no copy of the input.
    """
    phases = np.asarray(phases, dtype=np.float64)
    size = phases.shape[0]
    n = log2_exact(size)
    if n == 0:
        raise ValueError("a single phase is a pure global phase; need at least two leaves")
    thetas = np.empty((size - 1,) + phases.shape[1:])
    level = phases
    width = size
    while width > 1:
        half = width // 2
        pairs = level.reshape((half, 2) + level.shape[1:])
        a, b = pairs[:, 0], pairs[:, 1]
        np.subtract(b, a, out=thetas[half - 1:width - 1])
        level = a + 0.5 * thetas[half - 1:width - 1]
        if counter is not None:
            counter.add(half)
        width = half
    return -2.0 * level[0], thetas


def rz_tree_leaves(global_phase, thetas) -> np.ndarray:
    """Inverse of :func:`rz_tree_solve`: rebuild leaf phases top-down."""
    thetas = np.asarray(thetas, dtype=np.float64)
    size = thetas.shape[0] + 1
    n = log2_exact(size)
    level = np.asarray(-0.5 * np.asarray(global_phase, dtype=np.float64))[None, ...]
    for t in range(n):
        theta_t = thetas[(1 << t) - 1:(1 << (t + 1)) - 1]
        level = np.stack([level - 0.5 * theta_t, level + 0.5 * theta_t], axis=1)
        level = level.reshape((2 << t,) + level.shape[2:])
    return level
