"""Block-encoding protocols: BITBLE1, BITBLE2, BITBLE3 and the FABLE baseline.

Register layout (wire 0 on top, most significant):

* bitble1/bitble2: ancilla ``0..n-1``, system ``n..2n-1``.
* bitble3: ancilla ``0..n-1``, column-weight wire ``n``, row-weight wire
  ``n+1``, system ``n+2..2n+1``.
* fable: rotation target ``0``, row register ``1..n``, system ``n+1..2n``.

Every ancilla sits above the system register, so the encoded block is the
top-left ``2**n x 2**n`` corner of the unitary.

The BITBLE circuits are ``U = (U_L^dagger x I) SWAP U_R``. ``U_R`` prepares
column ``j`` of the matrix on the ancilla register when the system holds
``|j>``; the swap moves it into the system; ``U_L^dagger`` folds the column
weights back onto ``|0>``.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .circuit import Circuit, CircuitBuilder, CircuitInfo, GateKind, compress, count_gates
from .demux import PERMUTATIVE, RECURSIVE, MultiplexorSpec, demux
from .numerics import log2_exact, rz_tree_solve
from .state_prep import ry_tree_angles, tree_level

PROTOCOLS = ("bitble1", "bitble2", "bitble3", "fable")
SIGN_MODES = ("phase", "leaf")
DEMUX_METHOD = {"bitble1": RECURSIVE, "bitble2": PERMUTATIVE, "bitble3": RECURSIVE}


def as_input_matrix(A) -> tuple[np.ndarray, int]:
    """Validate a square power-of-two, nonzero, finite matrix; return it and ``n``."""
    A = np.asarray(A)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {A.shape}")
    n = log2_exact(A.shape[0])
    if n < 1:
        raise ValueError("matrix must be at least 2x2")
    if np.iscomplexobj(A):
        A = np.asarray(A, dtype=np.complex128)
        if not np.any(A.imag):
            A = np.ascontiguousarray(A.real)
    else:
        A = np.asarray(A, dtype=np.float64)
    if not np.all(np.isfinite(A)):
        raise ValueError("matrix entries must be finite")
    if not np.any(A):
        raise ValueError("matrix is identically zero")
    return A, n


def frobenius(A) -> float:
    A, _ = as_input_matrix(A)
    return float(np.linalg.norm(A))


def _power_sum(mag: np.ndarray, q: float, axis: int) -> np.ndarray:
    # ||.||_q^q with 0**0 = 1
    return np.sum(np.power(mag, q), axis=axis)


def mu_p(A, p: float = 0.5) -> float:
    """``sqrt(S_2p(A^T) * S_2(1-p)(A))`` with ``S_q(A)`` the largest row ``q``-power sum."""
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"p must lie in [0, 1], got {p}")
    A, _ = as_input_matrix(A)
    mag = np.abs(A)
    s_cols = _power_sum(mag, 2 * p, axis=0).max()
    s_rows = _power_sum(mag, 2 * (1 - p), axis=1).max()
    return float(math.sqrt(s_cols * s_rows))


def fable_alpha(A) -> float:
    A, n = as_input_matrix(A)
    return float((1 << n) * np.abs(A).max())


# --- angles ---------------------------------------------------------------

@dataclass
class ProtocolAngles:
    """Rotation parameters of one protocol run.

    Per-column arrays have one column per matrix column ``j``; tree arrays
    are breadth-first along axis 0. ``level_y(t)``/``level_z(t)`` give the
    multiplexor layout of tree level ``t``: node-major, column-minor, i.e.
    entry ``node * 2**n + j``.
    """

    n: int
    alpha: float
    col_y: np.ndarray
    col_z: np.ndarray | None
    col_global: np.ndarray | None
    norm_y: np.ndarray
    chi_r: np.ndarray | None = None
    chi_l: np.ndarray | None = None
    row_y: np.ndarray | None = None
    extra: dict = field(default_factory=dict)

    @property
    def is_complex(self) -> bool:
        return self.col_z is not None

    def level_y(self, t: int) -> np.ndarray:
        return tree_level(self.col_y, t).ravel()

    def level_z(self, t: int) -> np.ndarray:
        if self.col_z is None:
            return np.zeros(1 << (self.n + t))
        return tree_level(self.col_z, t).ravel()

    def global_angles(self) -> np.ndarray:
        if self.col_global is None:
            return np.zeros(1 << self.n)
        return self.col_global


def _column_chunks(size: int, workers: int) -> list[slice]:
    workers = max(1, min(workers, size))
    bounds = np.linspace(0, size, workers + 1).astype(int)
    return [slice(a, b) for a, b in zip(bounds[:-1], bounds[1:])]


def _map_columns(fn, size: int, workers: int):
    chunks = _column_chunks(size, workers)
    if len(chunks) == 1:
        fn(chunks[0])
        return
    with ThreadPoolExecutor(len(chunks)) as pool:
        list(pool.map(fn, chunks))


def _column_trees(values: np.ndarray, phases: np.ndarray | None, workers: int):
    """Y trees (signed leaves for real input), Z trees and roots of every column."""
    size = values.shape[0]
    col_y = np.empty((size - 1, size))
    roots = np.empty(size)
    col_z = None if phases is None else np.empty((size - 1, size))
    col_g = None if phases is None else np.empty(size)

    def work(cols: slice):
        y, r = ry_tree_angles(values[:, cols], signed_leaves=True)
        col_y[:, cols] = y
        roots[cols] = r
        if phases is not None:
            g, z = rz_tree_solve(phases[:, cols])
            col_z[:, cols] = z
            col_g[cols] = g

    _map_columns(work, size, workers)
    return col_y, roots, col_z, col_g


def _values_and_phases(mag: np.ndarray, A: np.ndarray, sign_mode: str):
    """Leaf values and phases (or ``None``) for the column trees.

    Complex input carries its phases through Z trees. Real input with
    negative entries either does the same with phases ``0``/``pi``
    (``sign_mode="phase"``) or stores signs in the bottom Y-tree level
    (``sign_mode="leaf"``), which needs no Z trees at all.
    """
    if sign_mode not in SIGN_MODES:
        raise ValueError(f"unknown sign mode {sign_mode!r}; expected one of {SIGN_MODES}")
    if np.iscomplexobj(A):
        return mag, np.angle(A)
    negative = A < 0
    if sign_mode == "phase" and negative.any():
        return mag, np.where(negative, np.pi, 0.0)
    if negative.any():
        return np.copysign(mag, A), None
    return mag, None


def bitble_angles(A, *, sign_mode: str = "phase", workers: int = 1) -> ProtocolAngles:
    """Column Y/Z trees and the column-norm tree, ``alpha = ||A||_F``.

    The column norms are the tree roots, so the norm tree and ``alpha`` agree
    with the column trees bit for bit however the columns are chunked.
    """
    A, n = as_input_matrix(A)
    values, phases = _values_and_phases(np.abs(A), A, sign_mode)
    col_y, roots, col_z, col_g = _column_trees(values, phases, workers)
    norm_y, total = ry_tree_angles(roots)
    return ProtocolAngles(n, float(total), col_y, col_z, col_g, norm_y)


def bitble3_angles(A, p: float = 0.5, *, sign_mode: str = "phase",
                   workers: int = 1) -> ProtocolAngles:
    """Column trees on ``|A|**p``, row trees on ``|A|**(1-p)`` and the two weight angles."""
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"p must lie in [0, 1], got {p}")
    A, n = as_input_matrix(A)
    mag = np.abs(A)
    col_vals, phases = _values_and_phases(np.power(mag, p), A, sign_mode)
    row_vals = np.power(mag, 1.0 - p)
    col_y, col_roots, col_z, col_g = _column_trees(col_vals, phases, workers)
    row_y, row_roots, _, _ = _column_trees(np.ascontiguousarray(row_vals.T), None, workers)
    c = col_roots ** 2
    r = row_roots ** 2
    s_cols, s_rows = c.max(), r.max()
    chi_r = 2.0 * np.arccos(np.sqrt(np.minimum(c / s_cols, 1.0)))
    chi_l = 2.0 * np.arccos(np.sqrt(np.minimum(r / s_rows, 1.0)))
    alpha = float(math.sqrt(s_cols * s_rows))
    return ProtocolAngles(n, alpha, col_y, col_z, col_g, np.zeros(0),
                          chi_r=chi_r, chi_l=chi_l, row_y=row_y, extra={"p": p})


# --- assembly -------------------------------------------------------------

def _mux(builder: CircuitBuilder, axis: GateKind, angles, target: int, upper, lower,
         method: str, workers: int = 1):
    spec = MultiplexorSpec(axis, angles, target, tuple(upper), tuple(lower))
    demux(spec, method, workers=workers).emit(builder)


def _emit_column_side(b: CircuitBuilder, ang: ProtocolAngles, anc, sys_wires, method, workers):
    """Phase multiplexor, then every Y level, then every Z level, controlled by the system."""
    n = ang.n
    _mux(b, GateKind.RZ, ang.global_angles(), anc[0], (), sys_wires, PERMUTATIVE)
    for t in range(n):
        _mux(b, GateKind.RY, ang.level_y(t), anc[t], anc[:t], sys_wires, method, workers)
    for t in range(n):
        _mux(b, GateKind.RZ, ang.level_z(t), anc[t], anc[:t], sys_wires, method, workers)


def _emit_swap(b: CircuitBuilder, anc, sys_wires):
    for a, s in zip(anc, sys_wires):
        b.swap(a, s)


def _emit_tree_inverse(b: CircuitBuilder, tree: np.ndarray, anc, lower, method, workers):
    """Inverse of the Y tree ``tree`` (levels reversed, angles negated)."""
    n = len(anc)
    for t in range(n - 1, -1, -1):
        level = tree_level(tree, t)
        _mux(b, GateKind.RY, -level.ravel(), anc[t], anc[:t], lower, method, workers)


def _assemble_bitble(ang: ProtocolAngles, method: str, workers: int) -> CircuitBuilder:
    n = ang.n
    anc = list(range(n))
    sys_wires = list(range(n, 2 * n))
    b = CircuitBuilder(2 * n)
    _emit_column_side(b, ang, anc, sys_wires, method, workers)
    _emit_swap(b, anc, sys_wires)
    _emit_tree_inverse(b, ang.norm_y, anc, (), method, workers)
    return b


def _assemble_bitble3(ang: ProtocolAngles, method: str, workers: int) -> CircuitBuilder:
    n = ang.n
    anc = list(range(n))
    w_r, w_l = n, n + 1
    sys_wires = list(range(n + 2, 2 * n + 2))
    b = CircuitBuilder(2 * n + 2)
    _emit_column_side(b, ang, anc, sys_wires, method, workers)
    _mux(b, GateKind.RY, ang.chi_r, w_r, (), sys_wires, PERMUTATIVE)
    _emit_swap(b, anc, sys_wires)
    _mux(b, GateKind.RY, -ang.chi_l, w_l, (), sys_wires, PERMUTATIVE)
    _emit_tree_inverse(b, ang.row_y, anc, sys_wires, method, workers)
    return b


def _assemble_fable(A: np.ndarray, n: int) -> tuple[CircuitBuilder, float]:
    """``RY(pi/2)`` fan-out, one ``2n``-control multiplexor, swap, ``RY(-pi/2)``.

    ``RY(pi/2)|0> = H|0>`` and ``<0|RY(-pi/2) = <0|H``, so the encoded block is
    the same as with Hadamards.
    """
    mag = np.abs(A)
    top = mag.max()
    alpha = float((1 << n) * top)
    row = list(range(1, n + 1))
    sys_wires = list(range(n + 1, 2 * n + 1))
    controls = row + sys_wires
    b = CircuitBuilder(2 * n + 1)
    for w in row:
        b.ry(w, math.pi / 2)
    # divide magnitudes, not entries: the largest then maps to exactly 1, where
    # arccos is too steep to absorb a rounding error
    values = mag / top if np.iscomplexobj(A) else A / top
    theta = 2.0 * np.arccos(np.clip(values, -1.0, 1.0))
    _mux(b, GateKind.RY, theta.ravel(), 0, (), controls, PERMUTATIVE)
    if np.iscomplexobj(A):
        _mux(b, GateKind.RZ, -2.0 * np.angle(A).ravel(), 0, (), controls, PERMUTATIVE)
    _emit_swap(b, row, sys_wires)
    for w in row:
        b.ry(w, -math.pi / 2)
    return b, alpha


@dataclass
class EncodingResult:
    circuit: Circuit
    alpha: float
    ancilla: int
    full_counts: dict[str, int]
    angles: ProtocolAngles | None = None
    verified_error: float | None = None

    def retained_by_kind(self) -> dict[str, float]:
        kept = count_gates(self.circuit)
        return {k: (kept[k] / v if v else 1.0) for k, v in self.full_counts.items()}

    @property
    def retained_fraction(self) -> float:
        """RY plus CNOT gates kept, relative to the uncompressed circuit.

        These are the two kinds of the maximum-gate formula for real input;
        RZ and SWAP are reported per kind by :meth:`retained_by_kind`.
        """
        kept = count_gates(self.circuit)
        den = self.full_counts["ry"] + self.full_counts["cnot"]
        return (kept["ry"] + kept["cnot"]) / den if den else 1.0


def ancilla_count(protocol: str, n: int) -> int:
    return {"bitble1": n, "bitble2": n, "bitble3": n + 2, "fable": n + 1}[protocol]


def synthesize(A, protocol: str = "bitble1", *, p: float = 0.5, cutoff: float | None = 0.0,
               sign_mode: str = "phase", workers: int = 1,
               verify: bool = False) -> EncodingResult:
    """Build a block-encoding circuit for ``A``.

    ``cutoff=None`` returns the uncompressed circuit; any number compresses
    with that rotation threshold. ``verify`` runs the dense oracle.
    """
    if protocol not in PROTOCOLS:
        raise ValueError(f"unknown protocol {protocol!r}; expected one of {PROTOCOLS}")
    if cutoff is not None and cutoff < 0:
        raise ValueError("cutoff must be non-negative")
    A, n = as_input_matrix(A)
    angles = None
    if protocol == "fable":
        builder, alpha = _assemble_fable(A, n)
    elif protocol == "bitble3":
        angles = bitble3_angles(A, p, sign_mode=sign_mode, workers=workers)
        builder, alpha = _assemble_bitble3(angles, RECURSIVE, workers), angles.alpha
    else:
        angles = bitble_angles(A, sign_mode=sign_mode, workers=workers)
        builder = _assemble_bitble(angles, DEMUX_METHOD[protocol], workers)
        alpha = angles.alpha
    ancilla = ancilla_count(protocol, n)
    info = CircuitInfo(protocol=protocol, alpha=alpha, ancilla=ancilla)
    circuit = builder.build(info=info)
    full = count_gates(circuit)
    if cutoff is not None:
        circuit = compress(circuit, cutoff)
    result = EncodingResult(circuit, alpha, ancilla, full, angles)
    if verify:
        from .simulate import verify_block

        result.verified_error = verify_block(circuit, A, alpha, ancilla)
    return result


def scale_invariance_check(A, c: float, protocol: str = "bitble1", *, atol: float = 1e-12,
                           **kwargs) -> dict:
    """Compare circuits for ``A`` and ``c*A``; angles may differ by rounding only."""
    if not c > 0:
        raise ValueError("scale factor must be positive")
    base = synthesize(A, protocol, **kwargs)
    scaled = synthesize(c * np.asarray(A), protocol, **kwargs)
    max_diff = (float(np.abs(base.circuit.angles - scaled.circuit.angles).max(initial=0.0))
                if len(base.circuit) == len(scaled.circuit) else math.inf)
    return {
        "protocol": protocol,
        "same_gates": base.circuit.same_gates(scaled.circuit, atol=atol),
        "max_angle_diff": max_diff,
        "alpha_ratio": scaled.alpha / base.alpha,
    }
