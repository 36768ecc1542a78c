"""Binary-tree state preparation.

A state ``psi`` on ``n`` qubits is prepared by two trees of multiplexed
rotations. The Y tree fixes magnitudes: node ``(t, k)`` holds the norm of the
amplitudes below it and the angle splitting it between its two children.
The Z tree fixes phases as sums of half-angles along each root-to-leaf path,
plus a global phase. Tree angles are stored breadth-first, node ``(t, k)`` at
index ``2**t - 1 + k``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .circuit import Circuit, CircuitBuilder, CircuitInfo, GateKind, compress
from .demux import PERMUTATIVE, demux, uniform_multiplexor
from .numerics import OpCounter, log2_exact, rz_tree_solve


def pair_angle(left: float, right: float) -> float:
    """Angle ``phi`` with ``cos(phi/2), sin(phi/2)`` proportional to ``(left, right)``."""
    if left < 0 or right < 0:
        raise ValueError("pair_angle expects non-negative magnitudes")
    return 2.0 * math.atan2(right, left)


def ry_tree_angles(values, *, signed_leaves: bool = False,
                   counter: OpCounter | None = None) -> tuple[np.ndarray, np.ndarray]:
    """Y-tree angles and root norm, computed bottom-up along axis 0.

    Trailing axes are independent trees (e.g. matrix columns). With
    ``signed_leaves`` the bottom level accepts real values of either sign:
    its angles then range over ``(-2pi, 2pi]`` so that the leaves come out
    with the right signs, while every inner node is a non-negative norm.
    """
    level = np.asarray(values, dtype=np.float64)
    size = level.shape[0]
    n = log2_exact(size)
    if not signed_leaves and np.any(level < 0):
        raise ValueError("magnitudes must be non-negative")
    angles = np.empty((size - 1,) + level.shape[1:])
    for t in range(n - 1, -1, -1):
        pairs = level.reshape((1 << t, 2) + level.shape[1:])
        left, right = pairs[:, 0], pairs[:, 1]
        out = angles[(1 << t) - 1:(2 << t) - 1]
        np.arctan2(right, left, out=out)
        out *= 2.0
        level = np.hypot(left, right)
        if counter is not None:
            counter.add(1 << t)
    return angles, level[0]


def rz_phase_tree(phases, *, counter: OpCounter | None = None) -> tuple[np.ndarray, np.ndarray]:
    """Global phase angle ``theta_-1`` and Z-tree angles; see :func:`rz_tree_solve`."""
    return rz_tree_solve(phases, counter=counter)


@dataclass(frozen=True)
class StatePrepAngles:
    y_angles: np.ndarray
    z_angles: np.ndarray
    global_phase: float
    is_real: bool

    @property
    def num_qubits(self) -> int:
        return log2_exact(len(self.y_angles) + 1)


def normalize_state(state) -> np.ndarray:
    psi = np.asarray(state, dtype=np.complex128).ravel()
    log2_exact(len(psi))
    if len(psi) < 2:
        raise ValueError("state must span at least one qubit")
    norm = np.linalg.norm(psi)
    if not norm > 0 or not np.isfinite(norm):
        raise ValueError("state must be finite and nonzero")
    return psi / norm


def state_prep_angles(state, *, counter: OpCounter | None = None) -> StatePrepAngles:
    """Angles for a state. Real input, of any sign, needs no Z tree."""
    psi = normalize_state(state)
    is_real = not np.any(psi.imag)
    if is_real:
        y, _ = ry_tree_angles(psi.real, signed_leaves=True, counter=counter)
        return StatePrepAngles(y, np.zeros_like(y), 0.0, True)
    y, _ = ry_tree_angles(np.abs(psi), counter=counter)
    theta_g, z = rz_phase_tree(np.angle(psi), counter=counter)
    return StatePrepAngles(y, z, float(theta_g), False)


def tree_level(angles: np.ndarray, t: int) -> np.ndarray:
    return angles[(1 << t) - 1:(2 << t) - 1]


def emit_tree(builder: CircuitBuilder, axis: GateKind, angles: np.ndarray,
              wires, method: str = PERMUTATIVE) -> CircuitBuilder:
    """Multiplexors for every tree level; level ``t`` targets ``wires[t]``."""
    for t in range(len(wires)):
        spec = uniform_multiplexor(axis, tree_level(angles, t), wires[t], wires[:t])
        demux(spec, method).emit(builder)
    return builder


def state_prep_circuit(state, demux_method: str = PERMUTATIVE,
                       cutoff: float | None = 0.0) -> Circuit:
    """Circuit taking ``|0...0>`` to ``state`` up to the recorded global phase.

    All Y-tree multiplexors come first, then the Z tree (diagonal, so it acts
    on the already-spread amplitudes). ``cutoff=None`` skips compression.
    """
    if cutoff is not None and cutoff < 0:
        raise ValueError("cutoff must be non-negative")
    angles = state_prep_angles(state)
    n = angles.num_qubits
    wires = list(range(n))
    builder = CircuitBuilder(n)
    emit_tree(builder, GateKind.RY, angles.y_angles, wires, demux_method)
    if not angles.is_real:
        emit_tree(builder, GateKind.RZ, angles.z_angles, wires, demux_method)
    circuit = builder.build(global_phase=-0.5 * angles.global_phase,
                            info=CircuitInfo(protocol="stateprep", ancilla=0))
    return circuit if cutoff is None else compress(circuit, cutoff)
