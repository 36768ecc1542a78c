"""Decoupling of multiplexed rotations into single-qubit rotations and CNOTs.

A multiplexor applies ``R(beta_j)`` to its target for every value ``j`` of its
control register. Controls are listed top-down; ``upper`` controls come
first and form the high-order bits of ``j``, ``lower`` controls the low-order
bits. Both decouplings rely on the fact that conjugating ``RY``/``RZ`` by X
negates the angle, so a Gray-code CNOT chain realizes the sign pattern of the
Walsh-Hadamard matrix.
"""
from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .circuit import Circuit, CircuitBuilder, GateKind, NO_CONTROL
from .numerics import control_schedule, fwht_gray_solve

PERMUTATIVE = "permutative"
RECURSIVE = "recursive"
METHODS = (PERMUTATIVE, RECURSIVE)

_AXES = {"Y": GateKind.RY, "Z": GateKind.RZ, GateKind.RY: GateKind.RY, GateKind.RZ: GateKind.RZ}


@dataclass(frozen=True)
class MultiplexorSpec:
    axis: GateKind
    angles: np.ndarray
    target: int
    upper_controls: tuple[int, ...] = ()
    lower_controls: tuple[int, ...] = ()

    def __post_init__(self):
        if self.axis not in _AXES:
            raise ValueError(f"unsupported rotation axis {self.axis!r}")
        object.__setattr__(self, "axis", _AXES[self.axis])
        object.__setattr__(self, "upper_controls", tuple(int(w) for w in self.upper_controls))
        object.__setattr__(self, "lower_controls", tuple(int(w) for w in self.lower_controls))
        angles = np.asarray(self.angles, dtype=np.float64)
        object.__setattr__(self, "angles", angles)
        wires = self.controls + (self.target,)
        if len(set(wires)) != len(wires) or min(wires) < 0:
            raise ValueError("multiplexor wires must be distinct and non-negative")
        if angles.shape != (1 << len(self.controls),):
            raise ValueError(f"expected {1 << len(self.controls)} angles, got shape {angles.shape}")
        if not np.all(np.isfinite(angles)):
            raise ValueError("multiplexor angles must be finite")

    @property
    def controls(self) -> tuple[int, ...]:
        return self.upper_controls + self.lower_controls

    @property
    def k(self) -> int:
        return len(self.upper_controls)

    @property
    def m(self) -> int:
        return len(self.lower_controls)

    def inverse(self) -> "MultiplexorSpec":
        return MultiplexorSpec(self.axis, -self.angles, self.target,
                               self.upper_controls, self.lower_controls)


@dataclass(frozen=True)
class DemuxSchedule:
    """Decoupled gate sequence of one multiplexor.

    ``pattern`` lists the emission order: ``-1`` marks the next entry of
    ``rotations``, any other value is the control wire of a CNOT into
    ``target``.
    """

    axis: GateKind
    target: int
    rotations: np.ndarray
    pattern: np.ndarray

    @property
    def cnot_controls(self) -> np.ndarray:
        return self.pattern[self.pattern >= 0]

    def gate_arrays(self) -> tuple[np.ndarray, ...]:
        is_rot = self.pattern < 0
        size = len(self.pattern)
        kinds = np.where(is_rot, np.int8(self.axis), np.int8(GateKind.CNOT)).astype(np.int8)
        targets = np.full(size, self.target, np.int32)
        controls = np.where(is_rot, NO_CONTROL, self.pattern).astype(np.int32)
        angles = np.zeros(size)
        angles[is_rot] = self.rotations
        return kinds, targets, controls, angles

    def emit(self, builder: CircuitBuilder) -> CircuitBuilder:
        return builder.extend_arrays(*self.gate_arrays())

    def to_circuit(self, num_qubits: int) -> Circuit:
        return self.emit(CircuitBuilder(num_qubits)).build()


def _chain_wires(controls: Sequence[int]) -> np.ndarray:
    """Absolute control wire of every CNOT in the Gray chain over ``controls``."""
    return np.asarray(controls, np.int64)[control_schedule(len(controls)) - 1]


def permutative_demux(spec: MultiplexorSpec) -> DemuxSchedule:
    """Single Gray-code chain over the joint (upper, lower) control register."""
    controls = spec.controls
    if not controls:
        return DemuxSchedule(spec.axis, spec.target, spec.angles.copy(), np.array([-1]))
    rotations = fwht_gray_solve(spec.angles)
    pattern = np.empty(2 * len(rotations), np.int64)
    pattern[0::2] = -1
    pattern[1::2] = _chain_wires(controls)
    return DemuxSchedule(spec.axis, spec.target, rotations, pattern)


def _solve_axis1(block: np.ndarray) -> np.ndarray:
    return fwht_gray_solve(block.T, overwrite=True).T


def recursive_demux(spec: MultiplexorSpec, *, workers: int = 1) -> DemuxSchedule:
    """Two-stage decoupling: upper-register chain wrapping a lower-register chain.

    The angle table ``B[u, l]`` is solved along ``u`` with the upper Gray
    system and then along ``l`` with the lower one. Each upper step emits the
    full lower chain followed by one upper CNOT, giving ``2**(k+m) + 2**k``
    CNOTs. With no lower controls this is the permutative chain; with no
    upper controls it falls back to it as well.
    """
    k, m = spec.k, spec.m
    if k == 0 or m == 0:
        return permutative_demux(spec)
    table = spec.angles.reshape(1 << k, 1 << m)
    # upper system along axis 0; columns are independent
    first = fwht_gray_solve(table)
    if workers > 1 and (1 << k) >= 2 * workers:
        chunks = np.array_split(np.arange(1 << k), workers)
        with ThreadPoolExecutor(workers) as pool:
            parts = list(pool.map(lambda rows: _solve_axis1(first[rows]), chunks))
        second = np.concatenate(parts, axis=0)
    else:
        second = _solve_axis1(first)
    upper = _chain_wires(spec.upper_controls)
    lower = _chain_wires(spec.lower_controls)
    width = 2 * (1 << m) + 1
    pattern = np.empty((1 << k, width), np.int64)
    pattern[:, 0:-1:2] = -1
    pattern[:, 1:-1:2] = lower
    pattern[:, -1] = upper
    return DemuxSchedule(spec.axis, spec.target, second.ravel(), pattern.ravel())


def demux(spec: MultiplexorSpec, method: str = RECURSIVE, *, workers: int = 1) -> DemuxSchedule:
    if method == PERMUTATIVE:
        return permutative_demux(spec)
    if method == RECURSIVE:
        return recursive_demux(spec, workers=workers)
    raise ValueError(f"unknown demultiplexing method {method!r}; expected one of {METHODS}")


def joint_schedule_indices(schedule: DemuxSchedule, spec: MultiplexorSpec) -> list[int]:
    """CNOT controls as 1-based positions in ``spec.controls`` (figure numbering)."""
    position = {w: i + 1 for i, w in enumerate(spec.controls)}
    return [position[int(w)] for w in schedule.cnot_controls]


def uniform_multiplexor(axis, angles, target: int, controls: Sequence[int]) -> MultiplexorSpec:
    """Multiplexor with every control treated as an upper control."""
    return MultiplexorSpec(axis, angles, target, tuple(controls), ())

