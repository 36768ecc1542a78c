"""Gate-list IR, compression, gate counting and the size metric.

A :class:`Circuit` stores its gates column-wise in numpy arrays so that
circuits with tens of millions of gates stay cheap to build and compress.
Rotations follow the usual convention ``RY(t) = exp(-i t Y / 2)`` and
``RZ(t) = exp(-i t Z / 2)``, which is also what ``ry``/``rz`` mean in the
OpenQASM ``qelib1.inc`` library written by :func:`export_text`.

Wire 0 is the most significant qubit of every state index.
"""
from __future__ import annotations

import dataclasses
import re
from dataclasses import dataclass, field
from enum import IntEnum
from typing import Iterable, Iterator

import numpy as np

try:
    from numba import njit
except ImportError:  # pragma: no cover - numba is optional
    def njit(*args, **kwargs):
        if args and callable(args[0]):
            return args[0]
        return lambda fn: fn


class GateKind(IntEnum):
    RY = 0
    RZ = 1
    CNOT = 2
    SWAP = 3


ROTATIONS = (GateKind.RY, GateKind.RZ)
NO_CONTROL = -1


@dataclass(frozen=True)
class Gate:
    """One gate. ``control`` is the CNOT control or the SWAP partner."""

    kind: GateKind
    target: int
    control: int | None = None
    angle: float | None = None

    def __post_init__(self):
        kind = GateKind(self.kind)
        object.__setattr__(self, "kind", kind)
        if kind in ROTATIONS:
            if self.angle is None or not np.isfinite(self.angle):
                raise ValueError(f"{kind.name} needs a finite angle")
            if self.control is not None:
                raise ValueError(f"{kind.name} takes no control wire")
        else:
            if self.angle is not None:
                raise ValueError(f"{kind.name} carries no angle")
            if self.control is None or self.control == self.target:
                raise ValueError(f"{kind.name} needs a second, distinct wire")


@dataclass(frozen=True)
class CircuitInfo:
    """Block-encoding metadata attached to a circuit."""

    protocol: str | None = None
    alpha: float | None = None
    ancilla: int | None = None
    cutoff: float | None = None

    def __post_init__(self):
        if self.alpha is not None and not self.alpha > 0:
            raise ValueError("normalization factor must be positive")


def _frozen(a: np.ndarray, dtype) -> np.ndarray:
    a = np.ascontiguousarray(a, dtype=dtype)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class Circuit:
    """Immutable ordered gate list over ``num_qubits`` wires.

    Gates live in four parallel arrays: ``kinds``, ``targets``, ``controls``
    (``-1`` for rotations) and ``angles`` (``0`` for CNOT/SWAP).
    """

    num_qubits: int
    kinds: np.ndarray
    targets: np.ndarray
    controls: np.ndarray
    angles: np.ndarray
    global_phase: float = 0.0
    info: CircuitInfo = field(default_factory=CircuitInfo)

    def __post_init__(self):
        object.__setattr__(self, "kinds", _frozen(self.kinds, np.int8))
        object.__setattr__(self, "targets", _frozen(self.targets, np.int32))
        object.__setattr__(self, "controls", _frozen(self.controls, np.int32))
        object.__setattr__(self, "angles", _frozen(self.angles, np.float64))
        size = len(self.kinds)
        if not (len(self.targets) == len(self.controls) == len(self.angles) == size):
            raise ValueError("gate arrays differ in length")
        if self.num_qubits < 1:
            raise ValueError("a circuit needs at least one wire")
        if size:
            if self.targets.min() < 0 or self.targets.max() >= self.num_qubits:
                raise ValueError("target wire out of range")
            if self.controls.max() >= self.num_qubits:
                raise ValueError("control wire out of range")
            two_wire = self.kinds >= GateKind.CNOT
            if np.any(self.controls[two_wire] < 0) or np.any(self.controls[~two_wire] != NO_CONTROL):
                raise ValueError("control wires inconsistent with gate kinds")
            if np.any(self.controls[two_wire] == self.targets[two_wire]):
                raise ValueError("two-wire gate acts twice on one wire")
            if not np.all(np.isfinite(self.angles)):
                raise ValueError("rotation angles must be finite")

    @classmethod
    def empty(cls, num_qubits: int, **kwargs) -> "Circuit":
        z = np.zeros(0)
        return cls(num_qubits, z, z, z, z, **kwargs)

    @classmethod
    def from_gates(cls, num_qubits: int, gates: Iterable[Gate], **kwargs) -> "Circuit":
        builder = CircuitBuilder(num_qubits)
        for g in gates:
            builder.append(g)
        return builder.build(**kwargs)

    def __len__(self) -> int:
        return len(self.kinds)

    def __iter__(self) -> Iterator[Gate]:
        for k, t, c, a in zip(self.kinds.tolist(), self.targets.tolist(),
                              self.controls.tolist(), self.angles.tolist()):
            if k <= GateKind.RZ:
                yield Gate(GateKind(k), t, None, a)
            else:
                yield Gate(GateKind(k), t, c)

    def __getitem__(self, i: int) -> Gate:
        k = GateKind(int(self.kinds[i]))
        if k in ROTATIONS:
            return Gate(k, int(self.targets[i]), None, float(self.angles[i]))
        return Gate(k, int(self.targets[i]), int(self.controls[i]))

    @property
    def gates(self) -> list[Gate]:
        return list(self)

    def same_gates(self, other: "Circuit", atol: float = 0.0) -> bool:
        """Gate-for-gate comparison; angles may differ by ``atol``."""
        if self.num_qubits != other.num_qubits or len(self) != len(other):
            return False
        if not (np.array_equal(self.kinds, other.kinds)
                and np.array_equal(self.targets, other.targets)
                and np.array_equal(self.controls, other.controls)):
            return False
        if atol == 0.0:
            return np.array_equal(self.angles, other.angles)
        return bool(np.all(np.abs(self.angles - other.angles) <= atol))

    def __eq__(self, other) -> bool:
        if not isinstance(other, Circuit):
            return NotImplemented
        return (self.same_gates(other) and self.global_phase == other.global_phase
                and self.info == other.info)

    __hash__ = None

    def replace(self, **changes) -> "Circuit":
        return dataclasses.replace(self, **changes)

    def with_info(self, **changes) -> "Circuit":
        return self.replace(info=dataclasses.replace(self.info, **changes))


class CircuitBuilder:
    """Accumulates gate blocks and concatenates them once in :meth:`build`."""

    def __init__(self, num_qubits: int):
        self.num_qubits = num_qubits
        self._blocks: list[tuple[np.ndarray, ...]] = []
        self._pending: list[tuple[int, int, int, float]] = []
        self.global_phase = 0.0

    def _flush(self):
        if self._pending:
            k, t, c, a = zip(*self._pending)
            self._blocks.append((np.array(k, np.int8), np.array(t, np.int32),
                                 np.array(c, np.int32), np.array(a, np.float64)))
            self._pending = []

    def append(self, gate: Gate) -> "CircuitBuilder":
        control = NO_CONTROL if gate.control is None else gate.control
        angle = 0.0 if gate.angle is None else gate.angle
        self._pending.append((int(gate.kind), gate.target, control, angle))
        return self

    def ry(self, target: int, angle: float):
        return self.append(Gate(GateKind.RY, target, None, float(angle)))

    def rz(self, target: int, angle: float):
        return self.append(Gate(GateKind.RZ, target, None, float(angle)))

    def cnot(self, control: int, target: int):
        return self.append(Gate(GateKind.CNOT, target, control))

    def swap(self, a: int, b: int):
        return self.append(Gate(GateKind.SWAP, a, b))

    def extend_arrays(self, kinds, targets, controls, angles) -> "CircuitBuilder":
        self._flush()
        self._blocks.append((np.asarray(kinds, np.int8), np.asarray(targets, np.int32),
                             np.asarray(controls, np.int32), np.asarray(angles, np.float64)))
        return self

    def extend(self, circuit: Circuit) -> "CircuitBuilder":
        self.global_phase += circuit.global_phase
        return self.extend_arrays(circuit.kinds, circuit.targets, circuit.controls, circuit.angles)

    def build(self, **kwargs) -> Circuit:
        self._flush()
        kwargs.setdefault("global_phase", self.global_phase)
        if not self._blocks:
            return Circuit.empty(self.num_qubits, **kwargs)
        cols = [np.concatenate(c) for c in zip(*self._blocks)]
        return Circuit(self.num_qubits, *cols, **kwargs)


# --- compression ----------------------------------------------------------

@njit(cache=True)
def _cancel_pass(kinds, targets, controls, keep, num_qubits):
    """One sweep of CNOT pair cancellation; returns the number of removed gates.

    ``open_[t, c]`` holds the position of an unmatched CNOT(c -> t) that still
    commutes with every kept gate seen after it, or -1. A new CNOT(c -> t)
    meeting such an entry deletes both. Entries are dropped as soon as a
    non-commuting gate passes: anything acting on ``t`` other than a CNOT
    into ``t``, or anything acting as target on ``c``. RZ is diagonal, so it
    commutes with CNOTs controlled by its wire.
    """
    open_ = np.full((num_qubits, num_qubits), -1, np.int64)
    live = np.zeros(num_qubits, np.int64)  # open entries per target row
    removed = 0
    for i in range(len(kinds)):
        if not keep[i]:
            continue
        k = kinds[i]
        t = targets[i]
        if k == 2:
            c = controls[i]
            # CNOTs into c do not commute with this one (c is our control)
            if live[c] > 0:
                for x in range(num_qubits):
                    open_[c, x] = -1
                live[c] = 0
            # CNOTs controlled by t do not commute (t is our target)
            for y in range(num_qubits):
                if open_[y, t] >= 0:
                    open_[y, t] = -1
                    live[y] -= 1
            j = open_[t, c]
            if j >= 0:
                keep[j] = False
                keep[i] = False
                open_[t, c] = -1
                live[t] -= 1
                removed += 2
            else:
                open_[t, c] = i
                live[t] += 1
        else:
            wires = (t, controls[i]) if k == 3 else (t, -1)
            for w in wires:
                if w < 0:
                    continue
                if live[w] > 0:
                    for x in range(num_qubits):
                        open_[w, x] = -1
                    live[w] = 0
                if k == 1:
                    continue
                for y in range(num_qubits):
                    if open_[y, w] >= 0:
                        open_[y, w] = -1
                        live[y] -= 1
    return removed


def compress(circuit: Circuit, cutoff: float = 0.0) -> Circuit:
    """Drop rotations with ``|angle| <= cutoff`` and cancel redundant CNOT pairs.

    Two equal CNOTs cancel when every gate left between them commutes with
    them, which covers a run of CNOTs on one target uninterrupted by gates on
    its wires. Cancellation repeats until nothing changes, so the result is a
    fixed point: ``compress(compress(c, d), d) == compress(c, d)``. Gates are
    only removed, never reordered.
    """
    if cutoff < 0:
        raise ValueError("cutoff must be non-negative")
    kinds = np.asarray(circuit.kinds)
    keep = ~((kinds <= GateKind.RZ) & (np.abs(circuit.angles) <= cutoff))
    targets = np.asarray(circuit.targets, dtype=np.int64)
    controls = np.asarray(circuit.controls, dtype=np.int64)
    while _cancel_pass(kinds, targets, controls, keep, circuit.num_qubits):
        pass
    info = dataclasses.replace(circuit.info, cutoff=float(cutoff))
    if keep.all():
        return circuit.replace(info=info)
    return Circuit(circuit.num_qubits, circuit.kinds[keep], circuit.targets[keep],
                   circuit.controls[keep], circuit.angles[keep],
                   global_phase=circuit.global_phase, info=info)


# --- metrics --------------------------------------------------------------

def count_gates(circuit: Circuit) -> dict[str, int]:
    """Exact per-kind gate counts, keyed by lower-case kind name."""
    counts = np.bincount(np.asarray(circuit.kinds, dtype=np.int64), minlength=len(GateKind))
    return {kind.name.lower(): int(counts[kind]) for kind in GateKind}


def size_metric(circuit: Circuit) -> dict[str, float]:
    """Gate count times normalization factor, per kind."""
    alpha = circuit.info.alpha
    if alpha is None:
        raise RuntimeError("circuit has no normalization factor attached")
    return {k: v * alpha for k, v in count_gates(circuit).items()}


# --- text format ----------------------------------------------------------

_HEADER = 'OPENQASM 2.0;\ninclude "qelib1.inc";\n'
_GATE_RE = re.compile(
    r"^(ry|rz)\((?P<angle>[^)]*)\)\s+q\[(?P<t>\d+)\];$"
    r"|^(?P<two>cx|swap)\s+q\[(?P<a>\d+)\],\s*q\[(?P<b>\d+)\];$")


def _fmt(x) -> str:
    return "none" if x is None else repr(float(x)) if isinstance(x, float) else str(x)


def export_text(circuit: Circuit) -> str:
    """OpenQASM 2.0 listing; metadata and global phase go in a header comment."""
    info = circuit.info
    lines = [
        f"// protocol={info.protocol or 'none'}, alpha={_fmt(info.alpha)}, "
        f"ancilla={_fmt(info.ancilla)}, global_phase={float(circuit.global_phase)!r}, "
        f"cutoff={_fmt(info.cutoff)}",
        _HEADER.rstrip("\n"),
        f"qreg q[{circuit.num_qubits}];",
    ]
    for k, t, c, a in zip(circuit.kinds.tolist(), circuit.targets.tolist(),
                          circuit.controls.tolist(), circuit.angles.tolist()):
        if k == GateKind.RY:
            lines.append(f"ry({a!r}) q[{t}];")
        elif k == GateKind.RZ:
            lines.append(f"rz({a!r}) q[{t}];")
        elif k == GateKind.CNOT:
            lines.append(f"cx q[{c}],q[{t}];")
        else:
            lines.append(f"swap q[{t}],q[{c}];")
    return "\n".join(lines) + "\n"


def _parse_meta(value: str, cast):
    return None if value == "none" else cast(value)


def parse_text(text: str) -> Circuit:
    """Read back the subset written by :func:`export_text`."""
    meta: dict[str, str] = {}
    num_qubits = None
    kinds, targets, controls, angles = [], [], [], []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("//"):
            for item in line[2:].split(","):
                key, sep, value = item.partition("=")
                if sep:
                    meta[key.strip()] = value.strip()
            continue
        if line.startswith(("OPENQASM", "include")):
            continue
        if line.startswith("qreg"):
            m = re.fullmatch(r"qreg\s+q\[(\d+)\];", line)
            if m is None:
                raise ValueError(f"line {lineno}: bad register declaration")
            num_qubits = int(m.group(1))
            continue
        m = _GATE_RE.match(line)
        if m is None or num_qubits is None:
            raise ValueError(f"line {lineno}: unsupported statement {line!r}")
        if m.group("two"):
            a, b = int(m.group("a")), int(m.group("b"))
            if m.group("two") == "cx":
                kinds.append(GateKind.CNOT)
                targets.append(b)
                controls.append(a)
            else:
                kinds.append(GateKind.SWAP)
                targets.append(a)
                controls.append(b)
            angles.append(0.0)
        else:
            kinds.append(GateKind.RY if line.startswith("ry") else GateKind.RZ)
            targets.append(int(m.group("t")))
            controls.append(NO_CONTROL)
            angles.append(float(m.group("angle")))
    if num_qubits is None:
        raise ValueError("missing qreg declaration")
    info = CircuitInfo(
        protocol=_parse_meta(meta.get("protocol", "none"), str),
        alpha=_parse_meta(meta.get("alpha", "none"), float),
        ancilla=_parse_meta(meta.get("ancilla", "none"), int),
        cutoff=_parse_meta(meta.get("cutoff", "none"), float),
    )
    return Circuit(num_qubits, np.array(kinds, np.int8), np.array(targets), np.array(controls),
                   np.array(angles), global_phase=float(meta.get("global_phase", 0.0)), info=info)
