"""Dense statevector/unitary oracle for circuits.

Two independent paths exist on purpose. :func:`apply_to_state` applies one
gate at a time. :func:`propagate` (behind :func:`circuit_to_unitary` and
:func:`verify_block`) fuses each run of gates sharing a target wire into one
2x2 matrix per setting of the run's control wires. Tests check that the two
agree.
"""
from __future__ import annotations

import numpy as np

from .circuit import Circuit, GateKind

MAX_UNITARY_QUBITS = 14
MAX_STATE_QUBITS = 24


class ResourceError(RuntimeError):
    """Requested simulation exceeds the qubit cap."""


def ry_matrix(theta: float) -> np.ndarray:
    c, s = np.cos(theta / 2), np.sin(theta / 2)
    return np.array([[c, -s], [s, c]], dtype=np.complex128)


def rz_matrix(theta: float) -> np.ndarray:
    return np.diag([np.exp(-0.5j * theta), np.exp(0.5j * theta)])


def _check(num_qubits: int, cap: int):
    if num_qubits > cap:
        raise ResourceError(f"{num_qubits} qubits exceed the simulation cap of {cap}")


def _as_tensor(states: np.ndarray, q: int) -> np.ndarray:
    return states.reshape((2,) * q + (-1,))


def apply_to_state(circuit: Circuit, state) -> np.ndarray:
    """Statevector after the circuit, including its global phase."""
    q = circuit.num_qubits
    _check(q, MAX_STATE_QUBITS)
    psi = np.array(state, dtype=np.complex128).reshape(1 << q)
    psi = psi.reshape((2,) * q)
    for gate in circuit:
        t = gate.target
        if gate.kind == GateKind.SWAP:
            psi = np.swapaxes(psi, t, gate.control)
            continue
        if gate.kind == GateKind.CNOT:
            idx = [slice(None)] * q
            idx[gate.control] = 1
            sub = psi[tuple(idx)]
            axis = t - (t > gate.control)
            psi[tuple(idx)] = np.flip(sub, axis=axis).copy()
            continue
        mat = ry_matrix(gate.angle) if gate.kind == GateKind.RY else rz_matrix(gate.angle)
        psi = np.moveaxis(np.tensordot(mat, psi, axes=([1], [t])), 0, t)
    psi = np.ascontiguousarray(psi).reshape(1 << q)
    return psi * np.exp(1j * circuit.global_phase)


def _run_matrices(kinds, controls, angles, wires) -> np.ndarray:
    """2x2 product of one same-target run for every setting of ``wires``."""
    r = len(wires)
    configs = np.arange(1 << r)
    mats = np.broadcast_to(np.eye(2, dtype=np.complex128), (1 << r, 2, 2)).copy()
    for k, c, a in zip(kinds, controls, angles):
        if k == GateKind.CNOT:
            bit = r - 1 - wires.index(c)
            sel = (configs >> bit) & 1 == 1
            mats[sel] = mats[sel][:, ::-1, :]
        else:
            g = ry_matrix(a) if k == GateKind.RY else rz_matrix(a)
            mats = np.einsum("ij,cjk->cik", g, mats)
    return mats


def propagate(circuit: Circuit, states: np.ndarray) -> np.ndarray:
    """Apply the circuit to the columns of ``states`` (shape ``(2**q, B)``)."""
    q = circuit.num_qubits
    states = np.array(states, dtype=np.complex128).reshape(1 << q, -1)
    batch = states.shape[1]
    psi = _as_tensor(states, q)
    # logical wire w currently lives on tensor axis perm[w]
    perm = list(range(q))
    kinds = circuit.kinds.tolist()
    targets = circuit.targets.tolist()
    controls = circuit.controls.tolist()
    angles = circuit.angles.tolist()
    i, size = 0, len(kinds)
    while i < size:
        t = targets[i]
        if kinds[i] == GateKind.SWAP:
            c = controls[i]
            perm[t], perm[c] = perm[c], perm[t]
            i += 1
            continue
        j = i
        while j < size and targets[j] == t and kinds[j] != GateKind.SWAP:
            j += 1
        run_c = controls[i:j]
        wires = sorted({c for c, k in zip(run_c, kinds[i:j]) if k == GateKind.CNOT})
        mats = _run_matrices(kinds[i:j], run_c, angles[i:j], wires)
        axes = [perm[w] for w in wires] + [perm[t]]
        moved = np.moveaxis(psi, axes, list(range(len(axes))))
        shape = moved.shape
        flat = moved.reshape(1 << len(wires), 2, -1)
        flat = np.einsum("cij,cjr->cir", mats, flat)
        psi = np.moveaxis(flat.reshape(shape), list(range(len(axes))), axes)
        i = j
    order = [perm[w] for w in range(q)] + [q]
    out = np.transpose(psi, order).reshape(1 << q, batch)
    return out * np.exp(1j * circuit.global_phase)


def circuit_to_unitary(circuit: Circuit) -> np.ndarray:
    q = circuit.num_qubits
    _check(q, MAX_UNITARY_QUBITS)
    return propagate(circuit, np.eye(1 << q, dtype=np.complex128))


def encoded_block(circuit: Circuit, ancilla: int) -> np.ndarray:
    """``(<0|_a x I) U (|0>_a x I)``; ancillas are the top wires."""
    q = circuit.num_qubits
    n = q - ancilla
    if n < 0 or ancilla < 0:
        raise ValueError("ancilla count exceeds the circuit width")
    _check(q, MAX_UNITARY_QUBITS)
    dim = 1 << n
    inputs = np.zeros((1 << q, dim), dtype=np.complex128)
    inputs[np.arange(dim), np.arange(dim)] = 1.0
    return propagate(circuit, inputs)[:dim]


def verify_block(circuit: Circuit, A, alpha: float, ancilla: int) -> float:
    """Spectral-norm error ``||A - alpha * block||``."""
    A = np.asarray(A, dtype=np.complex128)
    n = circuit.num_qubits - ancilla
    if n < 0 or A.shape != (1 << n, 1 << n):
        raise ValueError(f"matrix shape {A.shape} does not match {circuit.num_qubits} "
                         f"qubits with {ancilla} ancillas")
    block = encoded_block(circuit, ancilla)
    return float(np.linalg.norm(A - alpha * block, 2))


def multiplexor_matrix(axis, angles, target: int, controls, num_qubits: int) -> np.ndarray:
    """Dense multiplexor built from projectors, independent of any decoupling."""
    kind = GateKind.RY if axis in ("Y", GateKind.RY) else GateKind.RZ
    rot = ry_matrix if kind == GateKind.RY else rz_matrix
    dim = 1 << num_qubits
    idx = np.arange(dim)
    bit = lambda w: (idx >> (num_qubits - 1 - w)) & 1  # noqa: E731
    j = np.zeros(dim, np.int64)
    for w in controls:
        j = (j << 1) | bit(w)
    tb = bit(target)
    partner = idx ^ (1 << (num_qubits - 1 - target))
    U = np.zeros((dim, dim), dtype=np.complex128)
    for col in range(dim):
        m = rot(angles[j[col]])
        U[col, col] = m[tb[col], tb[col]]
        U[partner[col], col] = m[1 - tb[col], tb[col]]
    return U
