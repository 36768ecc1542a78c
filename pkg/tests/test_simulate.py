import numpy as np
import pytest

from bitble.circuit import Circuit, CircuitBuilder
from bitble.demux import MultiplexorSpec, permutative_demux
from bitble.protocols import PROTOCOLS, synthesize
from bitble.simulate import (ResourceError, apply_to_state, circuit_to_unitary,
                             multiplexor_matrix, propagate, ry_matrix, rz_matrix, verify_block)


def test_rotation_matrices():
    assert np.allclose(ry_matrix(np.pi), [[0, -1], [1, 0]])
    assert np.allclose(rz_matrix(np.pi), np.diag([-1j, 1j]))


def test_empty_and_cnot():
    assert np.array_equal(circuit_to_unitary(Circuit.empty(1)), np.eye(2))
    U = circuit_to_unitary(CircuitBuilder(2).cnot(0, 1).build())
    expected = np.eye(4)[[0, 1, 3, 2]]
    assert np.array_equal(U, expected)


def test_wire_zero_is_most_significant():
    U = circuit_to_unitary(CircuitBuilder(2).ry(0, np.pi).build())
    assert np.allclose(U, np.kron(ry_matrix(np.pi), np.eye(2)))


def test_swap_matrix():
    U = circuit_to_unitary(CircuitBuilder(2).swap(0, 1).build())
    assert np.array_equal(U, np.eye(4)[[0, 2, 1, 3]])


def test_multiplexor_oracle_agrees_with_kron(rng):
    angles = rng.standard_normal(4)
    # controls 0, 1 above target 2: block diagonal of the four rotations
    U = multiplexor_matrix("Y", angles, 2, (0, 1), 3)
    expected = np.zeros((8, 8), complex)
    for j in range(4):
        expected[2 * j:2 * j + 2, 2 * j:2 * j + 2] = ry_matrix(angles[j])
    assert np.allclose(U, expected, atol=1e-15)


def test_permutative_three_controls(rng):
    angles = rng.uniform(-np.pi, np.pi, 8)
    spec = MultiplexorSpec("Y", angles, 3, (0, 1, 2))
    U = circuit_to_unitary(permutative_demux(spec).to_circuit(4))
    assert np.max(np.abs(U - multiplexor_matrix("Y", angles, 3, (0, 1, 2), 4))) <= 1e-12


def test_apply_to_state_basics(rng):
    psi = rng.standard_normal(8) + 1j * rng.standard_normal(8)
    assert np.array_equal(apply_to_state(Circuit.empty(3), psi), psi)
    chain = CircuitBuilder(3).cnot(0, 1).cnot(1, 2).cnot(0, 2).build()
    zero = np.eye(8)[0]
    assert np.array_equal(apply_to_state(chain, zero), zero)


@pytest.mark.parametrize("protocol", PROTOCOLS)
def test_paths_agree(protocol, rng):
    A = rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4))
    c = synthesize(A, protocol, cutoff=0.0).circuit
    U = circuit_to_unitary(c)
    cols = np.stack([apply_to_state(c, e) for e in np.eye(1 << c.num_qubits)], axis=1)
    assert np.max(np.abs(U - cols)) <= 1e-12
    assert np.max(np.abs(U @ U.conj().T - np.eye(len(U)))) <= 1e-10


def test_global_phase_applied():
    c = Circuit.empty(1, global_phase=0.5)
    assert np.allclose(circuit_to_unitary(c), np.exp(0.5j) * np.eye(2))
    assert np.allclose(propagate(c, np.eye(2)), np.exp(0.5j) * np.eye(2))


def test_verify_block_identity():
    c = Circuit.empty(3)
    assert verify_block(c, 2.0 * np.eye(4), 2.0, 1) == 0.0
    with pytest.raises(ValueError):
        verify_block(c, np.eye(2), 1.0, 1)


def test_lossy_compression_reports_error(rng):
    A = rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4))
    r = synthesize(A, "bitble1", cutoff=0.5)
    eps = verify_block(r.circuit, A, r.alpha, r.ancilla)
    assert eps > 0 and np.isfinite(eps)


def test_caps():
    with pytest.raises(ResourceError):
        circuit_to_unitary(Circuit.empty(15))
    with pytest.raises(ResourceError):
        apply_to_state(Circuit.empty(25), np.zeros(1))
