import numpy as np
import pytest

from bitble.circuit import CircuitBuilder, GateKind, compress, count_gates
from bitble.demux import (PERMUTATIVE, RECURSIVE, MultiplexorSpec, demux,
                          joint_schedule_indices, permutative_demux, recursive_demux)
from bitble.simulate import circuit_to_unitary, multiplexor_matrix


def _split_spec(axis, angles, k, m):
    # upper controls above the target, lower ones below
    return MultiplexorSpec(axis, angles, k, tuple(range(k)), tuple(range(k + 1, k + m + 1)))


def test_permutative_fixture():
    spec = _split_spec("Y", np.arange(8.0), 1, 2)
    sched = permutative_demux(spec)
    assert joint_schedule_indices(sched, spec) == [3, 2, 3, 1, 3, 2, 3, 1]
    assert len(sched.rotations) == 8 and len(sched.cnot_controls) == 8


def test_recursive_fixture():
    spec = _split_spec("Y", np.arange(8.0), 1, 2)
    sched = recursive_demux(spec)
    assert joint_schedule_indices(sched, spec) == [3, 2, 3, 2, 1, 3, 2, 3, 2, 1]
    assert len(sched.rotations) == 8 and len(sched.cnot_controls) == 10
    # the two idle slots: the last lower CNOT and the upper CNOT sit side by side
    assert sched.pattern[7:9].tolist() == [2, 0]
    assert sched.pattern[16:18].tolist() == [2, 0]


def test_constant_angles_collapse():
    spec = _split_spec("Z", np.full(8, 0.4), 1, 2)
    sched = permutative_demux(spec)
    assert np.allclose(sched.rotations, [0.4] + [0] * 7, atol=1e-15)
    c = compress(sched.to_circuit(4), 1e-12)
    assert count_gates(c) == {"ry": 0, "rz": 1, "cnot": 0, "swap": 0}


def test_single_control():
    b0, b1 = 0.3, 1.1
    spec = MultiplexorSpec("Y", [b0, b1], 1, (0,))
    sched = permutative_demux(spec)
    assert np.allclose(sched.rotations, [(b0 + b1) / 2, (b0 - b1) / 2])
    assert sched.cnot_controls.tolist() == [0, 0]


def test_zero_controls_is_single_rotation():
    sched = permutative_demux(MultiplexorSpec("Z", [0.25], 0))
    assert sched.pattern.tolist() == [-1] and sched.rotations.tolist() == [0.25]


def test_recursive_degenerates_without_lower():
    spec = MultiplexorSpec("Y", np.linspace(0, 1, 8), 3, (0, 1, 2))
    a, b = recursive_demux(spec), permutative_demux(spec)
    assert np.array_equal(a.pattern, b.pattern) and np.array_equal(a.rotations, b.rotations)


@pytest.mark.parametrize("k,m", [(1, 1), (2, 2), (1, 3), (3, 1)])
@pytest.mark.parametrize("axis", ["Y", "Z"])
def test_both_methods_match_oracle(k, m, axis, rng):
    angles = rng.uniform(-np.pi, np.pi, 1 << (k + m))
    spec = _split_spec(axis, angles, k, m)
    q = k + m + 1
    ref = multiplexor_matrix(axis, angles, k, spec.controls, q)
    for method in (PERMUTATIVE, RECURSIVE):
        U = circuit_to_unitary(demux(spec, method).to_circuit(q))
        assert np.max(np.abs(U - ref)) <= 1e-12


def test_cnot_surplus_single_multiplexor(rng):
    for k in range(1, 4):
        for m in range(1, 4):
            spec = _split_spec("Y", rng.standard_normal(1 << (k + m)), k, m)
            extra = len(recursive_demux(spec).cnot_controls) - len(permutative_demux(spec).cnot_controls)
            assert extra == 1 << k


@pytest.mark.parametrize("method", [PERMUTATIVE, RECURSIVE])
def test_cnot_chain_self_closes(method):
    spec = _split_spec("Y", np.zeros(32), 2, 3)
    b = CircuitBuilder(6)
    for w in demux(spec, method).cnot_controls:
        b.cnot(int(w), spec.target)
    # only X flips on the target, so parity of each control must be even
    counts = np.bincount(demux(spec, method).cnot_controls, minlength=6)
    assert np.all(counts % 2 == 0)
    assert len(compress(b.build())) == 0


def test_parallel_rows_bit_identical(rng):
    spec = _split_spec("Z", rng.standard_normal(1 << 9), 4, 5)
    serial = recursive_demux(spec)
    threaded = recursive_demux(spec, workers=4)
    assert np.array_equal(serial.rotations, threaded.rotations)


def test_spec_validation():
    with pytest.raises(ValueError):
        MultiplexorSpec("Y", np.zeros(4), 1, (1,), (2,))
    with pytest.raises(ValueError):
        MultiplexorSpec("Y", np.zeros(3), 0, (1,), (2,))
    with pytest.raises(ValueError):
        MultiplexorSpec("X", np.zeros(2), 0, (1,))
    with pytest.raises(ValueError):
        demux(MultiplexorSpec("Y", np.zeros(2), 0, (1,)), "bogus")


def test_inverse_spec(rng):
    spec = _split_spec("Y", rng.standard_normal(8), 1, 2)
    U = circuit_to_unitary(demux(spec).to_circuit(4))
    V = circuit_to_unitary(demux(spec.inverse()).to_circuit(4))
    assert np.allclose(V @ U, np.eye(16), atol=1e-12)
    assert spec.inverse().axis == GateKind.RY
