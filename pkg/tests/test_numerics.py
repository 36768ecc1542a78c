import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from bitble.numerics import (OpCounter, control_schedule, fwht_gray_solve, gray_indices,
                             gray_sequence, log2_exact, rz_tree_leaves, rz_tree_solve,
                             walsh_gray_matrix)


def test_gray_sequence_examples():
    assert gray_sequence(1).tolist() == [0, 1]
    assert gray_sequence(2).tolist() == [0b00, 0b01, 0b11, 0b10]
    assert gray_sequence(3).tolist() == [0b000, 0b001, 0b011, 0b010, 0b110, 0b111, 0b101, 0b100]


@pytest.mark.parametrize("n", [0, 31, -1])
def test_gray_sequence_range(n):
    with pytest.raises(ValueError):
        gray_sequence(n)


@pytest.mark.parametrize("n", range(1, 11))
def test_gray_neighbours_differ_in_one_bit(n):
    g = gray_sequence(n)
    flips = g ^ np.roll(g, -1)
    assert np.all(np.bitwise_count(flips.astype(np.uint64)) == 1)
    assert len(set(g.tolist())) == 1 << n


def test_control_schedule_examples():
    assert control_schedule(3).tolist() == [3, 2, 3, 1, 3, 2, 3, 1]
    assert control_schedule(1).tolist() == [1, 1]
    assert control_schedule(2).tolist() == [2, 1, 2, 1]


@pytest.mark.parametrize("n", range(2, 12))
def test_control_schedule_closes_and_counts(n):
    sched = control_schedule(n)
    masks = 1 << (n - sched)
    assert np.bitwise_xor.reduce(masks) == 0
    counts = np.bincount(sched, minlength=n + 1)[1:]
    # the control nearest the target flips every other step, the top one twice
    assert counts[-1] == 1 << (n - 1)
    assert counts[0] == 2


def test_fwht_small_cases():
    b0, b1 = 0.7, -1.9
    assert np.allclose(fwht_gray_solve([b0, b1]), [(b0 + b1) / 2, (b0 - b1) / 2], atol=0)
    assert not np.any(fwht_gray_solve(np.zeros(16)))


@pytest.mark.parametrize("n", range(1, 11))
def test_fwht_matches_dense_solve(n, rng):
    beta = rng.uniform(-np.pi, np.pi, 1 << n)
    M = walsh_gray_matrix(n)
    dense = np.linalg.solve(M, beta)
    fast = fwht_gray_solve(beta)
    assert np.max(np.abs(fast - dense)) <= 1e-12
    assert np.max(np.abs(M @ fast - beta)) <= 1e-12


def test_walsh_gray_matrix_entries():
    # M[j, i] = (-1)^{popcount(j & g_i)} written out for n = 2
    expected = np.array([[1, 1, 1, 1], [1, -1, -1, 1], [1, 1, -1, -1], [1, -1, 1, -1]])
    assert np.array_equal(walsh_gray_matrix(2), expected)


def test_fwht_batched_and_overwrite(rng):
    block = rng.standard_normal((8, 5))
    cols = np.stack([fwht_gray_solve(block[:, i]) for i in range(5)], axis=1)
    assert np.array_equal(fwht_gray_solve(block), cols)
    work = block.copy()
    assert np.array_equal(fwht_gray_solve(work, overwrite=True), cols)


def test_fwht_rejects_bad_length():
    with pytest.raises(ValueError):
        fwht_gray_solve(np.zeros(6))


def _rz_forward_matrix(n):
    """Leaf phase k = -g/2 + sum_t s_t theta_{t, k >> (n-t)} / 2, as a dense matrix."""
    size = 1 << n
    F = np.zeros((size, size))
    for k in range(size):
        F[k, 0] = -0.5
        for t in range(n):
            node = k >> (n - t)
            bit = (k >> (n - 1 - t)) & 1
            F[k, 1 + (1 << t) - 1 + node] = 0.5 if bit else -0.5
    return F


def test_rz_tree_n1_example():
    p0, p1 = 0.3, -1.2
    g, th = rz_tree_solve([p0, p1])
    assert np.isclose(g, -p0 - p1, atol=1e-15)
    assert np.allclose(th, [-p0 + p1], atol=1e-15)


@pytest.mark.parametrize("n", range(1, 8))
def test_rz_tree_matches_forward_model(n, rng):
    phases = rng.uniform(-np.pi, np.pi, 1 << n)
    g, th = rz_tree_solve(phases)
    ref = np.linalg.solve(_rz_forward_matrix(n), phases)
    assert abs(g - ref[0]) <= 1e-12
    assert np.max(np.abs(th - ref[1:])) <= 1e-12


def test_rz_tree_zero_and_errors():
    g, th = rz_tree_solve(np.zeros(8))
    assert g == 0 and not np.any(th)
    with pytest.raises(ValueError):
        rz_tree_solve([1.0])


def test_rz_tree_counter_linear():
    counter = OpCounter()
    rz_tree_solve(np.ones(1024), counter=counter)
    assert counter.count == 1023


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 10).flatmap(
    lambda n: arrays(np.float64, 1 << n, elements=st.floats(-10, 10))))
def test_fwht_round_trip(beta):
    n = log2_exact(len(beta))
    assert np.allclose(walsh_gray_matrix(n) @ fwht_gray_solve(beta), beta, atol=1e-12, rtol=0)


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 10).flatmap(
    lambda n: arrays(np.float64, 1 << n, elements=st.floats(-10, 10))))
def test_rz_tree_round_trip(phases):
    g, th = rz_tree_solve(phases)
    assert np.allclose(rz_tree_leaves(g, th), phases, atol=1e-12, rtol=0)


def test_gray_indices_zero_bits():
    assert gray_indices(0).tolist() == [0]
