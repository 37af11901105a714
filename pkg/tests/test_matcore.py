import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qbirkhoff import matcore
from conftest import random_matrix


def test_partial_trace_second_matches_loop(rng):
    n, k = 3, 4
    m = random_matrix(rng, n * k)
    expected = np.zeros((n, n), dtype=complex)
    for i in range(n):
        for j in range(n):
            expected[i, j] = sum(m[i * k + a, j * k + a] for a in range(k))
    np.testing.assert_allclose(matcore.partial_trace_second(m, (n, k), normalized=False), expected)
    np.testing.assert_allclose(matcore.partial_trace_second(m, (n, k)), expected / k)


def test_partial_trace_of_product_state(rng):
    a, b = random_matrix(rng, 2), random_matrix(rng, 3)
    c = random_matrix(rng, 2)
    m = matcore.kron_all([a, b, c])
    np.testing.assert_allclose(matcore.partial_trace(m, (2, 3, 2), keep=[0, 2]), np.trace(b) * np.kron(a, c))
    np.testing.assert_allclose(matcore.partial_trace(m, (2, 3, 2), keep=[1]), np.trace(a) * np.trace(c) * b)


def test_partial_transpose_on_elementary_tensors(rng):
    a, b = random_matrix(rng, 3), random_matrix(rng, 2)
    m = np.kron(a, b)
    np.testing.assert_allclose(matcore.partial_transpose(m, (3, 2), 0), np.kron(a.T, b))
    np.testing.assert_allclose(matcore.partial_transpose(m, (3, 2), 1), np.kron(a, b.T))


def test_partial_transpose_both_legs_is_full_transpose(rng):
    m = random_matrix(rng, 6)
    t = matcore.partial_transpose(matcore.partial_transpose(m, (2, 3), 0), (2, 3), 1)
    np.testing.assert_allclose(t, m.T)


def test_permute_legs_agrees_with_permutation_unitary(rng):
    shape, perm = (2, 3, 2), (2, 0, 1)
    m = random_matrix(rng, 12)
    v = matcore.leg_permutation_unitary(shape, perm)
    np.testing.assert_allclose(matcore.permute_legs(m, shape, perm), v @ m @ v.T)
    a, b, c = random_matrix(rng, 2), random_matrix(rng, 3), random_matrix(rng, 2)
    np.testing.assert_allclose(v @ matcore.kron_all([a, b, c]) @ v.T, matcore.kron_all([c, a, b]))


def test_shape_errors():
    with pytest.raises(matcore.ShapeError):
        matcore.partial_transpose(np.eye(6), (2, 2), 0)
    with pytest.raises(matcore.ShapeError):
        matcore.as_matrix(np.zeros(3))


def test_schatten_norms_normalized():
    assert matcore.schatten_norm_normalized(np.eye(4), 1) == pytest.approx(1.0)
    assert matcore.schatten_norm_normalized(np.eye(4), 2) == pytest.approx(1.0)
    d = np.diag([2.0, 0.0])
    assert matcore.schatten_norm_normalized(d, 2) ** 2 == pytest.approx(2.0)
    assert matcore.op_norm(d) == 2.0
    assert matcore.norm2_sq(d) == pytest.approx(2.0)


def test_hermitian_eigensystem_descending_and_rejects_nonhermitian(rng):
    a = random_matrix(rng, 5)
    h = a + a.conj().T
    w, v = matcore.hermitian_eigensystem(h)
    assert np.all(np.diff(w) <= 0)
    np.testing.assert_allclose(v @ np.diag(w) @ v.conj().T, h, atol=1e-12)
    with pytest.raises(matcore.NotHermitianError):
        matcore.hermitian_eigensystem(a)


def test_haar_unitaries_are_unitary_and_seeded():
    us = matcore.haar_unitaries(4, 50, np.random.default_rng(1))
    for u in us:
        assert matcore.is_unitary(u)
    np.testing.assert_array_equal(matcore.haar_unitary(3, 5), matcore.haar_unitary(3, 5))
    assert not np.allclose(matcore.haar_unitary(3, 5), matcore.haar_unitary(3, 6))


def test_haar_first_moment_vanishes():
    # E[u_ij] = 0 and E[|u_ij|^2] = 1/n
    us = matcore.haar_unitaries(3, 20000, np.random.default_rng(0))
    assert np.abs(us.mean(axis=0)).max() < 0.03
    np.testing.assert_allclose((np.abs(us) ** 2).mean(axis=0), np.full((3, 3), 1 / 3), atol=0.02)


def test_check_unitary_raises():
    with pytest.raises(matcore.NotUnitaryError):
        matcore.check_unitary(np.diag([1.0, 2.0]))
    with pytest.raises(matcore.NotUnitaryError):
        matcore.check_unitary(np.ones((2, 3)))


def test_matrix_json_round_trip(rng):
    m = random_matrix(rng, 3, 2)
    doc = json.loads(json.dumps(matcore.matrix_to_json(m)))
    np.testing.assert_array_equal(matcore.matrix_from_json(doc), m)
    with pytest.raises(matcore.ShapeError):
        matcore.matrix_from_json({"rows": 2, "cols": 2, "entries": [[0, 0]]})


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 3), st.integers(1, 3), st.integers(0, 2**32 - 1))
def test_partial_trace_is_trace_preserving(n, k, seed):
    m = random_matrix(np.random.default_rng(seed), n * k)
    assert np.trace(matcore.partial_trace_second(m, (n, k), normalized=False)) == pytest.approx(np.trace(m))
