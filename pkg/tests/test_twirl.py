import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qbirkhoff import matcore, superop as so, twirl, werner
from qbirkhoff.matcore import matrix_unit
from conftest import random_matrix


def random_ucpt(seed, n=3, terms=4):
    rng = np.random.default_rng(seed)
    us = matcore.haar_unitaries(n, terms, rng)
    return so.mixture_of_ad(rng.dirichlet(np.ones(terms)), us)


class TestParts:
    def test_sym_antisym_of_matrix_unit(self):
        e = matrix_unit(3, 0, 1)
        np.testing.assert_array_equal(twirl.sym_part(e), (e + e.T) / 2)
        np.testing.assert_array_equal(twirl.antisym_part(e), (e - e.T) / 2)

    def test_parallelogram(self, rng):
        a = random_matrix(rng, 4)
        s, t = twirl.sym_part(a), twirl.antisym_part(a)
        np.testing.assert_allclose(s + t, a)
        assert matcore.norm2_sq(s) + matcore.norm2_sq(t) == pytest.approx(matcore.norm2_sq(a))
        np.testing.assert_array_equal(twirl.antisym_part(s), 0)


class TestConditionalExpectation:
    def test_fixed_points(self):
        sym = werner.build_symmetry(3)
        np.testing.assert_allclose(twirl.conditional_expectation_E(sym.p_plus), sym.p_plus, atol=1e-14)
        np.testing.assert_allclose(twirl.conditional_expectation_E(np.eye(9)), np.eye(9), atol=1e-14)

    def test_maximally_entangled(self):
        sym = werner.build_symmetry(3)
        np.testing.assert_allclose(twirl.conditional_expectation_E(sym.q), sym.p_plus / 6, atol=1e-14)


class TestClosedForm:
    def test_werner_minus_fixed(self):
        f, c = twirl.twirl_closed_form(werner.werner_minus(3))
        np.testing.assert_allclose(c.as_tuple(), (0, 1), atol=1e-14)
        np.testing.assert_allclose(f.matrix, werner.werner_minus(3).matrix, atol=1e-14)

    @pytest.mark.parametrize("n", [2, 3, 4])
    def test_identity_twirls_to_werner_plus(self, n):
        f, _ = twirl.twirl_closed_form(so.identity(n))
        np.testing.assert_allclose(f.matrix, werner.werner_plus(n).matrix, atol=1e-14)

    @pytest.mark.parametrize("n", [3, 5])
    def test_min_symmetric_unitary(self, n):
        v, _ = werner.min_symmetric_unitary(n)
        _, c = twirl.twirl_closed_form(so.ad(v))
        np.testing.assert_allclose(c.as_tuple(), (1 / n, (n - 1) / n), atol=1e-14)
        np.testing.assert_allclose(twirl.twirl_coeffs_kraus([v]).as_tuple(), (1 / n, (n - 1) / n), atol=1e-14)

    def test_projection(self):
        t = random_ucpt(1)
        f, _ = twirl.twirl_closed_form(t)
        ff, _ = twirl.twirl_closed_form(f)
        np.testing.assert_allclose(ff.matrix, f.matrix, atol=1e-13)

    def test_kraus_formula_matches_closed_form(self, rng):
        kraus = [random_matrix(rng, 3) for _ in range(3)]
        _, c = twirl.twirl_closed_form(so.from_kraus(kraus))
        np.testing.assert_allclose(twirl.twirl_coeffs_kraus(kraus).as_tuple(), c.as_tuple(), atol=1e-12)

    def test_symmetric_and_antisymmetric_kraus(self, rng):
        sym = [twirl.sym_part(random_matrix(rng, 3)) for _ in range(2)]
        anti = [twirl.antisym_part(random_matrix(rng, 3)) for _ in range(2)]
        assert twirl.twirl_coeffs_kraus(sym).c_minus == pytest.approx(0, abs=1e-14)
        assert twirl.twirl_coeffs_kraus(anti).c_plus == pytest.approx(0, abs=1e-14)


class TestGeneralized:
    def test_k1_reduces_to_kraus_formula(self, rng):
        a = random_matrix(rng, 3)
        np.testing.assert_allclose(twirl.generalized_twirl_coeffs(a, 3, 1).as_tuple(),
                                   twirl.twirl_coeffs_kraus([a]).as_tuple(), atol=1e-12)

    def test_transposes_first_leg_only(self):
        # a = 1 (x) e_12 is symmetric on the first leg
        a = np.kron(np.eye(2), matrix_unit(2, 0, 1))
        c = twirl.generalized_twirl_coeffs(a, 2, 2)
        assert c.c_minus == pytest.approx(0)
        assert c.c_plus == pytest.approx(matcore.norm2_sq(a))


class TestMonteCarlo:
    def test_identity(self):
        est = twirl.twirl_monte_carlo(so.identity(3), 20000, seed=1)
        assert so.distance(est, werner.werner_plus(3)) < 0.05

    def test_invariant_map(self):
        n_samples = 2000
        est = twirl.twirl_monte_carlo(werner.werner_minus(3), n_samples, seed=2)
        assert so.distance(est, werner.werner_minus(3)) < 3 / np.sqrt(n_samples)

    def test_seeded_and_worker_independent(self):
        t = random_ucpt(4)
        a = twirl.twirl_monte_carlo(t, 2500, seed=9)
        b = twirl.twirl_monte_carlo(t, 2500, seed=9, workers=3)
        np.testing.assert_array_equal(a.matrix, b.matrix)

    def test_haar_average_of_u_ubar(self):
        avg = twirl.haar_average(lambda us: np.einsum("bij,bkl->ikjl", us, us.conj()).reshape(9, 9),
                                 3, 20000, seed=5)
        assert np.linalg.norm(avg - werner.max_entangled_projection(3)) < 0.05

    def test_rejects_zero_samples(self):
        with pytest.raises(ValueError):
            twirl.haar_average(lambda us: us.sum(axis=0), 2, 0, seed=0)


class TestCovariance:
    def test_intertwining(self):
        for seed in range(5):
            assert twirl.intertwining_check(random_ucpt(seed)) < 1e-12
        assert twirl.intertwining_check(werner.werner_plus(3)) < 1e-14

    def test_conjugation_covariance(self):
        u = matcore.haar_unitary(3, 11)
        assert twirl.conjugation_covariance_check(random_ucpt(7), u) < 1e-12
        assert twirl.conjugation_covariance_check(so.ad(matcore.haar_unitary(3, 12)), u) < 1e-12

    def test_rho_loop_oracle(self, rng):
        u = matcore.haar_unitary(2, 3)
        t = random_ucpt(3, n=2)
        x = random_matrix(rng, 2)
        expected = u @ t(u.T @ x @ u.T.conj().T) @ u.conj().T
        np.testing.assert_allclose(twirl.rho(u, t)(x), expected, atol=1e-12)


class TestDoubleTwirl:
    def test_identity(self):
        np.testing.assert_allclose(twirl.double_twirl(np.eye(9)).as_tuple(), (1, 0, 0, 0), atol=1e-14)

    def test_s_minus_2q(self):
        sym = werner.build_symmetry(3)
        u = sym.s - 2 * sym.q
        np.testing.assert_allclose(twirl.double_twirl(u).as_tuple(), (2 / 27, 0, 0, 25 / 27), atol=1e-12)

    def test_weights_sum_to_one(self):
        u = matcore.haar_unitary(9, 0)
        assert sum(twirl.double_twirl(u).as_tuple()) == pytest.approx(1.0)

    def test_parts_recombine(self, rng):
        u = random_matrix(rng, 9)
        parts = twirl.leg_symmetrizations(u)
        np.testing.assert_allclose(sum(parts.values()), u, atol=1e-13)


@settings(max_examples=25, deadline=None)
@given(st.integers(2, 4), st.integers(0, 2**32 - 1))
def test_twirl_coefficients_sum_to_one_on_channels(n, seed):
    t = random_ucpt(seed, n=n, terms=3)
    _, c = twirl.twirl_closed_form(t)
    assert c.c_plus + c.c_minus == pytest.approx(1.0)
    assert c.c_plus >= -1e-12 and c.c_minus >= -1e-12
