import csv
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qbirkhoff import convex, matcore, superop as so, twirl, werner


def lstsq_weights(target, family):
    """Fit ``target`` by the family at the superoperator level (independent of B and C)."""
    a = np.stack([f.matrix.reshape(-1) for f in family], axis=1)
    w, *_ = np.linalg.lstsq(a, target.matrix.reshape(-1), rcond=None)
    return w.real


@pytest.fixture(scope="module")
def r_family():
    t13 = werner.werner_mixture(1 / 3, 3)
    rs = [convex.symmetrize3(so.tensor(q, t13)) for q in convex.q_channels()]
    rs.append(werner.werner_plus(27) / 27 + (26 / 27) * werner.werner_minus(27))
    return rs


class TestBasis:
    def test_mixed_basis_is_swap_symmetric(self):
        _, wm, _ = convex.basis_channels2()
        swap = matcore.leg_permutation_unitary((3, 3), (1, 0))
        k = np.kron(swap, swap)
        np.testing.assert_allclose(k @ wm.matrix @ k.T, wm.matrix, atol=1e-14)

    def test_all_ucpt(self):
        for b in convex.basis_channels2() + convex.basis_channels3():
            assert so.validate_ucpt(b).is_ucpt

    def test_omega_unitary(self):
        v = convex.omega_unitary()
        assert v[0, 4] == 1
        np.testing.assert_allclose(v[1, 3], complex(-0.5, np.sqrt(3) / 2))
        np.testing.assert_allclose(twirl.leg_symmetrizations(v)["SS"], 0, atol=1e-15)
        np.testing.assert_allclose(twirl.double_twirl(v).as_tuple(), (0, 1 / 3, 1 / 3, 1 / 3), atol=1e-14)

    def test_q_channels_match_b_columns(self):
        for a, b in zip(convex.q_channels(), convex.q_channels_from_definition()):
            assert so.max_distance(a, b) < 1e-12
        wpp, _, _ = convex.basis_channels2()
        assert so.max_distance(convex.q_channels()[0], wpp) < 1e-14


class TestSymmetrize:
    def test_product_orbit(self):
        wp, wm = werner.werner_plus(3), werner.werner_minus(3)
        _, wm_plus, _, _ = convex.basis_channels3()
        out = convex.symmetrize3(so.tensor_all([wp, wp, wm]))
        assert so.max_distance(out, wm_plus) < 1e-14

    def test_idempotent_and_matches_conjugation(self):
        rng = np.random.default_rng(0)
        t = so.Superop(rng.standard_normal((729, 729)))
        once = convex.symmetrize3(t)
        assert so.max_distance(convex.symmetrize3(once), once) < 1e-12
        v = matcore.leg_permutation_unitary((3, 3, 3), (1, 2, 0))
        k = np.kron(v, v)
        np.testing.assert_allclose(k @ once.matrix @ k.T, once.matrix, atol=1e-12)

    def test_rejects_wrong_size(self):
        with pytest.raises(ValueError):
            convex.symmetrize3(so.identity(3))


class TestIdentities:
    def test_r_channels(self):
        for key, res in convex.r_channel_residuals().items():
            assert res < 1e-12, key
        r1 = convex.r_channels()[0]
        ppp, wmp, _, _ = convex.basis_channels3()
        assert so.max_distance(r1, (ppp + 2 * wmp) / 3) < 1e-14
        np.testing.assert_allclose(convex.C_MATRIX[:, 3] * 189, [4, 168, 3, 14])

    def test_w27(self):
        for key, res in convex.w27_decompositions().items():
            assert res < 1e-12, key

    def test_werner_27_against_module(self):
        assert so.max_distance(convex.werner_27(1), werner.werner_plus(27)) < 1e-14
        assert so.max_distance(convex.werner_27(-1), werner.werner_minus(27)) < 1e-14


class TestCoefficients:
    @pytest.mark.parametrize("lam", [0.0, 0.15, 0.25, 0.6, 1.0])
    def test_p_against_superop_fit(self, lam):
        target = so.tensor(werner.werner_mixture(lam), werner.werner_mixture(lam))
        np.testing.assert_allclose(convex.p_coefficients(lam).weights,
                                   lstsq_weights(target, convex.q_channels()), atol=1e-10)

    @pytest.mark.parametrize("lam", [0.1, 0.25])
    def test_q_against_superop_fit(self, lam, r_family):
        target = convex.tensor_power(lam, 3)
        np.testing.assert_allclose(convex.q_coefficients(lam).weights, lstsq_weights(target, r_family), atol=1e-9)

    def test_known_values(self):
        np.testing.assert_allclose(convex.p_coefficients(1).weights, (1, 0, 0), atol=1e-14)
        # p1(1/4) = (21/16 + 6/4 - 2)/25
        assert convex.p_coefficients(0.25).weights[0] == pytest.approx((21 / 16 + 1.5 - 2) / 25, abs=1e-14)
        np.testing.assert_allclose(convex.q_coefficients(1 / 3).weights, (7 / 75, 6 / 25, 2 / 3, 0), atol=1e-14)
        np.testing.assert_allclose(convex.q_coefficients(0.25).weights,
                                   (0.00866, 0.51195, 0.47483, 0.00456), atol=1e-5)

    def test_q4_closed_form(self):
        for lam in np.linspace(0, 1, 11):
            assert convex.q_coefficients(lam).weights[3] == pytest.approx(-(7 / 24) * (3 * lam - 1) ** 3, abs=1e-13)

    def test_polynomials_agree_with_solve(self):
        ps, qs = convex.solved_polynomials(2), convex.solved_polynomials(3)
        for lam in (0.0, 0.3, 0.77):
            np.testing.assert_allclose([p(lam) for p in ps], convex.p_coefficients(lam).weights, atol=1e-13)
            np.testing.assert_allclose([q(lam) for q in qs], convex.q_coefficients(lam).weights, atol=1e-13)

    def test_printed_forms(self):
        dev = convex.printed_polynomial_crosscheck()
        for key in ("p1", "p2", "p3", "q1", "q2", "q4", "q3_corrected"):
            assert dev[key] < 1e-12, key
        assert dev["q3_printed"] > 1e-3

    def test_rejects_out_of_range(self):
        with pytest.raises(ValueError):
            convex.p_coefficients(1.5)
        with pytest.raises(ValueError):
            convex.solved_polynomials(4)


class TestRoots:
    def test_p1_root(self):
        r = convex.p1_root()
        assert r == pytest.approx(0.19721, abs=1e-5)
        assert abs(convex.p_coefficients(r).weights[0]) < 1e-12

    def test_published_roots(self):
        roots = convex.coefficient_roots()
        assert [r for r in roots["q1"] if 0 <= r <= 1][0] == pytest.approx(0.23971, abs=1e-5)
        assert min(roots["q3"]) == pytest.approx(0.14241, abs=1e-5)
        assert roots["q4"] == [1 / 3]

    def test_real_roots_of_quadratic(self):
        poly = np.polynomial.Polynomial([-2, 0, 1])
        np.testing.assert_allclose(convex.real_roots(poly, lo=-2.0), [-np.sqrt(2), np.sqrt(2)], atol=1e-12)


class TestMembership:
    def test_quarter(self):
        c2 = convex.certify_tensor_membership(0.25, 2)
        c3 = convex.certify_tensor_membership(0.25, 3)
        assert c2.verdict and c3.verdict
        assert c3.reconstruction_residual < 1e-9
        np.testing.assert_allclose(c3.coefficients.weights, (0.00866, 0.51195, 0.47483, 0.00456), atol=1e-5)

    def test_failure_below_p1_root(self):
        c = convex.certify_tensor_membership(0.15, 2)
        assert not c.verdict
        assert c.min_weight == pytest.approx((21 * 0.0225 + 0.9 - 2) / 25)

    def test_boundary(self):
        c = convex.certify_tensor_membership(1 / 3, 3)
        assert c.verdict
        assert abs(c.coefficients.weights[3]) < 1e-12

    def test_product_route(self):
        c = convex.certify_tensor_membership(0.8, 2)
        assert c.route == "product" and c.verdict
        assert c.reconstruction_residual < 1e-9

    def test_levels_agree(self):
        for lam in (0.1, 0.2, 0.3, 0.9):
            for power in (2, 3):
                a = convex.certify_tensor_membership(lam, power)
                b = convex.certify_tensor_membership(lam, power, level="coefficients")
                assert a.verdict == b.verdict
                np.testing.assert_allclose(a.coefficients.weights, b.coefficients.weights)

    def test_monotone_verdict(self):
        grid = np.linspace(0, 1, 41)
        for power in (2, 3):
            flags = [convex.certify_tensor_membership(x, power, level="coefficients").verdict for x in grid]
            first = flags.index(True)
            assert all(flags[first:])

    def test_invalid(self):
        with pytest.raises(ValueError):
            convex.certify_tensor_membership(0.5, 4)
        with pytest.raises(ValueError):
            convex.certify_tensor_membership(-0.1, 2)
        with pytest.raises(ValueError):
            convex.certify_tensor_membership(0.5, 2, level="fast")

    def test_json(self):
        doc = convex.certify_tensor_membership(0.25, 2).to_json()
        assert set(doc["coefficients"]) == set(convex.Q_NAMES)
        assert doc["verdict"] is True


class TestPath:
    def test_published_points(self):
        assert convex.mw_path(Fraction(1)) == convex.PathPoint(Fraction(1), Fraction(-23, 27), Fraction(1))
        pt = convex.mw_path(Fraction(1, 2))
        assert (pt.x, pt.y) == (Fraction(-1, 3), Fraction(-1, 3))
        f = convex.mw_path(0.5)
        assert f.x == pytest.approx(-1 / 3) and f.y == pytest.approx(-1 / 3)

    def test_lambda0(self):
        assert round(convex.mw_lambda0(), 5) == 0.17507
        assert convex.mw_lambda0_intersection() == pytest.approx(convex.mw_lambda0(), abs=1e-10)
        assert convex.mw_lambda0() == pytest.approx(1 / 3 - convex.mw_epsilon() / 2, abs=1e-12)

    def test_alpha_coordinates(self):
        assert convex.alpha_coordinates([1, 0, 0]) == (1, 1)
        assert convex.alpha_coordinates([0, 1, 0]) == (0, -1)
        assert convex.alpha_coordinates([0, 0, 1]) == (-1, 1)

    def test_out_of_range(self):
        with pytest.raises(ValueError):
            convex.mw_path(Fraction(3, 2))


class TestExport:
    def test_curve_rows(self):
        rows = convex.curve_export([1, 1 / 3, convex.p1_root()])
        assert len(rows) == 3 and all(len(r) == len(convex.CURVE_HEADER) for r in rows)
        np.testing.assert_allclose(rows[0][1:4], (1, 0, 0), atol=1e-14)
        assert abs(rows[1][7]) < 1e-12
        assert abs(rows[2][1]) < 1e-9
        assert rows[0][8]

    def test_csv(self, tmp_path):
        out = tmp_path / "curves.csv"
        convex.write_csv(out, convex.CURVE_HEADER, convex.curve_export([0.1, 0.5]))
        with open(out) as fh:
            rows = list(csv.reader(fh))
        assert tuple(rows[0]) == convex.CURVE_HEADER
        assert rows[1][-2:] == ["false", "false"]
        assert rows[2][-2:] == ["true", "true"]
        assert float(rows[2][0]) == 0.5

    def test_path_rows(self, tmp_path):
        rows = convex.path_export(np.linspace(0, 1, 5))
        assert len(rows) == 5
        assert rows[-1][1] == pytest.approx(-23 / 27)


@settings(max_examples=30, deadline=None)
@given(st.floats(0, 1))
def test_coefficients_always_sum_to_one(lam):
    assert convex.p_coefficients(lam).weights.sum() == pytest.approx(1.0)
    assert convex.q_coefficients(lam).weights.sum() == pytest.approx(1.0)
