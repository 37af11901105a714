"""Flip symmetry, its spectral projections, and the Werner-Holevo channels.

``W_n^+(x) = (Tr(x) 1 + x^t) / (n + 1)`` and ``W_n^-(x) = (Tr(x) 1 - x^t) / (n - 1)``.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from numbers import Rational

import numpy as np

from . import matcore
from .matcore import matrix_unit
from .superop import Superop, ad, depolarizing, from_kraus, identity, tensor, transpose_map

FLOAT_BOUNDARY_TOL = 1e-12


@dataclass(frozen=True)
class SymmetryData:
    n: int
    s: np.ndarray
    p_plus: np.ndarray
    p_minus: np.ndarray
    q: np.ndarray


def flip(n: int) -> np.ndarray:
    """``s_n = sum_ij e_ij (x) e_ji``."""
    return matcore.leg_permutation_unitary((n, n), (1, 0)).astype(complex)


def max_entangled_projection(n: int) -> np.ndarray:
    """``q_n = (1/n) sum_ij e_ij (x) e_ij``, the projection onto ``xi``."""
    xi = np.eye(n).reshape(-1) / np.sqrt(n)
    return np.outer(xi, xi).astype(complex)


def max_entangled_vector(n: int) -> np.ndarray:
    return (np.eye(n).reshape(-1) / np.sqrt(n)).astype(complex)


def build_symmetry(n: int) -> SymmetryData:
    if n < 2:
        raise ValueError("n must be >= 2")
    s = flip(n)
    one = np.eye(n * n)
    return SymmetryData(n, s, (one + s) / 2, (one - s) / 2, max_entangled_projection(n))


def werner_plus(n: int) -> Superop:
    return (n * depolarizing(n) + transpose_map(n)) / (n + 1)


def werner_minus(n: int) -> Superop:
    return (n * depolarizing(n) - transpose_map(n)) / (n - 1)


def werner_plus_kraus(n: int) -> Superop:
    """``(1/(2n+2)) sum_ij b_ij x b_ij*`` with ``b_ij = e_ij + e_ji``."""
    ops = [(matrix_unit(n, i, j) + matrix_unit(n, j, i)) / np.sqrt(2 * n + 2)
           for i in range(n) for j in range(n)]
    return from_kraus(ops)


def werner_minus_kraus(n: int) -> Superop:
    ops = [(matrix_unit(n, i, j) - matrix_unit(n, j, i)) / np.sqrt(2 * n - 2)
           for i in range(n) for j in range(n) if i != j]
    return from_kraus(ops)


@dataclass(frozen=True)
class WernerHolevoPair:
    n: int
    w_plus: Superop
    w_minus: Superop
    kraus_residual: float


def werner_holevo(n: int) -> WernerHolevoPair:
    """Both channels from the trace/transpose formula, cross-checked against Kraus sums."""
    if n < 2:
        raise ValueError("n must be >= 2")
    wp, wm = werner_plus(n), werner_minus(n)
    res = max(
        float(np.max(np.abs(wp.matrix - werner_plus_kraus(n).matrix))),
        float(np.max(np.abs(wm.matrix - werner_minus_kraus(n).matrix))),
    )
    return WernerHolevoPair(n, wp, wm, res)


def werner_mixture(lam: float, n: int = 3) -> Superop:
    """``T_lambda = lambda W_n^+ + (1 - lambda) W_n^-``."""
    lam = float(lam)
    return lam * werner_plus(n) + (1 - lam) * werner_minus(n)


def wh_difference_on_flip(n: int) -> np.ndarray:
    """``((W^+ - W^-) (x) id_n)(s_n)``."""
    diff = werner_plus(n) - werner_minus(n)
    return tensor(diff, identity(n))(flip(n))


def wh_distance_witness(n: int) -> float:
    """Lower bound for ``||W^+ - W^-||_cb`` from the flip; equals the upper bound 2."""
    return matcore.op_norm(wh_difference_on_flip(n))


def min_symmetric_unitary(n: int) -> tuple[np.ndarray, float]:
    """The unitary ``e_11 + sum (e_{2i,2i+1} - e_{2i+1,2i})`` and ``||(v+v^t)/2||_2^2 = 1/n``."""
    if n < 1 or n % 2 == 0:
        raise ValueError("n must be an odd positive integer")
    v = matrix_unit(n, 0, 0)
    for i in range(1, n, 2):
        v = v + matrix_unit(n, i, i + 1) - matrix_unit(n, i + 1, i)
    return v, matcore.norm2_sq((v + v.T) / 2)


def symmetric_weight(v) -> float:
    """``||(v + v^t)/2||_2^2``; bounded below by ``1/n`` on unitaries when ``n`` is odd."""
    v = matcore.as_matrix(v)
    return matcore.norm2_sq((v + v.T) / 2)


@dataclass(frozen=True)
class DistanceCertificate:
    """Closed-form cb-distance with both halves of its proof made numeric.

    The upper half is a witness channel ``lam W^+ + (1 - lam) W^-`` in the
    target set, reproduced numerically (``witness_residual``).  The lower half
    is the twirl-contraction argument: every element of the set twirls to some
    ``mu W^+ + (1 - mu) W^-`` with ``mu >= lower_weight``, and the cb distance
    ``||W^+ - W^-||_cb = 2`` (``cb_gap``) turns that into ``2 * lower_weight``.
    """

    target: str
    distance: float
    witness_weights: tuple[float, float]
    witness_residual: float
    lower_weight: float
    cb_gap: float
    notes: str
    exact: str = ""


def dist_mixed_unitary_wminus(n: int) -> DistanceCertificate:
    """``d_cb(W_n^-, conv(Aut(M_n))) = 2/n`` for odd ``n >= 3``."""
    from .twirl import twirl_closed_form

    if n < 3 or n % 2 == 0:
        raise ValueError("n must be an odd integer >= 3")
    v, value = min_symmetric_unitary(n)
    twirled, coeffs = twirl_closed_form(ad(v))
    expected = (1 / n) * werner_plus(n) + ((n - 1) / n) * werner_minus(n)
    residual = float(np.max(np.abs(twirled.matrix - expected.matrix)))
    gap = wh_distance_witness(n)
    return DistanceCertificate(
        target=f"W_{n}^- to conv(Aut(M_{n}))",
        distance=coeffs.c_plus * gap,
        witness_weights=(coeffs.c_plus, coeffs.c_minus),
        witness_residual=residual,
        lower_weight=value,
        cb_gap=gap,
        notes="twirl of ad(v) for the min-symmetric unitary v; lower bound min ||(v+v^t)/2||_2^2 = 1/n",
        exact=f"2/{n}",
    )


def _as_exact(lam):
    if isinstance(lam, (Rational, Fraction)):
        return Fraction(lam)
    return None


def _threshold_test(lam, threshold: Fraction) -> bool:
    exact = _as_exact(lam)
    if exact is not None:
        if not 0 <= exact <= 1:
            raise ValueError("lambda must lie in [0, 1]")
        return exact >= threshold
    lam = float(lam)
    if not -FLOAT_BOUNDARY_TOL <= lam <= 1 + FLOAT_BOUNDARY_TOL:
        raise ValueError("lambda must lie in [0, 1]")
    return lam >= float(threshold) - FLOAT_BOUNDARY_TOL


def mixture_membership_mixed_unitary(lam, n: int) -> bool:
    """Is ``lam W_n^+ + (1-lam) W_n^-`` mixed-unitary (``n`` odd)?  Iff ``lam >= 1/n``.

    Rational inputs (``int``/``Fraction``) are compared exactly; floats get a
    ``1e-12`` allowance at the boundary so that ``1/3`` typed as a float counts.
    """
    if n < 1 or n % 2 == 0:
        raise ValueError("n must be odd")
    return _threshold_test(lam, Fraction(1, n))


def mixture_membership_factorizable(lam) -> bool:
    """Is ``lam W_3^+ + (1-lam) W_3^-`` factorizable?  Iff ``lam >= 2/27``."""
    return _threshold_test(lam, Fraction(2, 27))
