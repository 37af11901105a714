"""Convex combinations of tensor powers of ``T_lambda = lambda W^+ + (1 - lambda) W^-`` on ``M_3``.

``T_lambda^(x)2`` and ``T_lambda^(x)3`` live in the span of products of
``W^+ = W_3^+`` and ``W^- = W_3^-``.  Small families of mixed-unitary channels
(``Q_1..Q_3`` on ``M_9``, ``R_1..R_4`` on ``M_27``) span the same symmetric
subspaces, so membership of ``T_lambda^(x)k`` in their convex hull is a
3x3 or 4x4 linear solve followed by a sign check.
"""
from __future__ import annotations

import csv
import itertools
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from math import comb
from numbers import Rational
from typing import Iterable, Sequence

import numpy as np
from numpy.polynomial import Polynomial
from scipy.optimize import brentq

from . import matcore
from .superop import Superop, depolarizing, tensor, tensor_all, transpose_map
from .twirl import DoubleTwirlCoefficients, double_twirl
from .werner import werner_minus, werner_mixture, werner_plus

WEIGHT_TOL = 1e-10
RESIDUAL_TOL = 1e-9
ROOT_XTOL = 1e-12

BASIS2 = ("W++", "Wm", "W--")
BASIS3 = ("W+++", "Wm+", "Wm-", "W---")
Q_NAMES = ("Q1", "Q2", "Q3")
R_NAMES = ("R1", "R2", "R3", "R4")

# columns: Q_i in the basis (W++, Wm, W--)
B_MATRIX = np.array([
    [1, 2 / 27, 0],
    [0, 0, 2 / 3],
    [0, 25 / 27, 1 / 3],
])
# columns: R_i in the basis (W+++, Wm+, Wm-, W---)
C_MATRIX = np.array([
    [1 / 3, 2 / 81, 0, 4 / 189],
    [2 / 3, 4 / 81, 2 / 9, 168 / 189],
    [0, 25 / 81, 5 / 9, 3 / 189],
    [0, 50 / 81, 2 / 9, 14 / 189],
])

# closed forms as printed, ascending powers of lambda
P_PRINTED = (
    Polynomial([-2 / 25, 6 / 25, 21 / 25]),
    Polynomial([27 / 25, -81 / 25, 54 / 25]),
    Polynomial([0, 3, -3]),
)
Q_PRINTED = (
    Polynomial([-149 / 900, 77 / 100, -123 / 100, 15 / 4]),
    Polynomial([397 / 200, -1629 / 200, 1971 / 200, -27 / 8]),
    Polynomial([-10 / 9, 10, -33 / 20, 15 / 2]),
    -7 / 24 * Polynomial([-1, 3]) ** 3,
)
Q3_CORRECTED = Polynomial([-10 / 9, 10, -33 / 2, 15 / 2])


@dataclass(frozen=True)
class MixtureCoefficients:
    basis: tuple[str, ...]
    weights: np.ndarray

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float)
        if w.shape != (len(self.basis),):
            raise ValueError("one weight per basis element")
        if abs(w.sum() - 1) > WEIGHT_TOL:
            raise ValueError(f"weights sum to {w.sum():.15f}, not 1")
        object.__setattr__(self, "weights", w)

    def as_dict(self) -> dict[str, float]:
        return {name: float(w) for name, w in zip(self.basis, self.weights)}


@dataclass(frozen=True)
class MembershipCertificate:
    lam: float
    power: int
    coefficients: MixtureCoefficients
    min_weight: float
    reconstruction_residual: float
    verdict: bool
    route: str

    def to_json(self) -> dict:
        return {
            "lambda": self.lam,
            "power": self.power,
            "route": self.route,
            "coefficients": self.coefficients.as_dict(),
            "min_weight": self.min_weight,
            "reconstruction_residual": self.reconstruction_residual,
            "verdict": self.verdict,
        }


@dataclass(frozen=True)
class PathPoint:
    t: float
    x: float
    y: float


# -- basis channels ----------------------------------------------------------

@lru_cache(maxsize=None)
def _wpm() -> tuple[Superop, Superop]:
    return werner_plus(3), werner_minus(3)


def _product(signs: str) -> Superop:
    wp, wm = _wpm()
    return tensor_all([wp if s == "+" else wm for s in signs])


@lru_cache(maxsize=None)
def basis_channels2() -> tuple[Superop, Superop, Superop]:
    """``(W^+ (x) W^+, W_m, W^- (x) W^-)`` with ``W_m = (W^+ (x) W^- + W^- (x) W^+)/2``."""
    wm = (_product("+-") + _product("-+")) / 2
    return _product("++"), wm, _product("--")


@lru_cache(maxsize=None)
def basis_channels3() -> tuple[Superop, Superop, Superop, Superop]:
    """``(W^+++, W_m^+, W_m^-, W^---)``; the middle two average the three placements."""
    wm_plus = (_product("++-") + _product("+-+") + _product("-++")) / 3
    wm_minus = (_product("+--") + _product("-+-") + _product("--+")) / 3
    return _product("+++"), wm_plus, wm_minus, _product("---")


def omega_unitary() -> np.ndarray:
    """``v_1 + omega v_2 + conj(omega) v_3`` on ``C^3 (x) C^3`` (cyclic pairs 12, 23, 31)."""
    omega = complex(-0.5, np.sqrt(3) / 2)
    e = matcore.matrix_unit
    pairs = [(0, 1), (1, 2), (2, 0)]
    v = np.zeros((9, 9), dtype=complex)
    for i, j in pairs:
        v += np.kron(e(3, i, j), e(3, i, j))
        v += omega * np.kron(e(3, i, j), e(3, j, i))
        v += np.conj(omega) * np.kron(e(3, j, i), e(3, i, j))
    return matcore.check_unitary(v, tol=1e-14)


def channel_from_double_twirl(c: DoubleTwirlCoefficients) -> Superop:
    return (c.c_pp * _product("++") + c.c_pm * _product("+-")
            + c.c_mp * _product("-+") + c.c_mm * _product("--"))


@lru_cache(maxsize=None)
def q_channels() -> tuple[Superop, Superop, Superop]:
    """``Q_1..Q_3`` as the double twirls of ``ad(1)``, ``ad(s - 2q)`` and ``ad(v(omega))``."""
    from .factorize import s_minus_2q_witness

    sources = (np.eye(9), s_minus_2q_witness().u, omega_unitary())
    return tuple(channel_from_double_twirl(double_twirl(u)) for u in sources)


def q_channels_from_definition() -> tuple[Superop, Superop, Superop]:
    wpp, wm, wmm = basis_channels2()
    return tuple(Superop(sum(B_MATRIX[r, i] * b.matrix for r, b in enumerate((wpp, wm, wmm))))
                 for i in range(3))


@lru_cache(maxsize=None)
def _leg_permutation_indices() -> tuple[np.ndarray, ...]:
    """Index arrays ``p`` with ``K_pi T K_pi^t = T[p][:, p]`` for the six leg permutations of ``M_27``."""
    out = []
    for perm in itertools.permutations(range(3)):
        v = matcore.leg_permutation_unitary((3, 3, 3), perm)
        k = np.kron(v, v)
        out.append(np.argmax(k, axis=1))
    return tuple(out)


def symmetrize3(t: Superop) -> Superop:
    """``(1/6) sum_pi ad(V_pi) o T o ad(V_pi)*`` over permutations of the three ``M_3`` legs."""
    if t.n != 27:
        raise ValueError("symmetrize3 acts on superoperators of M_27")
    m = t.matrix
    total = np.zeros_like(m)
    for p in _leg_permutation_indices():
        total += m[np.ix_(p, p)]
    return Superop(total / 6)


@lru_cache(maxsize=None)
def r_channels() -> tuple[Superop, Superop, Superop, Superop]:
    """``R_1..R_4`` from the columns of ``C``."""
    basis = basis_channels3()
    return tuple(Superop(sum(C_MATRIX[r, i] * b.matrix for r, b in enumerate(basis))) for i in range(4))


def werner_27(sign: int) -> Superop:
    """``W_27^+-`` built directly from ``(27 S_27 +- t_27)/(27 +- 1)``."""
    s27 = depolarizing(27)
    t27 = transpose_map(27)
    return (27 * s27 + sign * t27) / (27 + sign)


def r_channel_residuals() -> dict[str, float]:
    """``R_i = sigma(Q_i (x) T_(1/3))`` for ``i = 1, 2, 3`` and ``R_4 = W_27^+/27 + 26 W_27^-/27``."""
    t13 = werner_mixture(1 / 3, 3)
    rs = r_channels()
    out = {}
    for i, q in enumerate(q_channels()):
        out[f"R{i + 1}"] = _max_abs(symmetrize3(tensor(q, t13)).matrix - rs[i].matrix)
    out["R4"] = _max_abs(rs[3].matrix - (werner_27(1).matrix / 27 + 26 * werner_27(-1).matrix / 27))
    return out


def w27_decompositions() -> dict[str, float]:
    """Residuals of the four ``W_27`` / ``S_27`` / ``t_27`` identities and the product cross-checks."""
    ppp, mp, mm, mmm = (b.matrix for b in basis_channels3())
    s27, t27 = depolarizing(27).matrix, transpose_map(27).matrix
    return {
        "W27+": _max_abs(werner_27(1).matrix - (4 * ppp + 3 * mm) / 7),
        "W27-": _max_abs(werner_27(-1).matrix - (12 * mp + mmm) / 13),
        "S27": _max_abs(s27 - (8 * ppp + 12 * mp + 6 * mm + mmm) / 27),
        "t27": _max_abs(t27 - (8 * ppp - 12 * mp + 6 * mm - mmm)),
        "S27=S3^3": _max_abs(s27 - tensor_all([depolarizing(3)] * 3).matrix),
        "t27=t3^3": _max_abs(t27 - tensor_all([transpose_map(3)] * 3).matrix),
    }


def _max_abs(m) -> float:
    return float(np.max(np.abs(m)))


# -- coefficient systems -----------------------------------------------------

def _check_lambda(lam) -> float:
    x = float(lam)
    if not 0 <= x <= 1:
        raise ValueError(f"lambda must lie in [0, 1], got {lam}")
    return x


def _rhs2(lam: float) -> np.ndarray:
    return np.array([lam**2, 2 * lam * (1 - lam), (1 - lam) ** 2])


def _rhs3(lam: float) -> np.ndarray:
    return np.array([lam**3, 3 * lam**2 * (1 - lam), 3 * lam * (1 - lam) ** 2, (1 - lam) ** 3])


def p_coefficients(lam) -> MixtureCoefficients:
    """Weights of ``T_lambda^(x)2`` on ``(Q_1, Q_2, Q_3)``: ``B^-1 (l^2, 2l(1-l), (1-l)^2)``."""
    lam = _check_lambda(lam)
    return MixtureCoefficients(Q_NAMES, np.linalg.solve(B_MATRIX, _rhs2(lam)))


def q_coefficients(lam) -> MixtureCoefficients:
    """Weights of ``T_lambda^(x)3`` on ``(R_1, .., R_4)``: ``C^-1 (l^3, 3l^2(1-l), 3l(1-l)^2, (1-l)^3)``."""
    lam = _check_lambda(lam)
    return MixtureCoefficients(R_NAMES, np.linalg.solve(C_MATRIX, _rhs3(lam)))


def solved_polynomials(power: int) -> tuple[Polynomial, ...]:
    """Exact polynomial form of the solved weights: ``B^-1`` (or ``C^-1``) applied to the binomial basis."""
    if power not in (2, 3):
        raise ValueError("power must be 2 or 3")
    mat = B_MATRIX if power == 2 else C_MATRIX
    rows = np.array([
        (Polynomial([0, 1]) ** (power - j) * Polynomial([1, -1]) ** j * comb(power, j)).coef
        for j in range(power + 1)
    ])
    coef = np.linalg.solve(mat, rows)
    return tuple(Polynomial(c) for c in coef)


def printed_polynomial_crosscheck(grid: Iterable[float] | None = None) -> dict[str, float]:
    """Max deviation on ``grid`` between each printed closed form and the linear solve.

    ``q3_printed`` is expected to be large: the printed quadratic coefficient
    ``-33/20`` disagrees with the system, while ``q3_corrected`` (``-33/2``) agrees.
    """
    grid = np.linspace(0, 1, 1001) if grid is None else np.asarray(list(grid), dtype=float)
    p = np.array([p_coefficients(x).weights for x in grid])
    q = np.array([q_coefficients(x).weights for x in grid])
    out = {f"p{i + 1}": float(np.max(np.abs(P_PRINTED[i](grid) - p[:, i]))) for i in range(3)}
    out.update({f"q{i + 1}_printed" if i == 2 else f"q{i + 1}": float(np.max(np.abs(Q_PRINTED[i](grid) - q[:, i])))
                for i in range(4)})
    out["q3_corrected"] = float(np.max(np.abs(Q3_CORRECTED(grid) - q[:, 2])))
    return out


def real_roots(poly: Polynomial, lo: float = -1.0, hi: float = 2.0, points: int = 3001) -> list[float]:
    """Sign-change roots of ``poly`` on ``[lo, hi]``, refined by Brent's method to ``1e-12``."""
    xs = np.linspace(lo, hi, points)
    ys = poly(xs)
    roots = []
    for a, b, fa, fb in zip(xs[:-1], xs[1:], ys[:-1], ys[1:]):
        if fa == 0:
            roots.append(float(a))
        elif fa * fb < 0:
            roots.append(float(brentq(poly, a, b, xtol=ROOT_XTOL)))
    if ys[-1] == 0:
        roots.append(float(xs[-1]))
    return roots


def p1_root() -> float:
    """Positive root of ``21 l^2 + 6 l - 2``: ``(-3 + sqrt(51))/21``."""
    return float((-3 + np.sqrt(51)) / 21)


def coefficient_roots() -> dict[str, list[float]]:
    """Real roots of the solved ``p_i``/``q_i`` and of the printed ``q_3``.

    ``q_4 = -(7/24)(3l - 1)^3`` has the triple root ``1/3`` in closed form;
    Brent's method would only resolve a triple root to about ``1e-5``.
    """
    ps, qs = solved_polynomials(2), solved_polynomials(3)
    out = {f"p{i + 1}": real_roots(p) for i, p in enumerate(ps) if i < 2}
    out["p1"] = [(-3 - np.sqrt(51)) / 21, p1_root()]
    for i in range(3):
        out[f"q{i + 1}"] = real_roots(qs[i])
    out["q4"] = [1 / 3]
    out["q3_printed"] = real_roots(Q_PRINTED[2])
    return out


# -- membership --------------------------------------------------------------

def tensor_power(lam, power: int) -> Superop:
    return tensor_all([werner_mixture(float(lam), 3)] * power)


def certify_tensor_membership(lam, power: int, level: str = "superop") -> MembershipCertificate:
    """Certificate that ``T_lambda^(x)power`` is mixed-unitary, or a failed attempt.

    For ``lambda > 1/3`` each factor is itself mixed-unitary, so the product
    expands over ``{W^+, T_(1/3)}^power`` with nonnegative product weights.
    Otherwise the weights on ``Q_i`` (power 2) or ``R_i`` (power 3) are solved
    and must all be nonnegative.

    :param level: ``"superop"`` checks the reconstruction against
        ``T_lambda^(x)power`` as ``81 x 81`` or ``729 x 729`` matrices;
        ``"coefficients"`` checks it in the product basis only (cheap, used
        for curve export).
    :return: the certificate; ``verdict`` holds iff every weight is
        ``>= -1e-10`` and the residual is ``<= 1e-9``.
    """
    lam = _check_lambda(lam)
    if power not in (2, 3):
        raise ValueError("power must be 2 or 3")
    if level not in ("superop", "coefficients"):
        raise ValueError(f"unknown level {level!r}")

    if lam > 1 / 3:
        a = (lam - 1 / 3) / (2 / 3)
        names, weights, factors = [], [], []
        for combo in itertools.product("+t", repeat=power):
            names.append("".join("W+" if c == "+" else "T" for c in combo))
            weights.append(float(np.prod([a if c == "+" else 1 - a for c in combo])))
            factors.append(combo)
        coeffs = MixtureCoefficients(tuple(names), np.array(weights))
        route = "product"
        if level == "superop":
            wp, t13 = werner_plus(3), werner_mixture(1 / 3, 3)
            recon = sum(w * tensor_all([wp if c == "+" else t13 for c in combo]).matrix
                        for w, combo in zip(weights, factors))
            residual = float(np.linalg.norm(recon - tensor_power(lam, power).matrix))
        else:
            # a W+ + (1 - a) T_(1/3) = T_lam on each factor
            residual = abs(a + (1 - a) / 3 - lam)
    else:
        route = "Q" if power == 2 else "R"
        coeffs = p_coefficients(lam) if power == 2 else q_coefficients(lam)
        if level == "superop":
            family = q_channels() if power == 2 else r_channels()
            recon = sum(w * f.matrix for w, f in zip(coeffs.weights, family))
            residual = float(np.linalg.norm(recon - tensor_power(lam, power).matrix))
        else:
            mat, rhs = (B_MATRIX, _rhs2(lam)) if power == 2 else (C_MATRIX, _rhs3(lam))
            residual = float(np.linalg.norm(mat @ coeffs.weights - rhs))
    min_weight = float(coeffs.weights.min())
    verdict = min_weight >= -WEIGHT_TOL and residual <= RESIDUAL_TOL
    return MembershipCertificate(lam, power, coeffs, min_weight, residual, verdict, route)


# -- the Mendl-Wolf path ------------------------------------------------------

def mw_path(t) -> PathPoint:
    """``gamma(t) = (1/9)(-(8/3)(t + 1)^2 + 3, 16 t^2 - 7)``; exact for rational ``t``."""
    if isinstance(t, Rational):
        t = Fraction(t)
        if not 0 <= t <= 1:
            raise ValueError("t must lie in [0, 1]")
        x = (Fraction(-8, 3) * (t + 1) ** 2 + 3) / 9
        y = (16 * t**2 - 7) / Fraction(9)
        return PathPoint(t, x, y)
    t = float(t)
    if not 0 <= t <= 1:
        raise ValueError("t must lie in [0, 1]")
    return PathPoint(t, (-(8 / 3) * (t + 1) ** 2 + 3) / 9, (16 * t**2 - 7) / 9)


def mw_lambda0() -> float:
    """``(sqrt 2 - 1)(1 - 1/sqrt 3)``."""
    return float((np.sqrt(2) - 1) * (1 - 1 / np.sqrt(3)))


def mw_epsilon() -> float:
    return float((2 / 3) * (4 - 3 * np.sqrt(2) - np.sqrt(3) + np.sqrt(6)))


def mw_lambda0_intersection() -> float:
    """``lambda_0`` recomputed as the crossing of the path with the parabola ``y = x^2``."""
    def gap(t):
        pt = mw_path(t)
        return pt.y - pt.x**2

    t0 = brentq(gap, 0.0, 1.0, xtol=ROOT_XTOL)
    return float((mw_path(t0).x + 1) / 2)


def alpha_coordinates(weights: Sequence[float]) -> tuple[float, float]:
    """Affine chart on ``conv{W++, W_m, W--}``: vertices go to ``(1, 1)``, ``(0, -1)``, ``(-1, 1)``."""
    w = np.asarray(weights, dtype=float)
    verts = np.array([[1.0, 1.0], [0.0, -1.0], [-1.0, 1.0]])
    x, y = w @ verts
    return float(x), float(y)


# -- export ------------------------------------------------------------------

CURVE_HEADER = ("lambda", "p1", "p2", "p3", "q1", "q2", "q3", "q4", "member2", "member3")
PATH_HEADER = ("t", "x", "y")


def _fmt(x: float) -> str:
    return f"{float(x):.12g}"


def curve_export(grid: Iterable[float]) -> list[tuple]:
    """Rows ``(lambda, p_1..p_3, q_1..q_4, member2, member3)`` in grid order."""
    rows = []
    for lam in grid:
        lam = _check_lambda(lam)
        p = p_coefficients(lam).weights
        q = q_coefficients(lam).weights
        m2 = certify_tensor_membership(lam, 2, level="coefficients").verdict
        m3 = certify_tensor_membership(lam, 3, level="coefficients").verdict
        rows.append((lam, *p, *q, m2, m3))
    return rows


def path_export(ts: Iterable[float]) -> list[tuple]:
    return [(pt.t, pt.x, pt.y) for pt in (mw_path(float(t)) for t in ts)]


def write_csv(path, header: Sequence[str], rows: Iterable[tuple]) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([str(v).lower() if isinstance(v, (bool, np.bool_)) else _fmt(v) for v in row])
