"""Exact factorizations and the finite certificates built from them.

A channel ``T`` on ``M_n`` has an exact factorization through ``M_n (x) M_k``
when ``T(x) = (id_n (x) tau_k)(u (x (x) 1_k) u*)`` for a unitary ``u``.  Writing
``u`` in ``k x k`` blocks over the ancilla, this is the mixed-unitary-looking
sum ``(1/k) sum_{a,b} u^(ab) x u^(ab)*`` of (generally non-unitary) Kraus
operators ``u^(ab) = u[:, a, :, b]``.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from . import matcore
from .matcore import as_matrix, check_unitary, matrix_unit, partial_transpose
from .superop import (
    DimensionError,
    Superop,
    cb_norm_cp,
    from_kraus,
    identity,
    jamiolkowski,
    mixture_of_ad,
    transpose_map,
    weyl_unitaries,
)
from .twirl import TwirlCoefficients, generalized_twirl_coeffs, haar_average, twirl_closed_form
from .werner import (
    DistanceCertificate,
    flip,
    max_entangled_projection,
    werner_minus,
    werner_plus,
    wh_distance_witness,
)

OMEGA = complex(-0.5, np.sqrt(3) / 2)


@dataclass(frozen=True)
class ExactFactorization:
    """A unitary ``u`` on ``C^n (x) C^k`` read as a factorization through ``M_n (x) M_k``."""

    n: int
    k: int
    u: np.ndarray = field(repr=False)

    def __post_init__(self):
        u = check_unitary(self.u)
        if u.shape != (self.n * self.k, self.n * self.k):
            raise DimensionError(f"witness of shape {u.shape} does not fit n={self.n}, k={self.k}")
        u = u.copy()
        u.setflags(write=False)
        object.__setattr__(self, "u", u)

    def blocks(self) -> np.ndarray:
        """``u^(ab)`` stacked as ``(k, k, n, n)``: entry ``[a, b]`` is ``u[:, a, :, b]``."""
        return self.u.reshape(self.n, self.k, self.n, self.k).transpose(1, 3, 0, 2)

    def to_json(self) -> dict:
        return {"n": self.n, "k": self.k, "u": matcore.matrix_to_json(self.u)}

    @classmethod
    def from_json(cls, doc) -> "ExactFactorization":
        if isinstance(doc, str):
            doc = json.loads(doc)
        extra = set(doc) - {"n", "k", "u"}
        if extra:
            raise ValueError(f"unknown witness fields {sorted(extra)}")
        return cls(int(doc["n"]), int(doc["k"]), matcore.matrix_from_json(doc["u"]))


def channel_of(f: ExactFactorization) -> Superop:
    """``x -> (id_n (x) tau_k)(u (x (x) 1_k) u*)``."""
    blocks = f.blocks().reshape(f.k * f.k, f.n, f.n)
    return from_kraus(blocks / np.sqrt(f.k))


def direct_sum_mix(f1: ExactFactorization, f2: ExactFactorization) -> ExactFactorization:
    """Witness ``u_k (+) u_l`` on ``C^n (x) (C^k (+) C^l)``.

    Its channel is ``(k/(k+l)) channel_of(f1) + (l/(k+l)) channel_of(f2)``.
    """
    if f1.n != f2.n:
        raise DimensionError(f"n mismatch: {f1.n} vs {f2.n}")
    n, k, l = f1.n, f1.k, f2.k
    out = np.zeros((n, k + l, n, k + l), dtype=complex)
    out[:, :k, :, :k] = f1.u.reshape(n, k, n, k)
    out[:, k:, :, k:] = f2.u.reshape(n, l, n, l)
    return ExactFactorization(n, k + l, out.reshape(n * (k + l), n * (k + l)))


def degree_k_certificate(parts: list[tuple[float, ExactFactorization]]) -> list[tuple[float, np.ndarray]]:
    """Mixed-unitary decomposition of ``T (x) S_k`` for ``T = sum_i c_i channel_of(f_i)``.

    Uses ``T (x) S_k = (1/k^4) sum_{v,w} ad((1 (x) w) u (1 (x) v))`` with ``v, w``
    running over the ``k^2`` Weyl unitaries, which follows from averaging the
    ancilla leg on both sides of ``u``.
    """
    ks = {f.k for _, f in parts}
    ns = {f.n for _, f in parts}
    if len(ks) != 1 or len(ns) != 1:
        raise DimensionError("all factorizations must share n and k")
    (n,), (k,) = ns, ks
    weyl = [np.kron(np.eye(n), w) for w in weyl_unitaries(k)]
    cert = []
    for c, f in parts:
        for w in weyl:
            wu = w @ f.u
            for v in weyl:
                cert.append((c / k**4, wu @ v))
    return cert


# -- the W_5^- witness -------------------------------------------------------

def clifford_generators() -> tuple[np.ndarray, ...]:
    """Five pairwise anti-commuting self-adjoint unitaries ``v_1..v_5`` in ``M_4``."""
    one = np.eye(2, dtype=complex)
    zero = np.zeros((2, 2), dtype=complex)
    j = np.diag([1j, -1j])
    k = np.array([[0, 1], [-1, 0]], dtype=complex)
    l = np.array([[0, 1j], [1j, 0]])
    v1 = np.block([[one, zero], [zero, -one]])
    v2 = np.block([[zero, one], [one, zero]])
    off = [np.block([[zero, -m], [m, zero]]) for m in (j, k, l)]
    return (v1, v2, *off)


def sigma5() -> np.ndarray:
    """Symmetric circulant unitary with zero diagonal and off-diagonal moduli ``1/2``.

    First row ``(0, a, b, b, a) / 2`` with ``a = -1/2 + i sqrt(3)/2`` and ``b = conj(a)``.
    """
    a = OMEGA
    b = np.conj(a)
    row = np.array([0, a, b, b, a]) / 2
    sigma = np.array([np.roll(row, i) for i in range(5)])
    return check_unitary(sigma, tol=1e-12)


def w5_minus_witness() -> ExactFactorization:
    """``u = diag(v_i) (sigma (x) 1_4) diag(v_i)``, whose blocks are ``sigma_ij v_i v_j``."""
    v = clifford_generators()
    d = np.zeros((20, 20), dtype=complex)
    for i, vi in enumerate(v):
        d[4 * i:4 * i + 4, 4 * i:4 * i + 4] = vi
    return ExactFactorization(5, 4, d @ np.kron(sigma5(), np.eye(4)) @ d)


def s_minus_2q_witness() -> ExactFactorization:
    """``u = s_3 - 2 q_3`` on ``C^3 (x) C^3``; a self-adjoint unitary."""
    return ExactFactorization(3, 3, flip(3) - 2 * max_entangled_projection(3))


# -- W_{2k}^- and the degree-4 certificate for odd n >= 7 --------------------

def round_robin_matchings(m: int) -> list[list[tuple[int, int]]]:
    """The ``m - 1`` perfect matchings of the circle method; each edge of ``K_m`` occurs once."""
    if m < 2 or m % 2:
        raise ValueError("m must be an even integer >= 2")
    rest = list(range(1, m))
    rounds = []
    for r in range(m - 1):
        ring = rest[r:] + rest[:r]
        pairs = [(0, ring[0])] + [(ring[i], ring[-i]) for i in range(1, m // 2)]
        rounds.append([tuple(sorted(p)) for p in pairs])
    return rounds


def wn_minus_even_decomposition(m: int) -> list[tuple[float, np.ndarray]]:
    """Explicit ``W_m^- = sum_j c_j ad(v_j)`` for even ``m``, with real antisymmetric ``v_j``.

    For each perfect matching ``M`` and signs ``eps`` (first sign fixed),
    ``v = sum_{(i,j) in M} eps_ij (e_ij - e_ji)`` is an orthogonal matrix.
    Averaging over signs kills the cross terms, and averaging over the
    ``m - 1`` matchings of a 1-factorization hits every edge once, giving
    ``(1/(m-1)) sum_{i<j} ad(e_ij - e_ji) = W_m^-``.
    """
    matchings = round_robin_matchings(m)
    half = m // 2
    n_signs = 2 ** (half - 1)
    weight = 1.0 / ((m - 1) * n_signs)
    out = []
    for matching in matchings:
        for mask in range(n_signs):
            v = np.zeros((m, m), dtype=complex)
            for idx, (i, j) in enumerate(matching):
                sign = -1.0 if idx > 0 and (mask >> (idx - 1)) & 1 else 1.0
                v[i, j] += sign
                v[j, i] -= sign
            out.append((weight, v))
    return out


def direct_sum_unitary(a, b) -> np.ndarray:
    a, b = as_matrix(a), as_matrix(b)
    out = np.zeros((a.shape[0] + b.shape[0],) * 2, dtype=complex)
    out[:a.shape[0], :a.shape[0]] = a
    out[a.shape[0]:, a.shape[0]:] = b
    return out


@dataclass(frozen=True)
class FactorizationMixture:
    """``sum_i c_i channel_of(f_i)``, all through the same ``M_n (x) M_k``."""

    weights: tuple[float, ...]
    parts: tuple[ExactFactorization, ...]

    def channel(self) -> Superop:
        total = 0
        for c, f in zip(self.weights, self.parts):
            total = total + c * channel_of(f).matrix
        return Superop(total)


@dataclass(frozen=True)
class Degree4Certificate:
    n: int
    r: Superop
    plus: FactorizationMixture
    minus: FactorizationMixture
    twirl_coeffs: TwirlCoefficients
    split_residual: float
    block_residual: float
    decomposition_residual: float

    def mixed_unitary_certificate(self) -> list[tuple[float, np.ndarray]]:
        """Finite decomposition of ``R (x) S_4`` into unitary conjugations."""
        parts = [(c / 2, f) for c, f in zip(self.plus.weights, self.plus.parts)]
        parts += [(c / 2, f) for c, f in zip(self.minus.weights, self.minus.parts)]
        return degree_k_certificate(parts)


def block_diagonal_channel(n: int) -> Superop:
    """``R = (1/4) sum_{i<j<5} ad(a_ij) + (1/(2k-1)) sum_{5<=i<j} ad(a_ij)``, ``2k = n - 5``."""
    m = n - 5
    ops = []
    for i in range(n):
        for j in range(i + 1, n):
            if j < 5:
                scale = 0.5
            elif i >= 5:
                scale = 1 / np.sqrt(m - 1)
            else:
                continue
            ops.append(scale * (matrix_unit(n, i, j) - matrix_unit(n, j, i)))
    return from_kraus(ops)


def wn_minus_degree4_certificate(n: int) -> Degree4Certificate:
    """Degree-4 factorizability of ``W_n^-`` for odd ``n >= 7``.

    :param n: odd dimension, at least 7.
    :return: the block channel ``R``, its two halves ``R^+-`` as mixtures of
        exact factorizations, and the twirl weights of the witnesses.  All
        witnesses have ``c+ = 0``, so the twirl of ``R`` is ``W_n^-``.
    """
    if n < 7 or n % 2 == 0:
        raise ValueError("n must be an odd integer >= 7")
    m = n - 5
    u = w5_minus_witness().u
    decomposition = wn_minus_even_decomposition(m)
    weights = tuple(c for c, _ in decomposition)
    one4 = np.eye(4)
    plus = tuple(ExactFactorization(n, 4, direct_sum_unitary(u, np.kron(v, one4))) for _, v in decomposition)
    minus = tuple(ExactFactorization(n, 4, direct_sum_unitary(u, -np.kron(v, one4))) for _, v in decomposition)
    r_plus = FactorizationMixture(weights, plus)
    r_minus = FactorizationMixture(weights, minus)
    r = block_diagonal_channel(n)

    split = float(np.max(np.abs((r_plus.channel().matrix + r_minus.channel().matrix) / 2 - r.matrix)))
    # block structure: on x = x11 (+) x22 the map acts as W_5^- (+) W_m^-
    x = np.arange(n * n, dtype=float).reshape(n, n) + 1j
    expected = np.zeros((n, n), dtype=complex)
    expected[:5, :5] = werner_minus(5)(x[:5, :5])
    expected[5:, 5:] = werner_minus(m)(x[5:, 5:])
    block = float(np.max(np.abs(r(x) - expected)))
    approx = mixture_of_ad(weights, [v for _, v in decomposition])
    dec = float(np.max(np.abs(approx.matrix - werner_minus(m).matrix)))

    cp = cm = 0.0
    for c, f in zip(weights * 2, plus + minus):
        co = generalized_twirl_coeffs(f.u, n, 4)
        cp += c * co.c_plus / 2
        cm += c * co.c_minus / 2
    return Degree4Certificate(n, r, r_plus, r_minus, TwirlCoefficients(cp, cm), split, block, dec)


# -- antisymmetric defect ----------------------------------------------------

@dataclass(frozen=True)
class InequalityReport:
    samples: int
    min_slack_op: float
    min_slack_12: float
    min_slack_42: float
    min_slack_2527: float

    def all_hold(self, tol: float = 1e-9) -> bool:
        return min(self.min_slack_op, self.min_slack_12, self.min_slack_42, self.min_slack_2527) >= -tol


def antisym_defect(u, k: int) -> np.ndarray:
    """``b = (u - u^t)/2`` with the transpose on the ``M_3`` leg of ``M_3 (x) M_k``."""
    return (as_matrix(u) - partial_transpose(u, (3, k), 0)) / 2


def antisym_defect_slacks(u, k: int) -> np.ndarray:
    """Slacks of ``||b|| <= 5/3``, ``||b||_2^2 <= ||b||_1``, ``||b||_4^4 >= 1.5 ||b||_2^4``, ``||b||_2^2 <= 25/27``.

    Norms are under ``tau_3 (x) tau_k``.
    """
    b = antisym_defect(u, k)
    s = np.linalg.svd(b, compute_uv=False)
    n1, n2sq, n4p4 = np.mean(s), np.mean(s**2), np.mean(s**4)
    return np.array([5 / 3 - s.max(), n1 - n2sq, n4p4 - 1.5 * n2sq**2, 25 / 27 - n2sq])


def antisym_defect_stats(k: int, samples: int, seed: int) -> InequalityReport:
    """Minimum slack of each inequality over ``samples`` Haar unitaries in ``U(3k)``."""
    if k < 1 or samples < 1:
        raise ValueError("k and samples must be >= 1")
    us = matcore.haar_unitaries(3 * k, samples, np.random.default_rng(seed))
    t = us.reshape(samples, 3, k, 3, k)
    b = (t - t.transpose(0, 3, 2, 1, 4)).reshape(samples, 3 * k, 3 * k) / 2
    s = np.linalg.svd(b, compute_uv=False)
    n2sq = np.mean(s**2, axis=1)
    slacks = np.stack([
        5 / 3 - s.max(axis=1),
        np.mean(s, axis=1) - n2sq,
        np.mean(s**4, axis=1) - 1.5 * n2sq**2,
        25 / 27 - n2sq,
    ])
    return InequalityReport(samples, *(float(x) for x in slacks.min(axis=1)))


@dataclass(frozen=True)
class TransposeBound:
    bound: float
    residual: float
    min_choi_eigenvalue: float


def id_minus_transpose_bound() -> TransposeBound:
    """``||id_3 - t_3||_cb <= 10/3`` through a CP splitting.

    ``W_3^+ - id_3/6`` has Choi matrix ``(p+ - q)/6 >= 0``, and
    ``id_3 - t_3 = ((2/3) id_3 + W_3^-) - 2 (W_3^+ - id_3/6)``; both brackets are
    CP, so their cb-norms are ``||T(1)||``.
    """
    wp, wm, id3 = werner_plus(3), werner_minus(3), identity(3)
    pos = wp - id3 / 6
    neg = (2 / 3) * id3 + wm
    eig = float(np.linalg.eigvalsh(jamiolkowski(pos)).min())
    residual = float(np.max(np.abs((id3 - transpose_map(3)).matrix - (neg - 2 * pos).matrix)))
    bound = cb_norm_cp(neg) + 2 * cb_norm_cp(pos)
    return TransposeBound(bound, residual, eig)


# -- Haar averaging identities -----------------------------------------------

@dataclass(frozen=True)
class HaarResiduals:
    ancilla_average: float
    u_ubar: float
    samples: int
    seed: int


def haar_average_identity_check(k: int, samples: int, seed: int, n: int | None = None,
                                z=None) -> HaarResiduals:
    """Monte Carlo residuals of the two Haar identities.

    * ``int (1 (x) w)* z (1 (x) w) dw = (id_n (x) tau_k)(z) (x) 1_k``, with
      ``z`` a random matrix of operator norm 1 unless supplied;
    * ``int u (x) conj(u) du = q_k``.

    :param n: size of the untouched leg (defaults to ``k``).
    :return: Frobenius residuals of both estimates.
    """
    n = k if n is None else n
    ss_z, ss_a, ss_b = np.random.SeedSequence(seed).spawn(3)
    if z is None:
        rng = np.random.default_rng(ss_z)
        z = rng.standard_normal((n * k, n * k)) + 1j * rng.standard_normal((n * k, n * k))
        z = z / matcore.op_norm(z)
    z = as_matrix(z)
    zt = z.reshape(n, k, n, k)

    def conj_sum(ws):
        # sum_w (1 (x) w)* z (1 (x) w), leg-wise without forming 1 (x) w
        out = np.einsum("bca,icjd,bde->iaje", ws.conj(), zt, ws)
        return out.reshape(n * k, n * k)

    est = haar_average(conj_sum, k, samples, int(ss_a.generate_state(1)[0]))
    exact = np.kron(matcore.partial_trace_second(z, (n, k)), np.eye(k))

    def kron_sum(us):
        return np.einsum("bij,bkl->ikjl", us, us.conj()).reshape(k * k, k * k)

    est2 = haar_average(kron_sum, k, samples, int(ss_b.generate_state(1)[0]))
    return HaarResiduals(
        float(np.linalg.norm(est - exact)),
        float(np.linalg.norm(est2 - max_entangled_projection(k))),
        samples,
        seed,
    )


# -- distance to the factorizable maps ---------------------------------------

def dist_factorizable_w3minus() -> DistanceCertificate:
    """``d_cb(W_3^-, FM(M_3)) = 4/27``.

    Upper half: ``s - 2q`` factorizes ``(2/27) W^+ + (25/27) W^-``.  Lower half:
    every factorizable map twirls to ``mu W^+ + (1 - mu) W^-`` with
    ``1 - mu = ||b||_2^2 <= 25/27``, and ``s - 2q`` attains that bound.
    """
    f = s_minus_2q_witness()
    t = channel_of(f)
    _, coeffs = twirl_closed_form(t)
    expected = (2 / 27) * werner_plus(3) + (25 / 27) * werner_minus(3)
    residual = float(np.max(np.abs(t.matrix - expected.matrix)))
    defect = matcore.norm2_sq(antisym_defect(f.u, 3))
    gap = wh_distance_witness(3)
    return DistanceCertificate(
        target="W_3^- to FM(M_3)",
        distance=coeffs.c_plus * gap,
        witness_weights=(coeffs.c_plus, coeffs.c_minus),
        witness_residual=residual,
        lower_weight=1 - defect,
        cb_gap=gap,
        notes="witness s-2q; lower bound from ||(u-u^t)/2||_2^2 <= 25/27",
        exact="4/27",
    )

