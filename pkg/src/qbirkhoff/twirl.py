"""Twirling over ``{u (x) u}``: closed form, Monte Carlo, and the two-leg version.

The twirl of a map ``T`` on ``M_n`` is the Haar average of
``rho_u(T) = ad(u) o T o ad(u^t)``.  It always lands on the line through
``W_n^+`` and ``W_n^-``, with weights read off the Choi matrix.
"""
from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from . import matcore
from .matcore import as_matrix, partial_transpose
from .superop import Superop, jamiolkowski
from .werner import build_symmetry, werner_minus, werner_plus

MC_CHUNK = 1000


@dataclass(frozen=True)
class TwirlCoefficients:
    c_plus: float
    c_minus: float

    def as_tuple(self) -> tuple[float, float]:
        return (self.c_plus, self.c_minus)


@dataclass(frozen=True)
class DoubleTwirlCoefficients:
    """Weights of ``W+W+``, ``W+W-``, ``W-W+``, ``W-W-`` in ``(F (x) F)(ad(u))``."""

    c_pp: float
    c_pm: float
    c_mp: float
    c_mm: float

    def as_tuple(self) -> tuple[float, float, float, float]:
        return (self.c_pp, self.c_pm, self.c_mp, self.c_mm)


def sym_part(a) -> np.ndarray:
    a = as_matrix(a)
    return (a + a.T) / 2


def antisym_part(a) -> np.ndarray:
    a = as_matrix(a)
    return (a - a.T) / 2


def conditional_expectation_E(x) -> np.ndarray:
    """Projection of ``B(C^n (x) C^n)`` onto ``span{p+, p-}`` (uses the plain trace)."""
    x = as_matrix(x)
    n = int(round(np.sqrt(x.shape[0])))
    sym = build_symmetry(n)
    tp = np.trace(x @ sym.p_plus)
    tm = np.trace(x @ sym.p_minus)
    return 2 / (n * (n + 1)) * tp * sym.p_plus + 2 / (n * (n - 1)) * tm * sym.p_minus


def twirl_closed_form(t: Superop) -> tuple[Superop, TwirlCoefficients]:
    """``F(T) = Tr(T^ p+) W^+ + Tr(T^ p-) W^-``."""
    n = t.n
    sym = build_symmetry(n)
    choi = jamiolkowski(t)
    cp = np.trace(choi @ sym.p_plus)
    cm = np.trace(choi @ sym.p_minus)
    twirled = Superop(cp * werner_plus(n).matrix + cm * werner_minus(n).matrix)
    return twirled, TwirlCoefficients(float(cp.real), float(cm.real))


def twirl_coeffs_kraus(kraus: Sequence) -> TwirlCoefficients:
    """``c+- = (1/4) sum_i ||a_i +- a_i^t||_2^2`` for ``T(x) = sum_i a_i x a_i*``."""
    cp = cm = 0.0
    for a in kraus:
        a = as_matrix(a)
        cp += matcore.norm2_sq(a + a.T) / 4
        cm += matcore.norm2_sq(a - a.T) / 4
    return TwirlCoefficients(cp, cm)


def generalized_twirl_coeffs(a, n: int, k: int) -> TwirlCoefficients:
    """Twirl weights of ``T_a(x) = (id_n (x) tau_k)(a (x (x) 1) a*)``, ``a`` in ``M_n (x) M_k``.

    The transpose acts on the ``M_n`` leg only, norms are under ``tau_n (x) tau_k``.
    """
    a = as_matrix(a)
    at = partial_transpose(a, (n, k), 0)
    return TwirlCoefficients(matcore.norm2_sq(a + at) / 4, matcore.norm2_sq(a - at) / 4)


def rho(u, t: Superop) -> Superop:
    """``ad(u) o T o ad(u^t)``."""
    u = as_matrix(u)
    k_u = np.kron(u, u.conj())
    k_ut = np.kron(u.T, u.T.conj())
    return Superop(k_u @ t.matrix @ k_ut)


# -- Monte Carlo -------------------------------------------------------------

def haar_average(fn: Callable[[np.ndarray], np.ndarray], n: int, samples: int, seed: int,
                 chunk: int = MC_CHUNK, workers: int = 1) -> np.ndarray:
    """Average of ``fn`` over ``samples`` Haar unitaries in ``U(n)``.

    ``fn`` receives a stack ``(b, n, n)`` and returns the *sum* of its values
    over the stack.  Samples are drawn in fixed-size chunks, each from its own
    child of ``SeedSequence(seed)``, and chunk sums are added in chunk order, so
    the result does not depend on ``workers``.
    """
    if samples < 1:
        raise ValueError("samples must be >= 1")
    sizes = [min(chunk, samples - i) for i in range(0, samples, chunk)]
    seeds = np.random.SeedSequence(seed).spawn(len(sizes))

    def run(job):
        size, ss = job
        return fn(matcore.haar_unitaries(n, size, np.random.default_rng(ss)))

    jobs = list(zip(sizes, seeds))
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(run, jobs))
    else:
        parts = [run(j) for j in jobs]
    total = parts[0]
    for p in parts[1:]:
        total = total + p
    return total / samples


def _batch_kron_conj(us: np.ndarray) -> np.ndarray:
    b, n, _ = us.shape
    return np.einsum("bij,bkl->bikjl", us, us.conj()).reshape(b, n * n, n * n)


def twirl_monte_carlo(t: Superop, samples: int, seed: int, workers: int = 1) -> Superop:
    """Haar Monte Carlo estimate of the twirl; error ``O(1/sqrt(samples))``."""
    m = t.matrix

    def chunk_sum(us):
        left = _batch_kron_conj(us)
        right = _batch_kron_conj(us.transpose(0, 2, 1))
        return np.einsum("bij,jk,bkl->il", left, m, right)

    return Superop(haar_average(chunk_sum, t.n, samples, seed, workers=workers))


def intertwining_check(t: Superop) -> float:
    """``||J(F(T)) - E(J(T))||_2`` (Frobenius); zero up to rounding."""
    twirled, _ = twirl_closed_form(t)
    return float(np.linalg.norm(jamiolkowski(twirled) - conditional_expectation_E(jamiolkowski(t))))


def conjugation_covariance_check(t: Superop, u) -> float:
    """``||ad(u (x) u)(T^) - J(rho_u(T))||_2``."""
    u = as_matrix(u)
    uu = np.kron(u, u)
    lhs = uu @ jamiolkowski(t) @ uu.conj().T
    return float(np.linalg.norm(lhs - jamiolkowski(rho(u, t))))


# -- two legs ----------------------------------------------------------------

def leg_symmetrizations(u, d: int = 3) -> dict[str, np.ndarray]:
    """``(S(x)S)(u)``, ``(S(x)A)(u)``, ``(A(x)S)(u)``, ``(A(x)A)(u)`` for ``u`` in ``M_d (x) M_d``."""
    u = as_matrix(u)
    shape = (d, d)
    t1 = partial_transpose(u, shape, 0)
    t2 = partial_transpose(u, shape, 1)
    t12 = partial_transpose(t1, shape, 1)
    return {
        "SS": (u + t1 + t2 + t12) / 4,
        "SA": (u + t1 - t2 - t12) / 4,
        "AS": (u - t1 + t2 - t12) / 4,
        "AA": (u - t1 - t2 + t12) / 4,
    }


def double_twirl(u, d: int = 3) -> DoubleTwirlCoefficients:
    """Weights of ``(F (x) F)(ad(u))`` on the four products of ``W_d^+-``."""
    parts = leg_symmetrizations(u, d)
    return DoubleTwirlCoefficients(*(matcore.norm2_sq(parts[key]) for key in ("SS", "SA", "AS", "AA")))
