"""Linear maps on ``M_n`` as ``n^2 x n^2`` matrices.

A map ``T`` is stored through its action on row-major vectorizations,
``vec(T(x)) = M @ vec(x)`` with ``vec(x)[i*n + j] = x[i, j]``.  Under this
convention ``x -> a x b*`` has matrix ``kron(a, conj(b))``.

``ad(u)`` always means ``x -> u x u*``.  Some arguments in the literature are
written with ``u* x u`` instead; mixed-unitary sets are invariant under
``u -> u*`` so nothing downstream depends on the choice.
"""
from __future__ import annotations

from dataclasses import dataclass
from numbers import Number
from typing import Iterable, Sequence

import numpy as np

from . import matcore
from .matcore import as_matrix, check_unitary

KRAUS_CUTOFF = 1e-10


class DimensionError(ValueError):
    pass


class NotCompletelyPositiveError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class Superop:
    """A linear map on ``M_n`` in the row-major natural representation."""

    matrix: np.ndarray

    def __post_init__(self):
        m = as_matrix(self.matrix)
        n = int(round(np.sqrt(m.shape[0])))
        if m.shape != (n * n, n * n):
            raise DimensionError(f"superoperator matrix must be n^2 x n^2, got {m.shape}")
        m = m.copy()
        m.flags.writeable = False
        object.__setattr__(self, "matrix", m)

    @property
    def n(self) -> int:
        return int(round(np.sqrt(self.matrix.shape[0])))

    def __call__(self, x) -> np.ndarray:
        return apply(self, x)

    def __matmul__(self, other: "Superop") -> "Superop":
        return compose(self, other)

    def __add__(self, other: "Superop") -> "Superop":
        _same_dim(self, other)
        return Superop(self.matrix + other.matrix)

    def __sub__(self, other: "Superop") -> "Superop":
        _same_dim(self, other)
        return Superop(self.matrix - other.matrix)

    def __neg__(self) -> "Superop":
        return Superop(-self.matrix)

    def __mul__(self, c) -> "Superop":
        if not isinstance(c, Number):
            return NotImplemented
        return Superop(c * self.matrix)

    __rmul__ = __mul__

    def __truediv__(self, c) -> "Superop":
        return Superop(self.matrix / c)

    def __repr__(self) -> str:
        return f"Superop(n={self.n})"


def _same_dim(t: Superop, s: Superop) -> None:
    if t.n != s.n:
        raise DimensionError(f"dimension mismatch: {t.n} vs {s.n}")


def distance(t: Superop, s: Superop) -> float:
    """Frobenius distance of the two superoperator matrices."""
    _same_dim(t, s)
    return float(np.linalg.norm(t.matrix - s.matrix))


def max_distance(t: Superop, s: Superop) -> float:
    _same_dim(t, s)
    return float(np.max(np.abs(t.matrix - s.matrix)))


def normalized_distance(t: Superop, s: Superop) -> float:
    """Normalized 2-norm ``tau(D* D)^(1/2)`` of the difference of the matrices."""
    _same_dim(t, s)
    return float(np.sqrt(matcore.norm2_sq(t.matrix - s.matrix)))


# -- construction ------------------------------------------------------------

def identity(n: int) -> Superop:
    return Superop(np.eye(n * n))


def transpose_map(n: int) -> Superop:
    """``t_n: x -> x^t``."""
    idx = np.arange(n * n).reshape(n, n).T.reshape(-1)
    m = np.zeros((n * n, n * n))
    m[np.arange(n * n), idx] = 1.0
    return Superop(m)


def from_function(fn, n: int) -> Superop:
    """Tabulate a linear map given as a Python callable on ``n x n`` matrices."""
    cols = []
    for i in range(n):
        for j in range(n):
            cols.append(as_matrix(fn(matcore.matrix_unit(n, i, j))).reshape(-1))
    return Superop(np.array(cols).T)


def from_kraus_pairs(pairs: Iterable[tuple]) -> Superop:
    """``T(x) = sum_i a_i x b_i*``."""
    total = None
    for a, b in pairs:
        a, b = as_matrix(a), as_matrix(b)
        if a.shape != b.shape or a.shape[0] != a.shape[1]:
            raise DimensionError(f"Kraus pair shapes {a.shape}, {b.shape}")
        term = np.kron(a, b.conj())
        if total is None:
            total = term
        elif total.shape != term.shape:
            raise DimensionError("Kraus pairs have inconsistent dimensions")
        else:
            total = total + term
    if total is None:
        raise ValueError("at least one Kraus pair is required")
    return Superop(total)


def from_kraus(ops: Iterable) -> Superop:
    """``T(x) = sum_i a_i x a_i*``."""
    return from_kraus_pairs((a, a) for a in ops)


def ad(u, tol: float = matcore.VALIDATION_TOL) -> Superop:
    """``x -> u x u*``."""
    u = check_unitary(u, tol)
    return Superop(np.kron(u, u.conj()))


def tensor(t: Superop, s: Superop) -> Superop:
    """``T (x) S`` acting on ``M_n (x) M_k`` (first leg slow)."""
    n, k = t.n, s.n
    mt = t.matrix.reshape(n, n, n, n)
    ms = s.matrix.reshape(k, k, k, k)
    d = n * k
    out = np.einsum("pqrs,abcd->paqbrcsd", mt, ms).reshape(d * d, d * d)
    return Superop(out)


def tensor_all(maps: Sequence[Superop]) -> Superop:
    out = maps[0]
    for m in maps[1:]:
        out = tensor(out, m)
    return out


def compose(t: Superop, s: Superop) -> Superop:
    """``T o S`` (``S`` applied first)."""
    _same_dim(t, s)
    return Superop(t.matrix @ s.matrix)


def apply(t: Superop, x) -> np.ndarray:
    x = as_matrix(x)
    if x.shape != (t.n, t.n):
        raise DimensionError(f"input of shape {x.shape} for a map on M_{t.n}")
    return (t.matrix @ x.reshape(-1)).reshape(t.n, t.n)


# -- Choi / Jamiolkowski -----------------------------------------------------

def jamiolkowski(t: Superop) -> np.ndarray:
    """Normalized Choi matrix ``(1/n) sum_ij T(e_ij) (x) e_ij``."""
    n = t.n
    m = t.matrix.reshape(n, n, n, n)  # [r, c, i, j] = T(e_ij)[r, c]
    return m.transpose(0, 2, 1, 3).reshape(n * n, n * n) / n


def choi_to_superop(choi) -> Superop:
    c = as_matrix(choi)
    n = int(round(np.sqrt(c.shape[0])))
    if c.shape != (n * n, n * n):
        raise DimensionError(f"Choi matrix must be n^2 x n^2, got {c.shape}")
    m = (n * c).reshape(n, n, n, n).transpose(0, 2, 1, 3).reshape(n * n, n * n)
    return Superop(m)


def min_choi_eigenvalue(t: Superop) -> float:
    c = jamiolkowski(t)
    return float(np.linalg.eigvalsh((c + c.conj().T) / 2)[0])


def is_completely_positive(t: Superop, tol: float | None = None) -> bool:
    if tol is None:
        tol = 1e-9 * t.n
    return min_choi_eigenvalue(t) >= -tol


def canonical_kraus(t: Superop, cutoff: float = KRAUS_CUTOFF) -> list[np.ndarray]:
    """Kraus operators read off the Choi eigenvectors.

    With ``T^ = (1/n) sum_k vec(a_k) vec(a_k)*``, each eigenpair ``(mu, v)``
    with ``mu > cutoff`` gives ``a = sqrt(n mu) * reshape(v)``.
    """
    n = t.n
    w, v = matcore.hermitian_eigensystem(jamiolkowski(t), tol=1e-8)
    if w[-1] < -max(cutoff, 1e-9 * n):
        raise NotCompletelyPositiveError(f"min Choi eigenvalue {w[-1]:.3e}")
    return [np.sqrt(n * mu) * v[:, i].reshape(n, n) for i, mu in enumerate(w) if mu > cutoff]


# -- channel checks ----------------------------------------------------------

@dataclass(frozen=True)
class ChannelReport:
    unital_residual: float
    trace_preserving_residual: float
    min_choi_eigenvalue: float
    tolerance: float
    cp_tolerance: float
    is_ucpt: bool


def validate_ucpt(t: Superop, tol: float = 1e-9) -> ChannelReport:
    """Check unitality, trace preservation and complete positivity.

    Residuals are compared against ``tol``; the Choi spectrum against
    ``-tol * n`` since eigenvalue perturbations grow with dimension.
    """
    n = t.n
    unital = float(np.max(np.abs(apply(t, np.eye(n)) - np.eye(n))))
    # Tr(T(e_ij)) for all i, j at once: rows of the matrix at diagonal positions
    diag_rows = t.matrix[np.arange(n) * (n + 1), :]
    traces = diag_rows.sum(axis=0)
    tp = float(np.max(np.abs(traces - np.eye(n).reshape(-1))))
    mineig = min_choi_eigenvalue(t)
    cp_tol = tol * n
    ok = unital <= tol and tp <= tol and mineig >= -cp_tol
    return ChannelReport(unital, tp, mineig, tol, cp_tol, ok)


def cb_norm_cp(t: Superop, tol: float | None = None) -> float:
    """cb-norm of a completely positive map, ``||T(1)||``."""
    if not is_completely_positive(t, tol):
        raise NotCompletelyPositiveError("cb_norm_cp needs a completely positive map")
    return matcore.op_norm(apply(t, np.eye(t.n)))


# -- standard channels -------------------------------------------------------

def depolarizing(k: int) -> Superop:
    """``S_k(x) = tau_k(x) 1_k``."""
    if k < 1:
        raise ValueError("k must be >= 1")
    v = np.eye(k).reshape(-1)
    return Superop(np.outer(v, v) / k)


def weyl_unitaries(k: int) -> list[np.ndarray]:
    """Clock-and-shift unitaries ``X^a Z^b``, ``0 <= a, b < k``, ordered by ``(a, b)``."""
    if k < 1:
        raise ValueError("k must be >= 1")
    omega = np.exp(2j * np.pi / k)
    x = np.roll(np.eye(k), 1, axis=0)  # X e_j = e_{j+1}
    z = np.diag(omega ** np.arange(k))
    return [
        np.linalg.matrix_power(x, a) @ np.linalg.matrix_power(z, b)
        for a in range(k)
        for b in range(k)
    ]


def schur_multiplier(b) -> Superop:
    """``T_B(x) = B o x`` (entrywise product)."""
    b = as_matrix(b)
    if b.shape[0] != b.shape[1]:
        raise DimensionError("Schur symbol must be square")
    return Superop(np.diag(b.reshape(-1)))


def _check_weights(weights: Sequence[float], tol: float = 1e-12) -> np.ndarray:
    c = np.asarray(weights, dtype=float)
    if c.ndim != 1 or len(c) == 0:
        raise ValueError("need a non-empty list of weights")
    if np.any(c < -tol) or abs(c.sum() - 1) > tol:
        raise ValueError(f"weights are not convex (min {c.min():.3e}, sum {c.sum():.15f})")
    return c


def mixture(terms: Sequence[tuple[float, Superop]]) -> Superop:
    """Convex combination ``sum_i c_i T_i``."""
    c = _check_weights([w for w, _ in terms])
    maps = [t for _, t in terms]
    for t in maps[1:]:
        _same_dim(maps[0], t)
    return Superop(sum(ci * t.matrix for ci, t in zip(c, maps)))


def mixture_of_ad(weights: Sequence[float], unitaries: Sequence, check: bool = True) -> Superop:
    """``sum_j c_j ad(u_j)``, assembled through the Choi matrix.

    The Choi matrix of ``ad(u)`` is ``vec(u) vec(u)* / n``, so the whole
    mixture is one matrix product; this is much faster than summing
    ``kron(u, conj(u))`` for hundreds of terms.
    """
    c = _check_weights(weights) if check else np.asarray(weights, dtype=float)
    us = np.asarray([check_unitary(u) if check else as_matrix(u) for u in unitaries])
    if len(us) != len(c):
        raise ValueError("weights and unitaries differ in length")
    n = us.shape[1]
    vecs = us.reshape(len(us), n * n).T
    choi = (vecs * c) @ vecs.conj().T / n
    return choi_to_superop(choi)


def check_degree_k_certificate(t: Superop, k: int, cert: Sequence[tuple[float, np.ndarray]]) -> float:
    """Residual of a mixed-unitary certificate for ``T (x) S_k``.

    :param cert: pairs ``(c_j, u_j)`` with ``u_j`` unitary on ``C^n (x) C^k``.
    :return: normalized 2-norm of ``T (x) S_k - sum_j c_j ad(u_j)``.
    """
    d = t.n * k
    for _, u in cert:
        if np.shape(u) != (d, d):
            raise DimensionError(f"certificate unitary has shape {np.shape(u)}, expected {(d, d)}")
    target = tensor(t, depolarizing(k))
    approx = mixture_of_ad([c for c, _ in cert], [u for _, u in cert])
    return normalized_distance(target, approx)


# -- corner compression ------------------------------------------------------

def _contraction_to_unitaries(b: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Write a contraction ``b`` as ``(v_plus + v_minus) / 2`` with both unitary.

    Polar decomposition ``b = w |b|`` with ``w`` unitary (the SVD supplies a
    unitary completion of the partial isometry), then
    ``v_pm = w (|b| +- i sqrt(1 - |b|^2))``.
    """
    left, s, right_h = np.linalg.svd(b)
    if s.max(initial=0.0) > 1 + 1e-9:
        raise ValueError(f"corner block is not a contraction (norm {s.max():.6f})")
    s = np.clip(s, 0.0, 1.0)
    w = left @ right_h
    modulus = right_h.conj().T @ np.diag(s) @ right_h
    defect = right_h.conj().T @ np.diag(np.sqrt(1 - s**2)) @ right_h
    return w @ (modulus + 1j * defect), w @ (modulus - 1j * defect)


@dataclass(frozen=True)
class CornerCompression:
    approximant: Superop
    compressed: Superop
    weights: np.ndarray
    unitaries: list
    bound: float


def corner_compress(t: Superop, s: Superop, decomposition: Sequence[tuple[float, np.ndarray]],
                    alpha: float = 0.0) -> CornerCompression:
    """Pull a mixed-unitary approximation of ``T (x) S`` back to ``M_n``.

    Each ``u_j`` is cut down to the corner ``(1 (x) f_11) u_j (1 (x) f_11) =
    b_j (x) f_11``; the contractions ``b_j`` are split into two unitaries each,
    giving a mixed-unitary ``T~`` with ``||T - T~||_cb <= 2 alpha`` whenever
    ``alpha`` bounds ``||T (x) S - sum_j c_j ad(u_j)||_cb``.

    :param t: Schur multiplier on ``M_n``.
    :param s: Schur multiplier on ``M_k``.
    :param decomposition: pairs ``(c_j, u_j)``, ``u_j`` unitary of size ``nk``.
    :param alpha: caller-supplied cb-distance estimate for the decomposition.
    """
    n, k = t.n, s.n
    c = _check_weights([w for w, _ in decomposition])
    blocks = []
    for _, u in decomposition:
        u = check_unitary(u)
        if u.shape != (n * k, n * k):
            raise DimensionError(f"unitary of shape {u.shape}, expected {(n * k, n * k)}")
        blocks.append(u.reshape(n, k, n, k)[:, 0, :, 0])
    compressed = from_kraus(np.sqrt(cj) * b for cj, b in zip(c, blocks))
    weights, unitaries = [], []
    for cj, b in zip(c, blocks):
        vp, vm = _contraction_to_unitaries(b)
        weights += [cj / 2, cj / 2]
        unitaries += [vp, vm]
    approx = mixture_of_ad(weights, unitaries)
    return CornerCompression(approx, compressed, np.array(weights), unitaries, 2 * alpha)


# -- JSON --------------------------------------------------------------------

def channel_to_json(t: Superop, kind: str = "superop", kraus_pairs=None) -> dict:
    if kind == "superop":
        data = matcore.matrix_to_json(t.matrix)
    elif kind == "choi":
        data = matcore.matrix_to_json(jamiolkowski(t))
    elif kind == "kraus":
        if kraus_pairs is None:
            kraus_pairs = [(a, a) for a in canonical_kraus(t)]
        data = [[matcore.matrix_to_json(a), matcore.matrix_to_json(b)] for a, b in kraus_pairs]
    else:
        raise ValueError(f"unknown channel kind {kind!r}")
    return {"n": t.n, "kind": kind, "data": data}


def channel_from_json(doc: dict) -> Superop:
    kind = doc["kind"]
    n = int(doc["n"])
    if kind == "superop":
        t = Superop(matcore.matrix_from_json(doc["data"]))
    elif kind == "choi":
        t = choi_to_superop(matcore.matrix_from_json(doc["data"]))
    elif kind == "kraus":
        t = from_kraus_pairs(
            (matcore.matrix_from_json(a), matcore.matrix_from_json(b)) for a, b in doc["data"]
        )
    else:
        raise ValueError(f"unknown channel kind {kind!r}")
    if t.n != n:
        raise DimensionError(f"declared n={n} but payload has n={t.n}")
    return t
