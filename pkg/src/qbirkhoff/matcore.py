"""Dense complex matrix helpers.

Conventions used throughout the package:

* Matrices are plain ``numpy`` arrays of dtype ``complex128``.
* Tensor products follow ``numpy.kron``: for ``M_n (x) M_k`` the first leg is
  the slow index, i.e. basis vector ``|i> (x) |a>`` sits at position ``i*k + a``.
* Two traces coexist.  ``np.trace`` is the usual (non-normalized) trace ``Tr``;
  :func:`normalized_trace` is ``tau = Tr / dim``.  All norms in this module are
  taken with respect to ``tau``.
"""
from __future__ import annotations

import json
from typing import Sequence

import numpy as np

VALIDATION_TOL = 1e-10


class ShapeError(ValueError):
    """Raised when a matrix does not fit the requested tensor shape."""


class NotHermitianError(ValueError):
    pass


class NotUnitaryError(ValueError):
    pass


def as_matrix(m) -> np.ndarray:
    """Return ``m`` as a finite 2-d complex array."""
    a = np.asarray(m, dtype=complex)
    if a.ndim != 2:
        raise ShapeError(f"expected a 2-d array, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError("matrix has non-finite entries")
    return a


def check_unitary(u, tol: float = VALIDATION_TOL) -> np.ndarray:
    """Validate ``u`` as unitary (``||u u* - 1||_max <= tol``) and return it."""
    u = as_matrix(u)
    if u.shape[0] != u.shape[1]:
        raise NotUnitaryError(f"unitary must be square, got {u.shape}")
    err = np.max(np.abs(u @ u.conj().T - np.eye(u.shape[0])))
    if err > tol:
        raise NotUnitaryError(f"||u u* - 1||_max = {err:.3e} exceeds {tol:.1e}")
    return u


def is_unitary(u, tol: float = VALIDATION_TOL) -> bool:
    try:
        check_unitary(u, tol)
    except NotUnitaryError:
        return False
    return True


def matrix_unit(n: int, i: int, j: int) -> np.ndarray:
    """The matrix unit ``e_ij`` in ``M_n`` (0-based indices)."""
    e = np.zeros((n, n), dtype=complex)
    e[i, j] = 1.0
    return e


def kron(a, b) -> np.ndarray:
    return np.kron(as_matrix(a), as_matrix(b))


def kron_all(mats: Sequence) -> np.ndarray:
    out = np.ones((1, 1), dtype=complex)
    for m in mats:
        out = np.kron(out, as_matrix(m))
    return out


def normalized_trace(m) -> complex:
    m = as_matrix(m)
    return np.trace(m) / m.shape[0]


def _check_shape(m: np.ndarray, shape: Sequence[int]) -> tuple[int, ...]:
    shape = tuple(int(d) for d in shape)
    if any(d < 1 for d in shape):
        raise ShapeError(f"tensor factors must be positive, got {shape}")
    dim = int(np.prod(shape))
    if m.shape != (dim, dim):
        raise ShapeError(f"matrix of shape {m.shape} does not match tensor shape {shape}")
    return shape


def partial_trace_second(m, shape: Sequence[int], normalized: bool = True) -> np.ndarray:
    """Trace out the second leg of ``m`` in ``M_n (x) M_k``.

    :param m: ``nk x nk`` matrix.
    :param shape: ``(n, k)``.
    :param normalized: divide by ``k``, i.e. apply ``id (x) tau_k`` rather than
        ``id (x) Tr_k``.
    :return: ``n x n`` matrix.
    """
    m = as_matrix(m)
    n, k = _check_shape(m, shape)
    out = np.einsum("iaja->ij", m.reshape(n, k, n, k))
    return out / k if normalized else out


def partial_trace(m, shape: Sequence[int], keep: Sequence[int]) -> np.ndarray:
    """Non-normalized partial trace keeping the legs listed in ``keep``."""
    m = as_matrix(m)
    shape = _check_shape(m, shape)
    nlegs = len(shape)
    keep = sorted(keep)
    t = m.reshape(shape + shape)
    # trace legs from the highest index down so axis numbers stay valid
    for leg in reversed(range(nlegs)):
        if leg in keep:
            continue
        t = np.trace(t, axis1=leg, axis2=leg + t.ndim // 2)
    d = int(np.prod([shape[i] for i in keep])) if keep else 1
    return t.reshape(d, d)


def partial_transpose(m, shape: Sequence[int], leg: int) -> np.ndarray:
    """Transpose the tensor factor ``leg`` of ``m``, leaving the others alone."""
    m = as_matrix(m)
    shape = _check_shape(m, shape)
    nlegs = len(shape)
    if not 0 <= leg < nlegs:
        raise ShapeError(f"leg {leg} out of range for {nlegs} factors")
    axes = list(range(2 * nlegs))
    axes[leg], axes[leg + nlegs] = axes[leg + nlegs], axes[leg]
    dim = m.shape[0]
    return m.reshape(shape + shape).transpose(axes).reshape(dim, dim)


def permute_legs(m, shape: Sequence[int], perm: Sequence[int]) -> np.ndarray:
    """Conjugate ``m`` by the leg permutation: new leg ``i`` is old leg ``perm[i]``."""
    m = as_matrix(m)
    shape = _check_shape(m, shape)
    nlegs = len(shape)
    perm = list(perm)
    axes = perm + [p + nlegs for p in perm]
    dim = m.shape[0]
    return m.reshape(shape + shape).transpose(axes).reshape(dim, dim)


def leg_permutation_unitary(shape: Sequence[int], perm: Sequence[int]) -> np.ndarray:
    """Permutation matrix ``V`` with ``V (x_0 (x) ... ) = x_perm[0] (x) ...`` on vectors."""
    shape = tuple(shape)
    dim = int(np.prod(shape))
    idx = np.arange(dim).reshape(shape).transpose(perm).reshape(-1)
    v = np.zeros((dim, dim))
    v[np.arange(dim), idx] = 1.0
    return v


def schatten_norm_normalized(m, p: float = 2) -> float:
    """``tau(|m|^p)^(1/p)``; ``p = inf`` gives the operator norm."""
    m = as_matrix(m)
    s = np.linalg.svd(m, compute_uv=False)
    if np.isinf(p):
        return float(s.max(initial=0.0))
    if p < 1:
        raise ValueError("p must be >= 1")
    return float(np.mean(s**p) ** (1.0 / p))


def norm2_sq(m) -> float:
    """``||m||_2^2 = tau(m* m)``; cheaper than the SVD route."""
    m = as_matrix(m)
    return float(np.vdot(m, m).real / m.shape[0])


def op_norm(m) -> float:
    return schatten_norm_normalized(m, np.inf)


def hermitian_eigensystem(m, tol: float = VALIDATION_TOL):
    """Eigen-decomposition of a Hermitian matrix, eigenvalues descending.

    :return: ``(eigenvalues, eigenvectors)`` with eigenvectors as columns.
    :raises NotHermitianError: if ``||m - m*||_max > tol``.
    """
    m = as_matrix(m)
    if m.shape[0] != m.shape[1]:
        raise ShapeError("matrix must be square")
    herr = np.max(np.abs(m - m.conj().T), initial=0.0)
    if herr > tol:
        raise NotHermitianError(f"||m - m*||_max = {herr:.3e}")
    w, v = np.linalg.eigh((m + m.conj().T) / 2)
    return w[::-1], v[:, ::-1]


def haar_unitaries(n: int, count: int, rng: np.random.Generator) -> np.ndarray:
    """Stack of ``count`` Haar unitaries, shape ``(count, n, n)``.

    QR of a complex Ginibre matrix, with the phases of ``diag(R)`` moved into
    ``Q`` so that the factorization is unique and the law is exactly Haar.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    z = (rng.standard_normal((count, n, n)) + 1j * rng.standard_normal((count, n, n))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    d = np.diagonal(r, axis1=1, axis2=2)
    ph = d / np.abs(d)
    return q * ph[:, None, :]


def haar_unitary(n: int, seed: int) -> np.ndarray:
    """A single Haar-random unitary, deterministic in ``seed``."""
    return haar_unitaries(n, 1, np.random.default_rng(seed))[0]


# -- JSON --------------------------------------------------------------------

def matrix_to_json(m) -> dict:
    m = as_matrix(m)
    flat = m.reshape(-1)
    return {
        "rows": int(m.shape[0]),
        "cols": int(m.shape[1]),
        "entries": [[float(z.real), float(z.imag)] for z in flat],
    }


def matrix_from_json(doc) -> np.ndarray:
    if isinstance(doc, str):
        doc = json.loads(doc)
    rows, cols = int(doc["rows"]), int(doc["cols"])
    entries = doc["entries"]
    if rows < 1 or cols < 1:
        raise ShapeError("rows and cols must be positive")
    if len(entries) != rows * cols:
        raise ShapeError(f"expected {rows * cols} entries, got {len(entries)}")
    arr = np.array([complex(re, im) for re, im in entries], dtype=complex)
    return as_matrix(arr.reshape(rows, cols))
