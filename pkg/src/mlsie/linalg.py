"""Dense LU, Cholesky and Householder QR on numpy arrays.

The tolerances are module constants; every routine also accepts an
override keyword.
"""

from __future__ import annotations

import numpy as np

from .errors import InvalidArgument, NotPositiveDefiniteError, RankDeficientError, SingularMatrixError

LU_PIVOT_RTOL = 1e-14
CHOLESKY_PIVOT_RTOL = 1e-13
QR_RANK_RTOL = 1e-12
INV_NORM_MAX_N = 4000


def _square(A) -> np.ndarray:
    A = np.array(A, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise InvalidArgument(f"expected a square matrix, got shape {A.shape}")
    return A


def lu_factor(A, rtol: float = LU_PIVOT_RTOL, scale: float | None = None):
    """Partial-pivoting LU packed in one array, plus the row permutation.

    Pivots below ``rtol * scale`` count as zero. ``scale`` defaults to the
    largest row sum of ``A``; pass the size of the terms ``A`` was built from
    when cancellation between them should read as singularity.
    """
    LU = _square(A)
    n = LU.shape[0]
    if scale is None:
        scale = np.abs(LU).sum(axis=1).max() if n else 0.0
    perm = np.arange(n)
    for k in range(n):
        p = k + int(np.argmax(np.abs(LU[k:, k])))
        if abs(LU[p, k]) < rtol * scale or LU[p, k] == 0.0:
            raise SingularMatrixError(k)
        if p != k:
            LU[[k, p]] = LU[[p, k]]
            perm[[k, p]] = perm[[p, k]]
        LU[k + 1 :, k] /= LU[k, k]
        LU[k + 1 :, k + 1 :] -= np.outer(LU[k + 1 :, k], LU[k, k + 1 :])
    return LU, perm


def _forward_unit(L, b):
    y = np.array(b, dtype=float)
    for k in range(1, L.shape[0]):
        y[k] -= L[k, :k] @ y[:k]
    return y


def _backward(U, y):
    x = np.array(y, dtype=float)
    n = U.shape[0]
    for k in range(n - 1, -1, -1):
        x[k] = (x[k] - U[k, k + 1 :] @ x[k + 1 :]) / U[k, k]
    return x


def lu_solve_factored(LU, perm, b) -> np.ndarray:
    """Solve with a factorization from :func:`lu_factor`; ``b`` may be a matrix."""
    b = np.asarray(b, dtype=float)
    return _backward(LU, _forward_unit(LU, b[perm]))


def lu_solve(A, b, rtol: float = LU_PIVOT_RTOL, scale: float | None = None) -> np.ndarray:
    LU, perm = lu_factor(A, rtol, scale)
    return lu_solve_factored(LU, perm, b)


def cholesky_factor(A, rtol: float = CHOLESKY_PIVOT_RTOL) -> np.ndarray:
    """Lower factor ``L`` with ``A = L L^T``. Only the lower triangle of ``A`` is read."""
    A = _square(A)
    n = A.shape[0]
    L = np.zeros_like(A)
    floor = rtol * (np.max(np.diag(A)) if n else 0.0)
    for k in range(n):
        pivot = A[k, k] - L[k, :k] @ L[k, :k]
        if not pivot > floor or pivot <= 0.0:
            raise NotPositiveDefiniteError(k)
        L[k, k] = np.sqrt(pivot)
        L[k + 1 :, k] = (A[k + 1 :, k] - L[k + 1 :, :k] @ L[k, :k]) / L[k, k]
    return L


def cholesky_solve(A, b, rtol: float = CHOLESKY_PIVOT_RTOL) -> np.ndarray:
    L = cholesky_factor(A, rtol)
    y = np.array(b, dtype=float)
    n = L.shape[0]
    for k in range(n):
        y[k] = (y[k] - L[k, :k] @ y[:k]) / L[k, k]
    return _backward(L.T, y)


def inf_norm(A) -> float:
    return float(np.abs(np.atleast_2d(A)).sum(axis=1).max())


def inf_norm_inverse(A, rtol: float = LU_PIVOT_RTOL) -> float:
    """Exact ``||A^{-1}||_inf``: one LU, then solves against all unit vectors."""
    A = _square(A)
    n = A.shape[0]
    if n > INV_NORM_MAX_N:
        raise InvalidArgument(f"n={n} exceeds the inverse-norm cost guard ({INV_NORM_MAX_N})")
    LU, perm = lu_factor(A, rtol)
    inv = lu_solve_factored(LU, perm, np.eye(n))
    return inf_norm(inv)


def householder_qr(A):
    """Householder QR of an ``M x n`` matrix (``M >= n``).

    Returns the reflector vectors (unit norm, one per column) and ``R``.
    """
    R = np.array(A, dtype=float)
    M, n = R.shape
    if M < n:
        raise InvalidArgument("least squares needs at least as many rows as columns")
    vs = []
    for k in range(n):
        x = R[k:, k]
        norm_x = np.linalg.norm(x)
        v = x.copy()
        if norm_x == 0.0:
            vs.append(None)
            continue
        v[0] += np.copysign(norm_x, x[0])
        v /= np.linalg.norm(v)
        R[k:, k:] -= 2.0 * np.outer(v, v @ R[k:, k:])
        vs.append(v)
    return vs, np.triu(R[:n])


def qr_lstsq(A, b, rtol: float = QR_RANK_RTOL) -> np.ndarray:
    """Least-squares solution of ``A x ~ b`` by Householder QR."""
    A = np.atleast_2d(np.asarray(A, dtype=float))
    vs, R = householder_qr(A)
    n = R.shape[0]
    diag = np.abs(np.diag(R))
    bound = rtol * (np.abs(R).max() if n else 0.0)
    bad = np.flatnonzero((diag < bound) | (diag == 0.0))
    if bad.size:
        raise RankDeficientError(int(bad[0]))
    y = np.array(b, dtype=float)
    for k, v in enumerate(vs):
        if v is not None:
            y[k:] -= 2.0 * v * (v @ y[k:])
    return _backward(R, y[:n])
