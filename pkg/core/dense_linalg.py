"""
Small dense linear algebra kernel used by the Patankar stage solves and the
Jacobian checks: LU with partial pivoting, Hessenberg reduction and shifted QR
eigenvalues. Written for N <= 8; no attempt at blocking or sparsity.
"""

from typing import List, Tuple

import numpy as np

from core.errors import ConvergenceError, DimensionError, SingularMatrixError

# relative pivot threshold for lu_factor (times the infinity norm)
PIVOT_TOL = 1e-14
MAX_EIGEN_DIM = 8
MAX_QR_ITER = 100
_EPS = np.finfo(float).eps


def as_matrix(M) -> np.ndarray:
    """Return M as a finite 2-D float array (the DenseMatrix contract)."""
    a = np.array(M, dtype=float)
    if a.ndim != 2:
        raise DimensionError(f"expected a 2-D matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise DimensionError("matrix has NaN or Inf entries")
    return a


def _square(M) -> np.ndarray:
    a = as_matrix(M)
    if a.shape[0] != a.shape[1]:
        raise DimensionError(f"matrix must be square, got {a.shape[0]}x{a.shape[1]}")
    return a


def norm2(v) -> float:
    """Euclidean norm of a real or complex vector."""
    return float(np.sqrt(np.sum(np.abs(np.asarray(v)) ** 2)))


def inf_norm(M) -> float:
    """Maximum absolute row sum."""
    a = np.asarray(M)
    if a.size == 0:
        return 0.0
    return float(np.max(np.sum(np.abs(a), axis=1)))


def lu_factor(M) -> Tuple[np.ndarray, np.ndarray]:
    """
    LU factorization with partial pivoting, stored compactly.

    Returns:
        (lu, piv) where the strict lower triangle of lu holds L (unit diagonal),
        the upper triangle holds U and piv is the row permutation.
    """
    a = _square(M).copy()
    n = a.shape[0]
    threshold = PIVOT_TOL * inf_norm(a)
    piv = np.arange(n)

    for k in range(n):
        p = k + int(np.argmax(np.abs(a[k:, k])))
        if abs(a[p, k]) <= threshold:
            raise SingularMatrixError(
                f"pivot {abs(a[p, k]):.3e} in column {k} below threshold {threshold:.3e}")
        if p != k:
            a[[k, p]] = a[[p, k]]
            piv[[k, p]] = piv[[p, k]]
        a[k + 1:, k] /= a[k, k]
        a[k + 1:, k + 1:] -= np.outer(a[k + 1:, k], a[k, k + 1:])

    return a, piv


def lu_substitute(lu: np.ndarray, piv: np.ndarray, b) -> np.ndarray:
    """Forward/back substitution; b may be a vector or a matrix of columns."""
    x = np.array(b, dtype=float)[piv]
    n = lu.shape[0]
    for i in range(n):
        x[i] -= lu[i, :i] @ x[:i]
    for i in range(n - 1, -1, -1):
        x[i] = (x[i] - lu[i, i + 1:] @ x[i + 1:]) / lu[i, i]
    return x


def lu_solve(M, b) -> np.ndarray:
    """Solve M x = b. b may hold several right-hand sides as columns."""
    b = np.asarray(b, dtype=float)
    n = np.shape(M)[0]
    if b.shape[0] != n:
        raise DimensionError(f"right-hand side has {b.shape[0]} rows, matrix has {n}")
    lu, piv = lu_factor(M)
    return lu_substitute(lu, piv, b)


def hessenberg(M) -> np.ndarray:
    """Householder reduction to upper Hessenberg form (similarity transform)."""
    h = _square(M).copy()
    n = h.shape[0]
    for k in range(n - 2):
        x = h[k + 1:, k].copy()
        norm_x = np.sqrt(x @ x)
        if norm_x == 0.0:
            continue
        alpha = -norm_x if x[0] >= 0 else norm_x
        v = x
        v[0] -= alpha
        v /= np.sqrt(v @ v)
        h[k + 1:, :] -= 2.0 * np.outer(v, v @ h[k + 1:, :])
        h[:, k + 1:] -= 2.0 * np.outer(h[:, k + 1:] @ v, v)
        h[k + 2:, k] = 0.0
    return h


def _wilkinson_shift(h: np.ndarray, m: int) -> complex:
    a, b = h[m - 2, m - 2], h[m - 2, m - 1]
    c, d = h[m - 1, m - 2], h[m - 1, m - 1]
    half_trace = (a + d) / 2
    disc = np.sqrt(half_trace * half_trace - (a * d - b * c))
    mu1, mu2 = half_trace + disc, half_trace - disc
    return mu1 if abs(mu1 - d) <= abs(mu2 - d) else mu2


def _qr_sweep(h: np.ndarray, m: int, mu: complex) -> None:
    """One shifted QR step on the leading m x m block, via Givens rotations."""
    a = h[:m, :m]
    a[np.diag_indices(m)] -= mu
    rotations = []
    for k in range(m - 1):
        x, y = a[k, k], a[k + 1, k]
        r = np.hypot(abs(x), abs(y))
        c, s = (1.0 + 0j, 0j) if r == 0.0 else (x / r, y / r)
        top, bottom = a[k, k:].copy(), a[k + 1, k:].copy()
        a[k, k:] = np.conj(c) * top + np.conj(s) * bottom
        a[k + 1, k:] = -s * top + c * bottom
        rotations.append((c, s))
    for k, (c, s) in enumerate(rotations):
        left, right = a[:k + 2, k].copy(), a[:k + 2, k + 1].copy()
        a[:k + 2, k] = left * c + right * s
        a[:k + 2, k + 1] = -left * np.conj(s) + right * np.conj(c)
    a[np.diag_indices(m)] += mu


def eigenvalues(M) -> List[complex]:
    """
    Eigenvalues of a small real matrix by Hessenberg reduction followed by
    complex Wilkinson-shifted QR with bottom deflation.

    Returns:
        List of complex eigenvalues sorted by (real, imag). Imaginary parts below
        1e-12 times the matrix norm are snapped to zero, so real spectra come
        back real and complex ones as conjugate pairs.
    """
    a = _square(M)
    n = a.shape[0]
    if n > MAX_EIGEN_DIM:
        raise DimensionError(f"eigenvalues supports N <= {MAX_EIGEN_DIM}, got {n}")
    if n == 0:
        return []

    h = hessenberg(a).astype(complex)
    norm = float(np.sqrt(np.sum(np.abs(h) ** 2)))
    found = []
    m = n
    iterations = 0

    while m > 0:
        if m == 1:
            found.append(h[0, 0])
            break
        for k in range(1, m):
            scale = abs(h[k, k]) + abs(h[k - 1, k - 1]) or norm
            if abs(h[k, k - 1]) <= _EPS * scale:
                h[k, k - 1] = 0.0
        if h[m - 1, m - 2] == 0.0:
            found.append(h[m - 1, m - 1])
            m -= 1
            iterations = 0
            continue
        if iterations >= MAX_QR_ITER:
            raise ConvergenceError(
                f"QR iteration stalled with {m} eigenvalues left", residual=abs(h[m - 1, m - 2]))
        if iterations and iterations % 10 == 0:
            # exceptional shift to break cycles
            mu = h[m - 1, m - 1] + abs(h[m - 1, m - 2])
        else:
            mu = _wilkinson_shift(h, m)
        _qr_sweep(h, m, mu)
        iterations += 1

    snap = 1e-12 * max(norm, 1.0)
    result = []
    for lam in found:
        lam = complex(lam)
        if abs(lam.imag) <= snap:
            lam = complex(lam.real, 0.0)
        result.append(lam)
    return sorted(result, key=lambda z: (z.real, z.imag))


def spectral_radius(M) -> float:
    """max |lambda| over the spectrum of M."""
    eigs = eigenvalues(M)
    return max((abs(lam) for lam in eigs), default=0.0)
