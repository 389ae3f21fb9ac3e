"""
Production-destruction systems (PDS).

A PDS is y_i' = P_i(y) - D_i(y) with P_i = sum_j p_ij(y), D_i = sum_j d_ij(y) and
the pairing p_ij = d_ji >= 0, so sum_i y_i is conserved. Linear systems y' = Ay
with a Metzler, column-sum-zero matrix A are the special case p_ij = a_ij y_j.
"""

import logging
import re
from typing import Callable, List, NamedTuple, Optional

import numpy as np

from core.dense_linalg import as_matrix, inf_norm
from core.errors import (
    DimensionError,
    DomainError,
    UnderdeterminedSteadyStateError,
    ValidationError,
)

logger = logging.getLogger(__name__)

DEFAULT_TOL = 1e-10

RateMatrixFn = Callable[[np.ndarray], np.ndarray]


class ValidationReport(NamedTuple):
    """Outcome of a structural check; violations name the offending entries."""
    ok: bool
    violations: List[str]


def as_state(y, n: Optional[int] = None) -> np.ndarray:
    """Return y as a strictly positive float vector, raising DomainError otherwise."""
    v = np.array(y, dtype=float)
    if v.ndim != 1:
        raise DimensionError(f"state must be a vector, got shape {v.shape}")
    if n is not None and v.shape[0] != n:
        raise DimensionError(f"state has {v.shape[0]} components, system has {n}")
    if not np.all(np.isfinite(v)):
        raise DomainError("state has NaN or Inf components")
    bad = np.flatnonzero(v <= 0.0)
    if bad.size:
        raise DomainError(f"state component y[{bad[0]}] = {v[bad[0]]:.6g} is not positive")
    return v


def validate_linear_pds(A, tol: float = DEFAULT_TOL) -> ValidationReport:
    """
    Check that A is Metzler (off-diagonals >= -tol) and conservative
    (|column sum| <= tol * max(1, ||A||_inf)).

    Indices in the violation messages are 1-based, matching matrix notation.
    """
    a = as_matrix(A)
    if a.shape[0] != a.shape[1]:
        raise DimensionError(f"matrix must be square, got {a.shape[0]}x{a.shape[1]}")
    n = a.shape[0]
    violations = []

    for i in range(n):
        for j in range(n):
            if i != j and a[i, j] < -tol:
                violations.append(f"negative off-diagonal entry at ({i + 1},{j + 1}): {a[i, j]:.6g}")

    col_tol = tol * max(1.0, inf_norm(a))
    for j, col_sum in enumerate(a.sum(axis=0)):
        if abs(col_sum) > col_tol:
            violations.append(f"column {j + 1} sums to {col_sum:.6g}, not 0")

    return ValidationReport(not violations, violations)


def _row_reduce(m: np.ndarray, n_cols: int, threshold: float):
    """
    Reduced row echelon form over the first n_cols columns, partial pivoting.
    Columns whose best pivot is <= threshold are treated as free.

    Returns:
        (reduced matrix, list of pivot columns)
    """
    r = m.copy()
    n_rows = r.shape[0]
    pivots = []
    row = 0
    for col in range(n_cols):
        if row >= n_rows:
            break
        p = row + int(np.argmax(np.abs(r[row:, col])))
        if abs(r[p, col]) <= threshold:
            r[row:, col] = 0.0
            continue
        if p != row:
            r[[row, p]] = r[[p, row]]
        r[row] /= r[row, col]
        for k in range(n_rows):
            if k != row and r[k, col] != 0.0:
                r[k] -= r[k, col] * r[row]
        pivots.append(col)
        row += 1
    return r, pivots


def kernel_basis(M, tol: float = DEFAULT_TOL) -> List[np.ndarray]:
    """
    Basis of ker(M), one vector per free column of the echelon form of M.

    Args:
        M: matrix
        tol: pivot threshold relative to ||M||_inf
    """
    m = as_matrix(M)
    n = m.shape[1]
    reduced, pivots = _row_reduce(m, n, tol * inf_norm(m))

    basis = []
    for free in (c for c in range(n) if c not in pivots):
        v = np.zeros(n)
        v[free] = 1.0
        for row, col in enumerate(pivots):
            v[col] = -reduced[row, free]
        basis.append(v)
    return basis


def linear_invariants(A, tol: float = DEFAULT_TOL) -> List[np.ndarray]:
    """
    Basis of ker(A^T): every n with n^T y(t) constant along solutions of y' = Ay.

    The steady-state directions ker(A) come from kernel_basis(A) instead.
    """
    a = as_matrix(A)
    if a.shape[0] != a.shape[1]:
        raise DimensionError(f"matrix must be square, got {a.shape[0]}x{a.shape[1]}")
    return kernel_basis(a.T, tol)


class GeneralPDS:
    """
    Production-destruction system given by rate matrices.

    production(y) returns the N x N matrix of p_ij(y); destruction(y) returns d_ij(y).
    When destruction is omitted it is taken as the transpose of production, which
    enforces the pairing p_ij = d_ji.
    """

    def __init__(self, n: int, production: RateMatrixFn,
                 destruction: Optional[RateMatrixFn] = None, name: str = 'pds'):
        self.n = n
        self.name = name
        self._production = production
        self._destruction = destruction

    @classmethod
    def from_rate_functions(cls, n: int, p: Callable[[int, int, np.ndarray], float],
                            d: Callable[[int, int, np.ndarray], float],
                            name: str = 'pds') -> 'GeneralPDS':
        """Wrap scalar rate callables p(i, j, y), d(i, j, y) (0-based indices)."""

        def production(y):
            return np.array([[p(i, j, y) if i != j else 0.0 for j in range(n)] for i in range(n)])

        def destruction(y):
            return np.array([[d(i, j, y) if i != j else 0.0 for j in range(n)] for i in range(n)])

        return cls(n, production, destruction, name=name)

    def production_matrix(self, y: np.ndarray) -> np.ndarray:
        return np.asarray(self._production(y), dtype=float)

    def destruction_matrix(self, y: np.ndarray) -> np.ndarray:
        if self._destruction is None:
            return self.production_matrix(y).T
        return np.asarray(self._destruction(y), dtype=float)

    def p(self, i: int, j: int, y) -> float:
        return float(self.production_matrix(np.asarray(y, dtype=float))[i, j])

    def d(self, i: int, j: int, y) -> float:
        return float(self.destruction_matrix(np.asarray(y, dtype=float))[i, j])

    def rhs(self, y) -> np.ndarray:
        """P_i(y) - D_i(y) for every component."""
        y = np.asarray(y, dtype=float)
        return self.production_matrix(y).sum(axis=1) - self.destruction_matrix(y).sum(axis=1)

    def check_symmetry(self, y, tol: float = 1e-12) -> ValidationReport:
        """Check p_ij(y) = d_ji(y) >= 0 and zero diagonals at the state y."""
        y = as_state(y, self.n)
        prod = self.production_matrix(y)
        dest = self.destruction_matrix(y)
        scale = tol * max(1.0, float(np.max(np.abs(prod))))
        violations = []
        for i in range(self.n):
            if prod[i, i] != 0.0 or dest[i, i] != 0.0:
                violations.append(f"nonzero diagonal rate at ({i + 1},{i + 1})")
            for j in range(self.n):
                if prod[i, j] < -scale:
                    violations.append(f"negative production p({i + 1},{j + 1}) = {prod[i, j]:.6g}")
                if abs(prod[i, j] - dest[j, i]) > scale:
                    violations.append(f"p({i + 1},{j + 1}) = {prod[i, j]:.6g} but d({j + 1},{i + 1}) = {dest[j, i]:.6g}")
        return ValidationReport(not violations, violations)

    def __repr__(self):
        return f"GeneralPDS(name={self.name!r}, n={self.n})"


class LinearPDS(NamedTuple):
    """Validated linear system y' = Ay with its cached invariant basis."""
    A: np.ndarray
    invariant_basis: List[np.ndarray]

    @classmethod
    def from_matrix(cls, A, tol: float = DEFAULT_TOL) -> 'LinearPDS':
        report = validate_linear_pds(A, tol)
        if not report.ok:
            raise ValidationError(report.violations)
        a = as_matrix(A)
        basis = linear_invariants(a, tol)
        logger.debug(f"Linear PDS of dimension {a.shape[0]} with {len(basis)} linear invariants")
        return cls(a, basis)

    @property
    def n(self) -> int:
        return self.A.shape[0]

    def rhs(self, y) -> np.ndarray:
        return self.A @ np.asarray(y, dtype=float)

    def invariant_matrix(self) -> np.ndarray:
        """Rows are the invariant basis vectors (k x N)."""
        if not self.invariant_basis:
            return np.zeros((0, self.n))
        return np.vstack(self.invariant_basis)

    def invariant_values(self, y) -> np.ndarray:
        return self.invariant_matrix() @ np.asarray(y, dtype=float)


def pds_from_matrix(system) -> GeneralPDS:
    """
    PDS form of a linear system: p_ij(y) = a_ij y_j and d_ij(y) = a_ji y_i for i != j,
    zero on the diagonal. Accepts a LinearPDS or a raw matrix (validated first).
    """
    if not isinstance(system, LinearPDS):
        system = LinearPDS.from_matrix(system)
    off_diagonal = system.A.copy()
    np.fill_diagonal(off_diagonal, 0.0)

    def production(y):
        return off_diagonal * np.asarray(y, dtype=float)[np.newaxis, :]

    return GeneralPDS(system.n, production, name='linear')


def steady_state(system, y0, tol: float = DEFAULT_TOL) -> np.ndarray:
    """
    Limit of y(t) for y' = Ay, y(0) = y0, from the stacked system [A; N] y* = [0; N y0].

    Args:
        system: LinearPDS or raw matrix
        y0: positive initial state
        tol: rank threshold relative to the norm of the stacked matrix

    Returns:
        The steady state y*.
    """
    if not isinstance(system, LinearPDS):
        system = LinearPDS.from_matrix(system, tol)
    y0 = as_state(y0, system.n)
    n = system.n
    inv = system.invariant_matrix()

    stacked = np.vstack([system.A, inv])
    rhs = np.concatenate([np.zeros(n), inv @ y0])
    augmented = np.hstack([stacked, rhs[:, np.newaxis]])
    reduced, pivots = _row_reduce(augmented, n, tol * inf_norm(stacked))

    if len(pivots) < n:
        raise UnderdeterminedSteadyStateError(
            f"stacked steady-state system has rank {len(pivots)} < {n}")

    y_star = np.zeros(n)
    for row, col in enumerate(pivots):
        y_star[col] = reduced[row, n]
    return y_star


def parse_matrix(text: str) -> np.ndarray:
    """
    Parse row-major matrix text. Rows are separated by newlines or ';',
    entries by commas or whitespace.
    """
    rows = []
    for line in re.split(r'[;\n]', text):
        tokens = [t for t in re.split(r'[,\s]+', line.strip()) if t]
        if not tokens:
            continue
        try:
            rows.append([float(t) for t in tokens])
        except ValueError as e:
            raise DimensionError(f"cannot parse matrix row {line.strip()!r}: {e}")
    if not rows:
        raise DimensionError("empty matrix text")
    widths = {len(r) for r in rows}
    if len(widths) != 1:
        raise DimensionError(f"ragged matrix rows with lengths {sorted(widths)}")
    return as_matrix(rows)


def parse_vector(text: str) -> np.ndarray:
    """A vector written as a single row or a single column of matrix text."""
    m = parse_matrix(text)
    if min(m.shape) != 1:
        raise DimensionError(f"expected a vector, got a {m.shape[0]}x{m.shape[1]} matrix")
    return m.ravel()
