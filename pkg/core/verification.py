"""
Jacobian-based checks at steady states: finite-difference and analytic
Jacobians of the one-step map, eigenvalue transfer lambda -> R(dt*lambda),
kernel fixedness and the resulting stability verdict.
"""

import logging
from enum import Enum
from typing import Callable, List, NamedTuple, Optional, Sequence

import numpy as np

from core.dense_linalg import eigenvalues, lu_solve, norm2
from core.errors import ContractViolationError, StepSizeError
from core.pds_core import LinearPDS, as_state
from core.schemes import SSPMPRK2Params

logger = logging.getLogger(__name__)

DEFLATION_TOL = 1e-6
FD_REL_STEP = 1e-6
FIXED_POINT_TOL = 1e-10

StepMap = Callable[[np.ndarray], np.ndarray]


class Verdict(Enum):
    STABLE_NON_HYPERBOLIC = 'StableNonHyperbolic'
    UNSTABLE = 'Unstable'
    HYPERBOLIC_CONTRACTIVE = 'HyperbolicContractive'
    INCONCLUSIVE = 'Inconclusive'


class JacobianReport(NamedTuple):
    matrix: np.ndarray
    eigenvalues: List[complex]
    spectral_radius: float
    kernel_residuals: List[float]


def default_fd_step(y_star) -> float:
    return FD_REL_STEP * max(1.0, float(np.max(np.abs(y_star))))


def fd_jacobian(step: StepMap, y_star, h: Optional[float] = None) -> np.ndarray:
    """
    Central-difference Jacobian of step at y_star, column by column.

    Raises:
        StepSizeError: when y_star - h*e_i leaves the positive orthant.
        ContractViolationError: when ||step(y_star) - y_star|| > 1e-10 ||y_star||.
    """
    y_star = as_state(y_star)
    if h is None:
        h = default_fd_step(y_star)
    n = y_star.shape[0]
    if np.any(y_star - h <= 0.0):
        raise StepSizeError(f"step h = {h:g} exceeds the smallest component {y_star.min():g}")
    drift = norm2(np.asarray(step(y_star)) - y_star)
    if drift > FIXED_POINT_TOL * norm2(y_star):
        raise ContractViolationError(f"y_star is not a fixed point of the step: moved by {drift:.3e}")

    jac = np.empty((n, n))
    for i in range(n):
        e = np.zeros(n)
        e[i] = h
        jac[:, i] = (np.asarray(step(y_star + e)) - np.asarray(step(y_star - e))) / (2.0 * h)
    return jac


def analytic_jacobian_sspmprk2(system, dt: float, p: SSPMPRK2Params) -> np.ndarray:
    """
    Jacobian of the SSPMPRK2 map at any steady state of y' = Ay:

        (I - (1-ab) dtA)^-1 [(1-a)I + dtA((s-1)(1-ab) + b20)
                             + (aI + dtA(-s(1-ab) + b21)) (I - b dtA)^-1]
    """
    a_mat = system.A if isinstance(system, LinearPDS) else np.asarray(system, dtype=float)
    n = a_mat.shape[0]
    eye = np.eye(n)
    x = dt * a_mat
    one_minus_ab = 1.0 - p.alpha * p.beta

    stage1 = lu_solve(eye - p.beta * x, eye)
    inner = ((1.0 - p.alpha) * eye + x * ((p.s - 1.0) * one_minus_ab + p.beta20)
             + (p.alpha * eye + x * (-p.s * one_minus_ab + p.beta21)) @ stage1)
    return lu_solve(eye - one_minus_ab * x, inner)


def kernel_residuals(jac: np.ndarray, kernel_basis: Sequence[np.ndarray]) -> List[float]:
    """||(J - I) v|| / ||v|| for each kernel vector."""
    residuals = []
    for v in kernel_basis:
        v = np.asarray(v, dtype=float)
        residuals.append(norm2(jac @ v - v) / norm2(v))
    return residuals


def stability_verdict(jac, kernel_basis: Sequence[np.ndarray], tol: float = DEFLATION_TOL) -> Verdict:
    """
    Classify a steady state from the Jacobian of the one-step map.

    The kernel directions must be fixed by J; up to k = len(kernel_basis) eigenvalues
    within tol of 1 are set aside and the rest decide the verdict.

    Raises:
        ContractViolationError: when some kernel residual exceeds tol.
    """
    jac = np.asarray(jac, dtype=float)
    residuals = kernel_residuals(jac, kernel_basis)
    for i, r in enumerate(residuals):
        if r > tol:
            raise ContractViolationError(f"kernel vector {i + 1} is not fixed by J: residual {r:.3e}")

    eigs = eigenvalues(jac)
    k = len(kernel_basis)
    near_one = sorted(range(len(eigs)), key=lambda i: abs(eigs[i] - 1.0))
    deflated = {i for i in near_one[:k] if abs(eigs[i] - 1.0) <= tol}
    remaining = [abs(lam) for i, lam in enumerate(eigs) if i not in deflated]
    logger.debug(f"Deflated {len(deflated)} unit eigenvalues, remaining moduli {remaining}")

    if all(m < 1.0 - tol for m in remaining):
        return Verdict.HYPERBOLIC_CONTRACTIVE if k == 0 else Verdict.STABLE_NON_HYPERBOLIC
    if any(m > 1.0 + tol for m in remaining):
        return Verdict.UNSTABLE
    return Verdict.INCONCLUSIVE


def jacobian_report(step: StepMap, y_star, kernel_basis: Sequence[np.ndarray],
                    h: Optional[float] = None) -> JacobianReport:
    """FD Jacobian at y_star together with its spectrum and kernel residuals."""
    jac = fd_jacobian(step, y_star, h)
    eigs = eigenvalues(jac)
    return JacobianReport(
        matrix=jac,
        eigenvalues=eigs,
        spectral_radius=max(abs(lam) for lam in eigs),
        kernel_residuals=kernel_residuals(jac, kernel_basis),
    )


def eigenvalue_transfer_error(jac, dt: float, system_eigenvalues: Sequence[complex],
                              stability_fn: Callable[[complex], complex]) -> float:
    """
    Largest distance between eig(J) and {R(dt*lambda)}, matching each expected
    value greedily to its nearest unused eigenvalue of J.
    """
    actual = list(eigenvalues(jac))
    worst = 0.0
    for lam in system_eigenvalues:
        expected = complex(stability_fn(dt * complex(lam)))
        best = min(range(len(actual)), key=lambda i: abs(actual[i] - expected))
        worst = max(worst, abs(actual.pop(best) - expected))
    return worst
