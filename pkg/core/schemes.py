"""
Strong-stability-preserving modified Patankar Runge-Kutta integrators.

SSPMPRK2(alpha, beta) is second order with two free parameters, SSPMPRK3(eta2)
third order with one. Every stage is a linear solve with a Patankar matrix whose
columns sum to one, so positivity and all linear invariants survive any step size.
"""

import logging
from typing import Callable, List, NamedTuple, Optional, Sequence, Tuple, Union

import numpy as np

from core.dense_linalg import lu_solve, norm2
from core.errors import InconsistencyError, ParameterError, StageGuardError
from core.pds_core import GeneralPDS, as_state

logger = logging.getLogger(__name__)

# tie tolerance for the parameter inequalities
PARAM_TOL = 1e-14

# third-order constant table, full printed precision
R1 = 0.37110619221712509
SSP3_ALPHA10 = 1.0
SSP3_ALPHA20 = 9.2600312554031827e-1
SSP3_ALPHA21 = 7.3996874459681783e-2
SSP3_ALPHA30 = 7.0439040373427619e-1
SSP3_ALPHA31 = 2.0662904223744017e-10
SSP3_ALPHA32 = 2.9560959605909481e-1
SSP3_BETA10 = 4.7620819268131703e-1
SSP3_BETA20 = 7.7545442722396801e-2
SSP3_BETA21 = 5.9197500149679749e-1
SSP3_BETA30 = 2.0044747790361456e-1
SSP3_BETA31 = 6.8214380786704851e-10
SSP3_BETA32 = 5.9121918658514827e-1
SSP3_ZETA = 0.62889380778287493358
SSP3_ETA1_OFFSET = 0.37110619221712506642
SSP3_ETA3_SLOPE = -1.2832127371313151768
SSP3_ETA3_OFFSET = 0.6146025595987523739
SSP3_ETA4 = 2.2248760403511226405
SSP3_N1 = 0.25690460257320105191


class SSPMPRK2Params(NamedTuple):
    alpha: float
    beta: float
    beta20: float
    beta21: float
    s: float

    def label(self) -> str:
        return f"SSPMPRK2({self.alpha:g},{self.beta:g})"


class SSPMPRK3Params(NamedTuple):
    eta2: float
    s: float
    alpha10: float
    alpha20: float
    alpha21: float
    alpha30: float
    alpha31: float
    alpha32: float
    beta10: float
    beta20: float
    beta21: float
    beta30: float
    beta31: float
    beta32: float
    zeta: float
    eta1: float
    eta3: float
    eta4: float
    n1: float
    n2: float

    def label(self) -> str:
        return f"SSPMPRK3({self.eta2:.6g})"


SchemeParams = Union[SSPMPRK2Params, SSPMPRK3Params]


class StepRecord(NamedTuple):
    """Result of one step with its intermediate stages (third-order stages are None for SSPMPRK2)."""
    y_next: np.ndarray
    y1: np.ndarray
    rho: Optional[np.ndarray] = None
    y2: Optional[np.ndarray] = None
    a: Optional[np.ndarray] = None
    sigma: Optional[np.ndarray] = None

    def positive_stages(self) -> List[Tuple[str, np.ndarray]]:
        """Stages that must stay strictly positive; the a-stage is exempt."""
        named = [('y1', self.y1), ('rho', self.rho), ('y2', self.y2),
                 ('sigma', self.sigma), ('y_next', self.y_next)]
        return [(name, v) for name, v in named if v is not None]


def sspmprk2_params(alpha: float, beta: float) -> SSPMPRK2Params:
    """
    Validate (alpha, beta) and derive beta20, beta21 and the stage exponent s.

    Constraints: 0 <= alpha <= 1, beta > 0, alpha*beta + 1/(2 beta) <= 1, and
    alpha*beta < 1 so that s is defined.
    """
    alpha, beta = float(alpha), float(beta)
    if not 0.0 <= alpha <= 1.0:
        raise ParameterError(f"alpha = {alpha:g} violates 0 <= alpha <= 1")
    if not beta > 0.0:
        raise ParameterError(f"beta = {beta:g} violates beta > 0")
    bound = alpha * beta + 1.0 / (2.0 * beta)
    if bound > 1.0 + PARAM_TOL:
        raise ParameterError(f"alpha*beta + 1/(2*beta) = {bound:.6g} violates <= 1")
    if 1.0 - alpha * beta <= 0.0:
        raise ParameterError(f"1 - alpha*beta = {1.0 - alpha * beta:.6g} must be positive")

    beta20 = 1.0 - 1.0 / (2.0 * beta) - alpha * beta
    beta21 = 1.0 / (2.0 * beta)
    s = (alpha * beta * beta - alpha * beta + 1.0) / (beta * (1.0 - alpha * beta))
    return SSPMPRK2Params(alpha, beta, beta20, beta21, s)


def sspmprk3_params(eta2: float, s: float) -> SSPMPRK3Params:
    """
    Load the third-order constant table for a given eta2 in [0, r1].

    Args:
        eta2: free parameter
        s: exponent of the a-stage weights; core.stability.sspmprk3_default
           derives it from the stability function

    Returns:
        SSPMPRK3Params with eta1, eta3, n2 derived.
    """
    eta2 = float(eta2)
    if not 0.0 <= eta2 <= R1:
        raise ParameterError(f"eta2 = {eta2:g} outside [0, {R1}]")

    alpha_sum2 = SSP3_ALPHA20 + SSP3_ALPHA21
    alpha_sum3 = SSP3_ALPHA30 + SSP3_ALPHA31 + SSP3_ALPHA32
    if abs(alpha_sum2 - 1.0) > 1e-13 or abs(alpha_sum3 - 1.0) > 1e-13:
        raise InconsistencyError(f"alpha rows sum to {alpha_sum2!r} and {alpha_sum3!r}, not 1")

    return SSPMPRK3Params(
        eta2=eta2, s=float(s),
        alpha10=SSP3_ALPHA10, alpha20=SSP3_ALPHA20, alpha21=SSP3_ALPHA21,
        alpha30=SSP3_ALPHA30, alpha31=SSP3_ALPHA31, alpha32=SSP3_ALPHA32,
        beta10=SSP3_BETA10, beta20=SSP3_BETA20, beta21=SSP3_BETA21,
        beta30=SSP3_BETA30, beta31=SSP3_BETA31, beta32=SSP3_BETA32,
        zeta=SSP3_ZETA,
        eta1=SSP3_ETA1_OFFSET - eta2,
        eta3=SSP3_ETA3_SLOPE * eta2 + SSP3_ETA3_OFFSET,
        eta4=SSP3_ETA4,
        n1=SSP3_N1, n2=1.0 - SSP3_N1,
    )


def _rates(pds: GeneralPDS, y: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    return pds.production_matrix(y), pds.destruction_matrix(y)


def _patankar_solve(terms: Sequence[Tuple[float, Tuple[np.ndarray, np.ndarray]]],
                    weights: np.ndarray, rhs: np.ndarray, dt: float) -> np.ndarray:
    """
    Solve the modified Patankar system M x = rhs with
    M_ii = 1 + dt * sum_c coef_c * D_i(state_c) / w_i and
    M_ij = -dt * sum_c coef_c * p_ij(state_c) / w_j.

    Column sums of M are 1, hence sum(x) = sum(rhs).

    Solved as B u = rhs with B = M diag(w) and x = w * u. B holds the rates
    themselves, so tiny weights do not push the other pivots under the
    singularity threshold.
    """
    prod = sum(coef * pd[0] for coef, pd in terms)
    dest = sum(coef * pd[1] for coef, pd in terms)
    b = -dt * prod
    np.fill_diagonal(b, weights + dt * dest.sum(axis=1))
    return weights * lu_solve(b, rhs)


def _check_dt(dt: float) -> float:
    dt = float(dt)
    if not dt > 0.0:
        raise ParameterError(f"time step must be positive, got {dt:g}")
    return dt


def sspmprk2_step(pds: GeneralPDS, y, dt: float, p: SSPMPRK2Params) -> StepRecord:
    """One SSPMPRK2(alpha, beta) step from the strictly positive state y."""
    y = as_state(y, pds.n)
    dt = _check_dt(dt)
    rates_y = _rates(pds, y)

    y1 = _patankar_solve([(p.beta, rates_y)], y, y, dt)

    rates_y1 = _rates(pds, y1)
    weights = np.exp((1.0 - p.s) * np.log(y) + p.s * np.log(y1))
    rhs = (1.0 - p.alpha) * y + p.alpha * y1
    y_next = _patankar_solve([(p.beta20, rates_y), (p.beta21, rates_y1)], weights, rhs, dt)

    return StepRecord(y_next=y_next, y1=y1)


def sspmprk3_step(pds: GeneralPDS, y, dt: float, p: SSPMPRK3Params) -> StepRecord:
    """One SSPMPRK3(eta2) step from the strictly positive state y."""
    y = as_state(y, pds.n)
    dt = _check_dt(dt)
    rates_y = _rates(pds, y)

    y1 = _patankar_solve([(p.beta10, rates_y)], y, p.alpha10 * y, dt)
    rates_y1 = _rates(pds, y1)

    rho = p.n1 * y1 + p.n2 * y1 * y1 / y
    y2 = _patankar_solve([(p.beta20, rates_y), (p.beta21, rates_y1)], rho,
                         p.alpha20 * y + p.alpha21 * y1, dt)
    rates_y2 = _rates(pds, y2)

    # the a-stage unknown is a itself, weighted against y^(1-s) * y1^s
    weights = np.exp((1.0 - p.s) * np.log(y) + p.s * np.log(y1))
    a = _patankar_solve([(p.eta3, rates_y), (p.eta4, rates_y1)], weights,
                        p.eta1 * y + p.eta2 * y1, dt)

    sigma = a + p.zeta * y * y2 / rho
    if np.any(sigma <= 0.0):
        i = int(np.argmin(sigma))
        raise StageGuardError(f"sigma[{i}] = {sigma[i]:.6g} is not positive (dt = {dt:g})")

    y_next = _patankar_solve(
        [(p.beta30, rates_y), (p.beta31, rates_y1), (p.beta32, rates_y2)], sigma,
        p.alpha30 * y + p.alpha31 * y1 + p.alpha32 * y2, dt)

    return StepRecord(y_next=y_next, y1=y1, rho=rho, y2=y2, a=a, sigma=sigma)


def step(pds: GeneralPDS, y, dt: float, params: SchemeParams) -> StepRecord:
    """Dispatch on the parameter type."""
    if isinstance(params, SSPMPRK2Params):
        return sspmprk2_step(pds, y, dt, params)
    if isinstance(params, SSPMPRK3Params):
        return sspmprk3_step(pds, y, dt, params)
    raise ParameterError(f"unknown scheme parameters {type(params).__name__}")


def one_step_map(pds: GeneralPDS, dt: float, params: SchemeParams) -> Callable[[np.ndarray], np.ndarray]:
    """The map y -> y_next for fixed dt, as used by the Jacobian checks."""

    def g(y):
        return step(pds, y, dt, params).y_next

    return g


def integrate(pds: GeneralPDS, params: SchemeParams, y0, dt: float, n_steps: int) -> np.ndarray:
    """
    Apply the scheme n_steps times.

    Returns:
        Array of shape (n_steps + 1, N); row 0 is y0.
    """
    y = as_state(y0, pds.n)
    if n_steps < 0:
        raise ParameterError(f"n_steps must be >= 0, got {n_steps}")
    trajectory = np.empty((n_steps + 1, pds.n))
    trajectory[0] = y
    for k in range(n_steps):
        y = step(pds, y, dt, params).y_next
        trajectory[k + 1] = y
    return trajectory


def steps_to_tolerance(pds: GeneralPDS, params: SchemeParams, y0, dt: float, y_star,
                       eps: float = 2e-2, cap: int = 10 ** 6) -> Optional[int]:
    """
    Smallest n with ||y^n - y*||_2 < eps.

    Returns:
        The step count N_T, or None when cap steps are exceeded.
    """
    y = as_state(y0, pds.n)
    y_star = np.asarray(y_star, dtype=float)
    for n in range(cap + 1):
        if norm2(y - y_star) < eps:
            return n
        if n < cap:
            y = step(pds, y, dt, params).y_next
    logger.warning(f"{params.label()} did not reach eps = {eps:g} within {cap} steps (dt = {dt:g})")
    return None
