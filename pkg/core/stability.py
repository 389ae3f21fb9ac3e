"""
Stability functions of the SSPMPRK schemes.

R(z) maps an eigenvalue lambda of the linear system matrix to the eigenvalue
R(dt*lambda) of the one-step map's Jacobian at a steady state. This module
evaluates R for both schemes, classifies the second-order parameter plane,
scans stability regions on rectangular grids and recovers the third-order
a-stage exponent s from the closed-form coefficient representation.
"""

import functools
import logging
from enum import Enum
from typing import Callable, NamedTuple, Optional, Tuple, Union

import numpy as np
import pandas as pd

from core.errors import (
    InconsistencyError,
    ParameterError,
    PoleError,
    UndefinedLimitError,
)
from core.schemes import (
    R1,
    SSPMPRK2Params,
    SSPMPRK3Params,
    SchemeParams,
    sspmprk2_params,
    sspmprk3_params,
)

logger = logging.getLogger(__name__)

TIE_TOL = 1e-14
DERIVE_S_TOL = 1e-9
DERIVE_S_SAMPLE = -1.0
DERIVE_S_CHECKPOINTS = (-0.1, -0.5, -2.0, -5.0, -20.0, -100.0,
                        -1.0 + 1.0j, -3.0 + 4.0j, -5.0 + 1.0j, -1.0 - 3.0j)

DEFAULT_RE_RANGE = (-15.0, 0.5)
DEFAULT_IM_RANGE = (-8.0, 8.0)
DEFAULT_RESOLUTION = 600

Complex = Union[complex, np.ndarray]


class StabilityClass(Enum):
    BOUNDED_REGION = 'BoundedRegion'
    UNCONDITIONAL_STRICT = 'UnconditionalStrict'
    UNCONDITIONAL_MARGINAL_AXIS = 'UnconditionalMarginalAxis'


class R3Coefficients(NamedTuple):
    """R3(z) = (a0 + a1 z + ... + a4 z^4) / (b0 + b1 z + ... + b4 z^4)."""
    a0: float
    a1: float
    a2: float
    a3: float
    a4: float
    b0: float
    b1: float
    b2: float
    b3: float
    b4: float

    def numerator(self, z: Complex) -> Complex:
        return np.polyval([self.a4, self.a3, self.a2, self.a1, self.a0], z)

    def denominator(self, z: Complex) -> Complex:
        return np.polyval([self.b4, self.b3, self.b2, self.b1, self.b0], z)

    def ratio(self, z: Complex) -> Complex:
        return self.numerator(z) / self.denominator(z)


class ImagAxisCoefficients(NamedTuple):
    """|N(iy)|^2 - |D(iy)|^2 = const + c2 y^2 + c4 y^4 + c6 y^6 + c8 y^8."""
    const: float
    c2: float
    c4: float
    c6: float
    c8: float


class StabilityScan(NamedTuple):
    """|R| on a grid; rows follow im_values, columns follow re_values."""
    label: str
    re_values: np.ndarray
    im_values: np.ndarray
    magnitudes: np.ndarray
    inside: np.ndarray


def _scalar_or_array(value, z):
    return complex(value) if np.ndim(z) == 0 else value


def _check_poles(z, denominators, name: str) -> None:
    if np.ndim(z) == 0 and any(d == 0 for d in denominators):
        raise PoleError(f"{name} has a pole at z = {complex(z)}")


def r2(z: Complex, alpha: float, beta: float) -> Complex:
    """Closed-form second-order stability function."""
    z = np.asarray(z, dtype=complex)
    ab = alpha * beta
    num = -2.0 + (2.0 * ab * beta - 2.0 * ab + 1.0) * z * z - 2.0 * beta * (alpha - 1.0) * z
    d1 = 1.0 + (ab - 1.0) * z
    d2 = beta * z - 1.0
    _check_poles(z, (d1, d2), 'R2')
    with np.errstate(divide='ignore', invalid='ignore'):
        value = num / (2.0 * d1 * d2)
    return _scalar_or_array(value, z)


def r2_unsimplified(z: Complex, p: SSPMPRK2Params) -> Complex:
    """Second-order stability function as the resolvent combination before simplification."""
    z = np.asarray(z, dtype=complex)
    one_minus_ab = 1.0 - p.alpha * p.beta
    d_inner = 1.0 - p.beta * z
    d_outer = 1.0 - one_minus_ab * z
    _check_poles(z, (d_inner, d_outer), 'R2')
    with np.errstate(divide='ignore', invalid='ignore'):
        inner = (p.alpha + z * (-p.s * one_minus_ab + p.beta21)) / d_inner
        value = (1.0 - p.alpha + z * ((p.s - 1.0) * one_minus_ab + p.beta20) + inner) / d_outer
    return _scalar_or_array(value, z)


def r2_limit(alpha: float, beta: float) -> float:
    """lim R2(z) as z -> -infinity."""
    ab = alpha * beta
    if abs(ab - 1.0) <= TIE_TOL:
        raise UndefinedLimitError(f"limit undefined for alpha*beta = 1 (alpha={alpha:g}, beta={beta:g})")
    return (2.0 * ab * beta - 2.0 * ab + 1.0) / (2.0 * beta * (ab - 1.0))


def alpha_critical(beta: float) -> float:
    """alpha = 1/(2 beta) separates bounded from unbounded stability regions."""
    return 1.0 / (2.0 * beta)


def alpha_upper_bound(beta: float) -> float:
    """Largest admissible alpha for a given beta, from alpha*beta + 1/(2 beta) = 1."""
    return (1.0 - 1.0 / (2.0 * beta)) / beta


def classify_sspmprk2(alpha: float, beta: float) -> StabilityClass:
    """
    Classify (alpha, beta) by the shape of {z in C- : |R2(z)| <= 1}.

    Raises:
        ParameterError: when (alpha, beta) is not admissible.
    """
    sspmprk2_params(alpha, beta)
    if abs(alpha) <= TIE_TOL and abs(beta - 0.5) <= TIE_TOL:
        return StabilityClass.UNCONDITIONAL_MARGINAL_AXIS
    gap = alpha - alpha_critical(beta)
    if abs(gap) <= TIE_TOL:
        return StabilityClass.UNCONDITIONAL_MARGINAL_AXIS
    if gap > 0:
        return StabilityClass.BOUNDED_REGION
    return StabilityClass.UNCONDITIONAL_STRICT


def imag_axis_margin(b: float, alpha: float, beta: float) -> float:
    """
    Numerator minus denominator of |R2(ib)|^2; its sign is the sign of |R2(ib)| - 1.
    """
    ab = alpha * beta
    return -(2.0 * ab - 2.0 * beta - 1.0) * (2.0 * ab - 1.0) * (2.0 * beta - 1.0) * b ** 4


def r3(z: Complex, p: SSPMPRK3Params) -> Complex:
    """Nested evaluation of the third-order stability function."""
    z = np.asarray(z, dtype=complex)
    b2sum = p.beta20 + p.beta21
    e34 = p.eta3 + p.eta4
    b3sum = p.beta30 + p.beta31 + p.beta32
    e12 = p.eta1 + p.eta2
    d1 = 1.0 - p.beta10 * z
    d2 = 1.0 - b2sum * z
    d3 = 1.0 - e34 * z
    d4 = 1.0 - b3sum * z
    _check_poles(z, (d1, d2, d3, d4), 'R3')

    with np.errstate(divide='ignore', invalid='ignore'):
        # linearized rho stage relative to the perturbation of y
        q = -p.n2 + (p.n1 + 2.0 * p.n2) / d1
        stage2 = (p.alpha20 + p.beta20 * z + (p.alpha21 + p.beta21 * z) / d1 - b2sum * z * q) / d2
        a_stage = (p.eta1 + e12 * z * ((p.s - 1.0) * e34 + p.eta3)
                   + (p.eta2 + e12 * z * (-p.s * e34 + p.eta4)) / d1) / d3
        top = (p.alpha30 + p.beta30 * z + (p.alpha31 + p.beta31 * z) / d1
               + (p.alpha32 + p.beta32 * z) * stage2
               - z * b3sum * (p.zeta + p.zeta * stage2 - p.zeta * q + a_stage))
        value = top / d4
    return _scalar_or_array(value, z)


def r3_coeffs(eta2: float) -> R3Coefficients:
    """Closed-form numerator and denominator coefficients of R3 as functions of eta2."""
    e = float(eta2)
    if not 0.0 <= e <= R1:
        raise ParameterError(f"eta2 = {e:g} outside [0, {R1}]")
    d = 0.47620819268131703 * e - 1.0537480911094114871
    return R3Coefficients(
        a0=(0.47620819268131705757 * e - 1.0537480911094115481) / d,
        a1=(-3.1507612671062001337 * e + 3.9798736646158920698 + 0.61107641837494959323 * e * e) / d,
        a2=(2.4343280828365809236 * e - 2.5818776483048969774 - 0.57282016379130601724 * e * e) / d,
        a3=(0.6548068883713070549 * e - 0.81603432814746304744 - 0.1292603911580354457 * e * e) / d,
        a4=(-0.59574557514538034065 * e + 0.64052974630005292675 + 0.13841284380675759373 * e * e) / d,
        b0=1.0,
        b1=-4.7768739020212929733 + 1.2832127371313151768 * e,
        b2=6.7270587897458664634 - 2.4860903284764154151 * e,
        b3=-3.7332290665687486456 + 1.5730472371819288192 * e,
        b4=0.71670702950202557447 - 0.32389312216150656421 * e,
    )


def r3_imag_axis_coeffs(eta2: float) -> ImagAxisCoefficients:
    """Even polynomial in y whose sign decides |R3(iy)| < 1."""
    c = r3_coeffs(eta2)
    return ImagAxisCoefficients(
        const=c.a0 * c.a0 - 1.0,
        c2=-2 * c.a0 * c.a2 + c.a1 ** 2 - c.b1 ** 2 + 2 * c.b2,
        c4=2 * c.a0 * c.a4 - 2 * c.a1 * c.a3 + c.a2 ** 2 + 2 * c.b1 * c.b3 - c.b2 ** 2 - 2 * c.b4,
        c6=-2 * c.a2 * c.a4 + c.a3 ** 2 + 2 * c.b2 * c.b4 - c.b3 ** 2,
        c8=c.a4 ** 2 - c.b4 ** 2,
    )


def solve_s_at(eta2: float, z: complex) -> float:
    """The unique s making the nested R3 equal the coefficient ratio at z (R3 is affine in s)."""
    base = sspmprk3_params(eta2, s=0.0)
    target = r3_coeffs(eta2).ratio(z)
    at0 = r3(z, base)
    at1 = r3(z, base._replace(s=1.0))
    return float(((target - at0) / (at1 - at0)).real)


@functools.lru_cache(maxsize=64)
def derive_s(eta2: float) -> float:
    """
    Recover the a-stage exponent s for SSPMPRK3(eta2).

    Solves at z = -1 and then checks the nested form against the coefficient
    ratio at ten further points.

    Raises:
        InconsistencyError: when any checkpoint disagrees beyond 1e-9 relative.
    """
    s = solve_s_at(eta2, DERIVE_S_SAMPLE)
    p = sspmprk3_params(eta2, s=s)
    coeffs = r3_coeffs(eta2)
    for z in DERIVE_S_CHECKPOINTS:
        nested = r3(z, p)
        ratio = complex(coeffs.ratio(z))
        if abs(nested - ratio) > DERIVE_S_TOL * (1.0 + abs(ratio)):
            raise InconsistencyError(
                f"R3 forms disagree at z = {z}: nested {nested:.12g}, ratio {ratio:.12g} (s = {s:.12g})")
    logger.info(f"Derived a-stage exponent s = {s:.15g} for eta2 = {eta2:.15g}")
    return s


def sspmprk3_default(eta2: float, s: Optional[float] = None) -> SSPMPRK3Params:
    """SSPMPRK3(eta2) with s from derive_s unless given."""
    return sspmprk3_params(eta2, derive_s(float(eta2)) if s is None else s)


def stability_function(params: SchemeParams) -> Callable[[Complex], Complex]:
    """R for the given scheme parameters, accepting scalars or arrays."""
    if isinstance(params, SSPMPRK2Params):
        return lambda z: r2(z, params.alpha, params.beta)
    if isinstance(params, SSPMPRK3Params):
        return lambda z: r3(z, params)
    raise ParameterError(f"unknown scheme parameters {type(params).__name__}")


def region_scan(params: SchemeParams, re_range: Tuple[float, float] = DEFAULT_RE_RANGE,
                im_range: Tuple[float, float] = DEFAULT_IM_RANGE,
                nx: int = DEFAULT_RESOLUTION, ny: int = DEFAULT_RESOLUTION) -> StabilityScan:
    """
    Evaluate |R(z)| on an nx x ny grid over the rectangle. Poles get magnitude +inf.

    Args:
        params: SSPMPRK2Params or SSPMPRK3Params
        re_range: (min, max) of Re z
        im_range: (min, max) of Im z
        nx, ny: grid counts, at least 2 each
    """
    if nx < 2 or ny < 2:
        raise ParameterError(f"grid needs at least 2x2 points, got {nx}x{ny}")
    re_values = np.linspace(re_range[0], re_range[1], nx)
    im_values = np.linspace(im_range[0], im_range[1], ny)
    grid = re_values[np.newaxis, :] + 1j * im_values[:, np.newaxis]

    magnitudes = np.abs(stability_function(params)(grid))
    magnitudes[~np.isfinite(magnitudes)] = np.inf
    logger.debug(f"Scanned {params.label()} on {nx}x{ny} grid")
    return StabilityScan(params.label(), re_values, im_values, magnitudes, magnitudes <= 1.0)


def scan_to_frame(scan: StabilityScan) -> pd.DataFrame:
    """One row per grid point with columns re, im, abs_r, inside."""
    re_grid, im_grid = np.meshgrid(scan.re_values, scan.im_values)
    return pd.DataFrame({
        're': re_grid.ravel(),
        'im': im_grid.ravel(),
        'abs_r': scan.magnitudes.ravel(),
        'inside': scan.inside.ravel().astype(int),
    })


def parameter_plane(beta_max: float = 5.0, n: int = 200) -> pd.DataFrame:
    """
    Boundary curves of the (beta, alpha) plane: the admissible upper bound and the
    critical line alpha = 1/(2 beta), for beta in [1/2, beta_max].
    """
    if beta_max <= 0.5 or n < 2:
        raise ParameterError(f"need beta_max > 0.5 and n >= 2, got {beta_max:g}, {n}")
    betas = np.linspace(0.5, beta_max, n)
    return pd.DataFrame({
        'beta': betas,
        'alpha_upper': np.minimum(1.0, [alpha_upper_bound(b) for b in betas]),
        'alpha_critical': np.minimum(1.0, [alpha_critical(b) for b in betas]),
    })
