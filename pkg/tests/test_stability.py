import numpy as np
import pytest

from core.benchmark_problems import Z1, Z2, Z3, Z4
from core.errors import ParameterError, PoleError, UndefinedLimitError
from core.schemes import R1, sspmprk2_params
from core.stability import (
    StabilityClass,
    alpha_critical,
    alpha_upper_bound,
    classify_sspmprk2,
    derive_s,
    imag_axis_margin,
    parameter_plane,
    r2,
    r2_limit,
    r2_unsimplified,
    r3,
    r3_coeffs,
    r3_imag_axis_coeffs,
    region_scan,
    scan_to_frame,
    solve_s_at,
    sspmprk3_default,
    stability_function,
)

ETA2_VALUES = [0.0, 1.0 / 3.0, R1]


def test_r2_at_origin_and_pole():
    assert r2(0.0, 0.5, 1.0) == pytest.approx(1.0)
    assert r2(0.0, 0.2, 3.0) == pytest.approx(1.0)
    with pytest.raises(PoleError):
        r2(1.0, 0.5, 1.0)


def test_r2_vectorized_matches_unsimplified():
    rng = np.random.default_rng(5)
    z = rng.uniform(-20.0, 0.0, 50) + 1j * rng.uniform(-10.0, 10.0, 50)
    for alpha, beta in [(0.5, 1.0), (0.1, 1.0), (0.2, 3.0), (0.0, 0.5), (0.24, 3.5)]:
        np.testing.assert_allclose(r2(z, alpha, beta), r2_unsimplified(z, sspmprk2_params(alpha, beta)),
                                   rtol=1e-10)


@pytest.mark.parametrize('alpha,beta,expected', [
    (0.2, 3.0, -3.4 / 2.4),
    (0.24, 3.0, -3.88 / 1.68),
    (0.2, 3.5, -4.5 / 2.1),
    (0.24, 3.5, -5.2 / 1.12),
    (0.1, 1.0, -1.0 / 1.8),
    (0.5, 1.0, -1.0),
])
def test_r2_limit(alpha, beta, expected):
    assert r2_limit(alpha, beta) == pytest.approx(expected)
    assert r2(-1e8, alpha, beta).real == pytest.approx(expected, rel=1e-6)


def test_r2_limit_undefined():
    with pytest.raises(UndefinedLimitError):
        r2_limit(1.0, 1.0)


def test_limit_grows_along_the_bounded_corners():
    corners = [(0.2, 3.0), (0.2, 3.5), (0.24, 3.0), (0.24, 3.5)]
    magnitudes = [abs(r2_limit(a, b)) for a, b in corners]
    assert all(m > 1.0 for m in magnitudes)
    assert magnitudes[-1] == max(magnitudes)


@pytest.mark.parametrize('alpha,beta,expected', [
    (0.2, 3.0, StabilityClass.BOUNDED_REGION),
    (0.24, 3.5, StabilityClass.BOUNDED_REGION),
    (0.1, 1.0, StabilityClass.UNCONDITIONAL_STRICT),
    (0.5, 1.0, StabilityClass.UNCONDITIONAL_MARGINAL_AXIS),
    (0.0, 0.5, StabilityClass.UNCONDITIONAL_MARGINAL_AXIS),
    (0.25, 2.0, StabilityClass.UNCONDITIONAL_MARGINAL_AXIS),
])
def test_classify_sspmprk2(alpha, beta, expected):
    assert classify_sspmprk2(alpha, beta) is expected


def test_classify_rejects_inadmissible_pairs():
    with pytest.raises(ParameterError):
        classify_sspmprk2(0.6, 1.0)


def test_parameter_curves():
    assert alpha_critical(3.0) == pytest.approx(1.0 / 6.0)
    assert alpha_upper_bound(1.0) == pytest.approx(0.5)
    # the upper bound touches the critical line at beta = 1
    assert alpha_upper_bound(1.0) == pytest.approx(alpha_critical(1.0))


def test_imag_axis_margin_agrees_with_r2():
    rng = np.random.default_rng(17)
    checked = 0
    for _ in range(100):
        beta = rng.uniform(0.5, 5.0)
        alpha = rng.uniform(0.0, alpha_upper_bound(beta))
        b = rng.uniform(-10.0, 10.0)
        excess = abs(r2(1j * b, alpha, beta)) ** 2 - 1.0
        if abs(excess) <= 1e-12:
            continue
        assert np.sign(excess) == np.sign(imag_axis_margin(b, alpha, beta))
        checked += 1
    assert checked > 90


def test_r2_at_calibration_targets():
    # stable targets inside, unstable ones outside the SSPMPRK2(0.2, 3) region
    assert abs(r2(Z1, 0.2, 3.0)) == pytest.approx(1.011171, abs=1e-6)
    assert abs(r2(Z2, 0.2, 3.0)) == pytest.approx(0.981005, abs=1e-6)
    assert abs(r2(Z3, 0.2, 3.0)) == pytest.approx(1.015693, abs=1e-6)
    assert abs(r2(Z4, 0.2, 3.0)) == pytest.approx(0.987047, abs=1e-6)


@pytest.mark.parametrize('eta2', ETA2_VALUES)
def test_r3_coefficients(eta2):
    c = r3_coeffs(eta2)
    assert c.b0 == 1.0
    assert c.a0 == pytest.approx(1.0, abs=1e-12)
    assert c.a0 > 0 and c.a1 < 0 and c.a2 > 0 and c.a3 > 0 and c.a4 < 0
    assert c.b1 < 0 and c.b2 > 0 and c.b3 < 0 and c.b4 > 0


@pytest.mark.parametrize('eta2', ETA2_VALUES)
def test_r3_imag_axis_coefficients(eta2):
    c = r3_imag_axis_coeffs(eta2)
    assert c.const == pytest.approx(0.0, abs=1e-11)
    assert c.c4 < 0 and c.c6 < 0 and c.c8 < 0


def test_r3_coeffs_range():
    with pytest.raises(ParameterError):
        r3_coeffs(0.5)


@pytest.mark.parametrize('eta2,expected', [
    (0.0, 5.61350654964876),
    (1.0 / 3.0, 5.72893419830431),
    (R1, 5.74464998562258),
])
def test_derive_s(eta2, expected):
    assert derive_s(eta2) == pytest.approx(expected, abs=1e-6)
    assert solve_s_at(eta2, -3.0) == pytest.approx(derive_s(eta2), rel=1e-8)


@pytest.mark.parametrize('eta2', ETA2_VALUES)
def test_nested_r3_matches_coefficient_form(eta2):
    p = sspmprk3_default(eta2)
    coeffs = r3_coeffs(eta2)
    rng = np.random.default_rng(23)
    z = rng.uniform(-30.0, 0.0, 40) + 1j * rng.uniform(-10.0, 10.0, 40)
    np.testing.assert_allclose(r3(z, p), coeffs.ratio(z), rtol=1e-8, atol=1e-9)
    assert r3(0.0, p) == pytest.approx(1.0)


def test_region_scan_of_bounded_region():
    p = sspmprk2_params(0.2, 3.0)
    scan = region_scan(p, re_range=(-15.0, 0.0), im_range=(-8.0, 8.0), nx=61, ny=97)
    assert scan.magnitudes.shape == (97, 61)
    assert scan.label == 'SSPMPRK2(0.2,3)'
    assert abs(int(scan.inside.sum()) - 2680) <= 3

    for z, expected in [(Z1, False), (Z2, True), (Z3, False), (Z4, True)]:
        col = int(np.argmin(np.abs(scan.re_values - z.real)))
        row = int(np.argmin(np.abs(scan.im_values - z.imag)))
        assert bool(scan.inside[row, col]) is expected


def test_region_scan_smaller_for_larger_parameters():
    grid = dict(re_range=(-15.0, 0.0), im_range=(-8.0, 8.0), nx=61, ny=97)
    small = region_scan(sspmprk2_params(0.24, 3.5), **grid)
    large = region_scan(sspmprk2_params(0.2, 3.0), **grid)
    assert abs(int(small.inside.sum()) - 218) <= 3
    assert small.inside.sum() < large.inside.sum()


def test_region_scan_strict_parameters_cover_grid():
    scan = region_scan(sspmprk2_params(0.1, 1.0), re_range=(-15.0, 0.0), im_range=(-8.0, 8.0),
                       nx=61, ny=97)
    # the imaginary-axis column is marginal up to rounding
    assert scan.inside[:, :-1].all()


def test_region_scan_frame_and_errors():
    scan = region_scan(sspmprk3_default(1.0 / 3.0), nx=5, ny=4)
    df = scan_to_frame(scan)
    assert list(df.columns) == ['re', 'im', 'abs_r', 'inside']
    assert len(df) == 20
    assert set(df['inside'].unique()) <= {0, 1}
    with pytest.raises(ParameterError):
        region_scan(sspmprk2_params(0.5, 1.0), nx=1, ny=10)
    with pytest.raises(ParameterError):
        stability_function(object())


def test_parameter_plane():
    df = parameter_plane(beta_max=5.0, n=10)
    assert list(df.columns) == ['beta', 'alpha_upper', 'alpha_critical']
    assert df['beta'].iloc[0] == pytest.approx(0.5)
    assert df['alpha_upper'].iloc[0] == pytest.approx(0.0)
    assert df['alpha_critical'].iloc[0] == pytest.approx(1.0)
    assert (df['alpha_upper'] <= 1.0).all()
    with pytest.raises(ParameterError):
        parameter_plane(beta_max=0.4)


def _random_pairs(rng, count):
    beta = rng.uniform(0.5, 5.0, count)
    alpha = rng.uniform(0.0, 1.0, count) * np.minimum(1.0, [alpha_upper_bound(b) for b in beta])
    return alpha, beta


def test_r2_is_one_at_origin_for_random_pairs():
    alpha, beta = _random_pairs(np.random.default_rng(31), 100)
    for a, b in zip(alpha, beta):
        assert r2(0.0, a, b) == 1.0


def test_imag_axis_margin_sign_on_many_samples():
    rng = np.random.default_rng(37)
    alpha, beta = _random_pairs(rng, 10 ** 4)
    b = rng.uniform(-10.0, 10.0, 10 ** 4)
    excess = np.abs(r2(1j * b, alpha, beta)) ** 2 - 1.0
    margin = imag_axis_margin(b, alpha, beta)
    decided = np.abs(excess) > 1e-12
    assert decided.sum() > 9000
    assert np.array_equal(np.sign(excess[decided]), np.sign(margin[decided]))


@pytest.mark.parametrize('eta2', ETA2_VALUES)
def test_r3_below_one_on_imaginary_axis(eta2):
    y = np.logspace(-2.0, 3.0, 400)
    p = sspmprk3_default(eta2)
    assert np.all(np.abs(r3(1j * y, p)) < 1.0)
    assert np.all(np.abs(r3(-1j * y, p)) < 1.0)


def test_conjugate_symmetry():
    rng = np.random.default_rng(41)
    z = rng.uniform(-50.0, 0.0, 200) + 1j * rng.uniform(-20.0, 20.0, 200)
    for alpha, beta in [(0.2, 3.0), (0.1, 1.0), (0.0, 0.5)]:
        np.testing.assert_allclose(r2(np.conj(z), alpha, beta), np.conj(r2(z, alpha, beta)), rtol=1e-14)
    for eta2 in ETA2_VALUES:
        p = sspmprk3_default(eta2)
        np.testing.assert_allclose(r3(np.conj(z), p), np.conj(r3(z, p)), rtol=1e-14)


@pytest.mark.parametrize('beta', [0.75, 1.0, 2.0, 3.0, 3.5, 5.0])
def test_r2_limit_decreases_in_alpha(beta):
    alphas = np.linspace(0.0, min(1.0, alpha_upper_bound(beta)), 20)
    limits = np.array([r2_limit(a, beta) for a in alphas])
    assert np.all(np.diff(limits) < 0.0)


@pytest.mark.parametrize('alpha,beta', [(0.1, 1.0), (0.0, 1.0), (0.1, 2.0), (0.05, 3.5), (0.0, 0.5)])
def test_unconditional_pairs_have_no_unstable_point(alpha, beta):
    assert classify_sspmprk2(alpha, beta) is not StabilityClass.BOUNDED_REGION
    scan = region_scan(sspmprk2_params(alpha, beta), re_range=(-1e4, 0.0), im_range=(-1e3, 1e3),
                       nx=401, ny=401)
    # the imaginary-axis column is |R| = 1 up to rounding for the marginal pair
    assert np.all(scan.magnitudes <= 1.0 + 1e-12)
    assert np.all(scan.magnitudes[:, :-1] < 1.0)
