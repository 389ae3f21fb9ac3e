"""Randomized positivity and conservation checks over random linear systems."""

import numpy as np
import pytest

from core.benchmark_problems import get_problem, problem_ids
from core.pds_core import LinearPDS, pds_from_matrix
from core.schemes import R1, sspmprk2_params, step
from core.stability import alpha_upper_bound, sspmprk3_default

N_CASES = 500


def _random_system(rng):
    n = int(rng.integers(2, 7))
    off = rng.uniform(0.0, 1.0, size=(n, n)) * (rng.uniform(size=(n, n)) < 0.7)
    np.fill_diagonal(off, 0.0)
    a = off - np.diag(off.sum(axis=0))
    return LinearPDS.from_matrix(a)


def _cases(seed, make_params):
    rng = np.random.default_rng(seed)
    for _ in range(N_CASES):
        system = _random_system(rng)
        y0 = rng.uniform(0.5, 2.0, size=system.n)
        dt = 10.0 ** rng.uniform(-3.0, 3.0)
        yield system, y0, dt, make_params(rng)


def _check(system, y0, dt, params):
    record = step(pds_from_matrix(system), y0, dt, params)
    for name, stage in record.positive_stages():
        assert np.all(stage > 0.0), f"{name} not positive for {params.label()}, dt = {dt:g}"
    for v in system.invariant_basis:
        scale = np.abs(v) @ y0
        assert abs(v @ record.y_next - v @ y0) <= 1e-11 * scale


def test_sspmprk2_random_cases():
    def make(rng):
        beta = rng.uniform(0.5, 4.0)
        return sspmprk2_params(rng.uniform(0.0, min(1.0, alpha_upper_bound(beta))), beta)

    for case in _cases(2024, make):
        _check(*case)


def test_sspmprk3_random_cases():
    def make(rng):
        return sspmprk3_default(rng.uniform(0.0, R1))

    for case in _cases(4048, make):
        _check(*case)


@pytest.mark.parametrize('pid', problem_ids())
@pytest.mark.parametrize('params', [sspmprk2_params(0.5, 1.0), sspmprk2_params(0.2, 3.0),
                                    sspmprk3_default(1.0 / 3.0)])
def test_kernel_vectors_are_fixed(pid, params):
    problem = get_problem(pid)
    pds = pds_from_matrix(problem.system)
    for dt in (1e-3, 1.0, 5.0):
        np.testing.assert_allclose(step(pds, problem.y_star, dt, params).y_next, problem.y_star, rtol=1e-11)
