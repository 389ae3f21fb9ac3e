#!/usr/bin/env python3
"""
Command-line front end for the SSPMPRK experiments on the linear benchmark problems.

Subcommands:
    integrate        integrate one problem and write the trajectory CSV
    ntable           steps N_T until ||y^n - y*||_2 < eps, per scheme and problem
    region           export a stability-region scan with a plotting script
    classify         classify SSPMPRK2(alpha, beta) by its stability region
    jacobian-check   Jacobian eigenvalues at y* against R(dt*lambda)
    order            observed convergence orders against the exact solution
    demo-divergence  perturbed start at an unstable step size
    param-plane      boundary curves of the (beta, alpha) parameter plane

Usage:
    python -m core.experiments ntable --dt 5
    python -m core.experiments demo-divergence --problem real3 --scheme sspmprk2 --alpha 0.2 --beta 3
    python -m core.experiments integrate --matrix "-1 1; 1 -1" --y0 "1 2" --dt 1
"""

import argparse
import logging
import math
import sys
from fractions import Fraction
from pathlib import Path
from typing import List, NamedTuple, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd

from core.benchmark_problems import (
    Z1,
    Z2,
    Z3,
    Z4,
    TestProblem,
    exact_solution,
    get_problem,
    matrix_problem,
    problem_ids,
)
from core.errors import (
    CalibrationError,
    ContractViolationError,
    DimensionError,
    DomainError,
    ParameterError,
    PDSError,
    UnknownProblemError,
    ValidationError,
)
from core.dense_linalg import norm2
from core.pds_core import as_state, parse_matrix, parse_vector, pds_from_matrix
from core.schemes import (
    SSPMPRK2Params,
    SchemeParams,
    one_step_map,
    sspmprk2_params,
    step,
    steps_to_tolerance,
)
from core.stability import (
    alpha_critical,
    classify_sspmprk2,
    parameter_plane,
    r2_limit,
    region_scan,
    scan_to_frame,
    sspmprk3_default,
    stability_function,
)
from core.verification import (
    analytic_jacobian_sspmprk2,
    eigenvalue_transfer_error,
    jacobian_report,
    stability_verdict,
)

logger = logging.getLogger(__name__)

DEFAULT_EPS = 2e-2
DEFAULT_DT = 5.0
DEFAULT_TOL = 1e-10
DEFAULT_PERTURBATION = 1e-5
DIVERGENCE_FACTOR = 10.0
DIVERGENCE_CAP = 10 ** 6
ORTHOGONALITY_TOL = 1e-10
FLOAT_FORMAT = '%.17g'

EXIT_OK = 0
EXIT_CONTRACT = 1
EXIT_USAGE = 2

SCHEMES = ('sspmprk2', 'sspmprk3')
NAMED_TARGETS = {'z1': Z1, 'z2': Z2, 'z3': Z3, 'z4': Z4}
DEFAULT_NTABLE_SCHEMES = ('sspmprk3:1/3', 'sspmprk2:0.1,1', 'sspmprk2:0.5,1')


class ExperimentConfig(NamedTuple):
    problem: Union[str, TestProblem]
    scheme: str = 'sspmprk3'
    alpha: float = 0.5
    beta: float = 1.0
    eta2: float = 1.0 / 3.0
    s: Optional[float] = None
    dt: Optional[float] = None
    target_z: Optional[complex] = None
    steps: Optional[int] = None
    eps: float = DEFAULT_EPS
    perturbation: float = 0.0
    perturbation_vector: Optional[np.ndarray] = None
    cap: int = DIVERGENCE_CAP
    output: Optional[Path] = None


class ExperimentReport(NamedTuple):
    problem: str
    scheme: str
    dt: float
    steps_taken: int
    n_t: Optional[int]
    diverged: bool
    divergence_step: Optional[int]
    final_state: np.ndarray
    max_invariant_drift: float
    min_component: float
    output: Optional[Path]


def resolve_problem(problem: Union[str, TestProblem]) -> TestProblem:
    """Registry id or an already built problem, such as one from matrix_problem."""
    return problem if isinstance(problem, TestProblem) else get_problem(problem)


def perturbation_direction(cfg: ExperimentConfig, problem: TestProblem) -> np.ndarray:
    """
    The v of a perturbed start y* + m*v: cfg.perturbation_vector, or the problem's
    own direction. v must be orthogonal to every invariant.
    """
    if cfg.perturbation_vector is None:
        v = np.asarray(problem.perturbation, dtype=float)
    else:
        v = np.asarray(cfg.perturbation_vector, dtype=float)
    if v.shape != (problem.n,):
        raise DimensionError(f"perturbation vector has shape {v.shape}, problem has {problem.n} components")
    if not np.any(v):
        raise ParameterError(f"no nonzero perturbation direction for problem {problem.id!r}")
    for k, inv in enumerate(problem.invariants):
        overlap = float(inv @ v)
        if abs(overlap) > ORTHOGONALITY_TOL * norm2(inv) * norm2(v):
            raise ParameterError(f"perturbation vector is not orthogonal to invariant {k + 1}: n^T v = {overlap:.6g}")
    return v


def check_config(cfg: ExperimentConfig) -> None:
    """Reject inconsistent configurations before any work is done."""
    problem = resolve_problem(cfg.problem)
    if cfg.scheme not in SCHEMES:
        raise ParameterError(f"unknown scheme {cfg.scheme!r}; choose from {', '.join(SCHEMES)}")
    if (cfg.dt is None) == (cfg.target_z is None):
        raise ParameterError("give exactly one of dt and target z")
    if cfg.dt is not None and not cfg.dt > 0:
        raise ParameterError(f"dt must be positive, got {cfg.dt:g}")
    if cfg.perturbation < 0:
        raise ParameterError(f"perturbation magnitude must be >= 0, got {cfg.perturbation:g}")
    if cfg.steps is not None and cfg.steps < 0:
        raise ParameterError(f"steps must be >= 0, got {cfg.steps}")
    if not cfg.eps > 0:
        raise ParameterError(f"tolerance must be positive, got {cfg.eps:g}")
    if cfg.perturbation > 0 or cfg.perturbation_vector is not None:
        perturbation_direction(cfg, problem)


def scheme_params(cfg: ExperimentConfig) -> SchemeParams:
    if cfg.scheme == 'sspmprk2':
        return sspmprk2_params(cfg.alpha, cfg.beta)
    params = sspmprk3_default(cfg.eta2, cfg.s)
    if cfg.s is None:
        logger.info(f"SSPMPRK3({cfg.eta2:.6g}) uses derived s = {params.s:.15g}")
    return params


def dt_for_target(lam: complex, z: complex, tol: float = DEFAULT_TOL) -> float:
    """
    Step size dt > 0 with dt * lam = z.

    Raises:
        CalibrationError: when z is not a positive real multiple of lam.
    """
    lam, z = complex(lam), complex(z)
    if lam == 0 or z == 0:
        raise CalibrationError(f"cannot calibrate with lambda = {lam} and z = {z}")
    ratio = z / lam
    if abs(ratio.imag) > tol * abs(ratio) or ratio.real <= 0:
        raise CalibrationError(f"z = {z} is not a positive multiple of lambda = {lam}")
    return abs(z) / abs(lam)


def resolve_dt(cfg: ExperimentConfig, problem: TestProblem) -> float:
    if cfg.dt is not None:
        return float(cfg.dt)
    dt = dt_for_target(problem.dominant_eigenvalue, cfg.target_z)
    logger.info(f"Calibrated dt = {dt:.10g} from z = {cfg.target_z} and lambda = {problem.dominant_eigenvalue}")
    return dt


def trajectory_frame(states: Sequence[np.ndarray], dt: float, invariants: Sequence[np.ndarray]) -> pd.DataFrame:
    """Columns step, t, y1..yN, inv1..invK."""
    states = np.asarray(states)
    inv = np.vstack(invariants) if len(invariants) else np.zeros((0, states.shape[1]))
    steps = np.arange(states.shape[0])
    data = {'step': steps, 't': steps * dt}
    for i in range(states.shape[1]):
        data[f'y{i + 1}'] = states[:, i]
    values = states @ inv.T
    for k in range(inv.shape[0]):
        data[f'inv{k + 1}'] = values[:, k]
    return pd.DataFrame(data)


def validate_trajectory_frame(df: pd.DataFrame, tol: float = DEFAULT_TOL) -> None:
    """
    Every row must be strictly positive and every invariant column constant to
    tol, relative to its first value or the largest state entry if that is bigger.

    Raises:
        ContractViolationError: on the first failed check.
    """
    state_cols = [c for c in df.columns if c.startswith('y')]
    inv_cols = [c for c in df.columns if c.startswith('inv')]
    bad_rows = df.index[(df[state_cols] <= 0).any(axis=1)]
    if len(bad_rows):
        raise ContractViolationError(f"nonpositive state in trajectory row {bad_rows[0]}")
    for col in inv_cols:
        ref = df[col].iloc[0]
        scale = max(abs(ref), float(df[state_cols].abs().to_numpy().max()))
        drift = (df[col] - ref).abs().max() / scale
        if drift > tol:
            raise ContractViolationError(f"invariant {col} drifts by {drift:.3e} relative")


def write_trajectory(path: Path, df: pd.DataFrame) -> Path:
    validate_trajectory_frame(df)
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    df.to_csv(path, index=False, float_format=FLOAT_FORMAT)
    logger.info(f"Trajectory with {len(df)} rows written to {path}")
    return path


def run_experiment(cfg: ExperimentConfig) -> ExperimentReport:
    """
    Integrate one configured experiment.

    Without a fixed step count the run stops once ||y^n - y*||_2 < eps (unperturbed
    start), or, for a perturbed start y* + m*v, once the deviation grows past
    DIVERGENCE_FACTOR times its initial value or shrinks below its initial value
    divided by that factor. cap bounds the step count in every case.
    """
    check_config(cfg)
    problem = resolve_problem(cfg.problem)
    params = scheme_params(cfg)
    dt = resolve_dt(cfg, problem)
    pds = pds_from_matrix(problem.system)

    if cfg.perturbation > 0:
        y = as_state(problem.y_star + cfg.perturbation * perturbation_direction(cfg, problem), problem.n)
    else:
        y = as_state(problem.y0, problem.n)
    initial_dev = norm2(y - problem.y_star)
    grow_limit = DIVERGENCE_FACTOR * initial_dev
    shrink_limit = initial_dev / DIVERGENCE_FACTOR
    max_steps = cfg.steps if cfg.steps is not None else cfg.cap

    inv = np.vstack(problem.invariants)
    inv0 = inv @ y
    inv_scale = np.abs(inv) @ y
    keep = cfg.output is not None
    states = [y] if keep else []
    n_t = 0 if initial_dev < cfg.eps else None
    diverged = False
    divergence_step = None
    max_drift = 0.0
    min_component = float(y.min())
    k = 0

    logger.info(f"Running {params.label()} on {problem.id} with dt = {dt:.10g}")
    while k < max_steps:
        y = step(pds, y, dt, params).y_next
        k += 1
        if keep:
            states.append(y)
        dev = norm2(y - problem.y_star)
        max_drift = max(max_drift, float(np.max(np.abs(inv @ y - inv0) / inv_scale)))
        min_component = min(min_component, float(y.min()))
        if n_t is None and dev < cfg.eps:
            n_t = k
        if cfg.perturbation > 0 and dev > grow_limit:
            diverged, divergence_step = True, k
            logger.info(f"Deviation exceeded {DIVERGENCE_FACTOR:g}x its initial value at step {k}")
            break
        if cfg.steps is None:
            if cfg.perturbation > 0 and dev < shrink_limit:
                break
            if cfg.perturbation == 0 and n_t is not None:
                break

    output = None
    if keep:
        output = write_trajectory(cfg.output, trajectory_frame(states, dt, problem.invariants))

    return ExperimentReport(problem.id, params.label(), dt, k, n_t, diverged, divergence_step,
                            y, max_drift, min_component, output)


def parse_scheme_spec(text: str) -> SchemeParams:
    """'sspmprk2:alpha,beta' or 'sspmprk3:eta2'; numbers may be fractions like 1/3."""
    name, _, args = text.partition(':')
    try:
        values = [float(Fraction(v.strip())) for v in args.split(',') if v.strip()]
    except ValueError:
        raise ParameterError(f"cannot parse scheme parameters in {text!r}") from None
    if name == 'sspmprk2' and len(values) == 2:
        return sspmprk2_params(*values)
    if name == 'sspmprk3' and len(values) == 1:
        return sspmprk3_default(values[0])
    raise ParameterError(f"scheme {text!r} must be 'sspmprk2:alpha,beta' or 'sspmprk3:eta2'")


def parse_target(text: str) -> complex:
    """Named target (z1..z4) or a complex literal such as -12+2i."""
    key = text.strip().lower()
    if key in NAMED_TARGETS:
        return NAMED_TARGETS[key]
    try:
        return complex(key.replace(' ', '').replace('i', 'j'))
    except ValueError:
        raise ParameterError(f"cannot parse target z {text!r}") from None


def ntable(schemes: Sequence[SchemeParams], problems: Sequence[Union[str, TestProblem]],
           dt: Optional[float] = DEFAULT_DT, calibration: Optional[str] = None, eps: float = DEFAULT_EPS,
           cap: int = DIVERGENCE_CAP) -> pd.DataFrame:
    """
    N_T for every (scheme, problem) pair.

    Args:
        problems: registry ids or built problems
        dt: fixed step size; ignored when calibration is given
        calibration: 'stable' or 'unstable' to take dt from the problem's target z
    """
    rows = []
    for params in schemes:
        for entry in problems:
            problem = resolve_problem(entry)
            if calibration is not None:
                if calibration not in ('stable', 'unstable'):
                    raise ParameterError(f"calibration must be 'stable' or 'unstable', got {calibration!r}")
                z = problem.stable_z if calibration == 'stable' else problem.unstable_z
                if z is None:
                    raise ParameterError(f"problem {problem.id!r} has no {calibration} calibration target")
                run_dt = dt_for_target(problem.dominant_eigenvalue, z)
            else:
                run_dt = dt
            n_t = steps_to_tolerance(pds_from_matrix(problem.system), params, problem.y0, run_dt,
                                     problem.y_star, eps=eps, cap=cap)
            logger.info(f"{params.label()} on {problem.id}: N_T = {n_t}")
            rows.append({'scheme': params.label(), 'problem': problem.id, 'dt': run_dt, 'n_t': n_t})
    df = pd.DataFrame(rows, columns=['scheme', 'problem', 'dt', 'n_t'])
    df['n_t'] = df['n_t'].astype('Int64')
    return df


def order_study(problem: Union[str, TestProblem], params: SchemeParams, dt_list: Sequence[float],
                t_final: float) -> pd.DataFrame:
    """
    Errors against the exact solution at t_final and observed orders
    log(e_prev / e) / log(dt_prev / dt) between consecutive step sizes.
    """
    problem = resolve_problem(problem)
    exact = exact_solution(problem, t_final)
    pds = pds_from_matrix(problem.system)
    rows = []
    for dt in dt_list:
        n = int(round(t_final / dt))
        if n <= 0 or abs(n * dt - t_final) > 1e-9 * t_final:
            raise ParameterError(f"t_final = {t_final:g} is not a multiple of dt = {dt:g}")
        y = as_state(problem.y0, problem.n)
        for _ in range(n):
            y = step(pds, y, dt, params).y_next
        rows.append({'dt': dt, 'steps': n, 'error': norm2(y - exact)})

    df = pd.DataFrame(rows, columns=['dt', 'steps', 'error'])
    orders = [math.nan]
    for prev, cur in zip(rows, rows[1:]):
        orders.append(math.log(prev['error'] / cur['error']) / math.log(prev['dt'] / cur['dt']))
    df['order'] = orders[:len(df)]
    return df


PLOT_SCRIPT_TEMPLATE = '''#!/usr/bin/env python3
"""Render the stability region {label} stored in {csv_name}."""

from pathlib import Path

import matplotlib.pyplot as plt
import pandas as pd

here = Path(__file__).parent
df = pd.read_csv(here / "{csv_name}")
grid = df.pivot(index="im", columns="re", values="inside")

fig, ax = plt.subplots(1, 1, figsize=(89 / 25.4, 89 / 25.4 * 0.75))
ax.contourf(grid.columns, grid.index, grid.values, levels=[-0.5, 0.5, 1.5],
            colors=["white", "#2E86AB"])
ax.axhline(0, color="black", linewidth=0.3)
ax.axvline(0, color="black", linewidth=0.3)
ax.set_xlabel("Re z")
ax.set_ylabel("Im z")
ax.set_title("{label}")
plt.tight_layout()
plt.savefig(here / "{png_name}", dpi=300, bbox_inches="tight", facecolor="white", edgecolor="none")
plt.close()
'''


def region_export(params: SchemeParams, path: Path, re_range: Tuple[float, float] = (-15.0, 0.5),
                  im_range: Tuple[float, float] = (-8.0, 8.0), nx: int = 600,
                  ny: int = 600) -> Tuple[Path, Path]:
    """
    Write the scan CSV (re, im, abs_r, inside) and a companion plotting script.

    Returns:
        (csv path, script path)
    """
    scan = region_scan(params, re_range, im_range, nx, ny)
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    scan_to_frame(scan).to_csv(path, index=False, float_format=FLOAT_FORMAT)

    script = path.with_name(path.stem + '_plot.py')
    script.write_text(PLOT_SCRIPT_TEMPLATE.format(label=scan.label, csv_name=path.name,
                                                  png_name=path.stem + '.png'))
    logger.info(f"Region scan of {scan.label}: {int(scan.inside.sum())} of {scan.inside.size} points inside")
    return path, script


def problem_from_args(args) -> Union[str, TestProblem]:
    """--matrix with --y0 builds a problem from text; otherwise the --problem id."""
    if args.matrix is None:
        if args.y0 is not None:
            raise ParameterError("--y0 needs --matrix")
        return args.problem
    if args.y0 is None:
        raise ParameterError("--matrix needs --y0")
    try:
        return matrix_problem(parse_matrix(args.matrix), parse_vector(args.y0))
    except (ValidationError, DomainError) as e:
        raise ParameterError(f"invalid --matrix/--y0: {e}") from e


def config_from_args(args, **overrides) -> ExperimentConfig:
    fields = dict(
        problem=problem_from_args(args), scheme=args.scheme, alpha=args.alpha, beta=args.beta,
        eta2=args.eta2, s=args.s, dt=args.dt,
        target_z=parse_target(args.target_z) if args.target_z else None,
        steps=args.steps, eps=args.tol, perturbation=args.perturb,
        perturbation_vector=parse_vector(args.perturb_vector) if args.perturb_vector else None,
        output=Path(args.out) if args.out else None,
    )
    fields.update(overrides)
    return ExperimentConfig(**fields)


def print_report(report: ExperimentReport) -> None:
    print(f"{report.scheme} on {report.problem}, dt = {report.dt:.10g}")
    print(f"  Steps taken: {report.steps_taken}")
    print(f"  N_T: {report.n_t if report.n_t is not None else 'not reached'}")
    if report.diverged:
        print(f"  Diverged at step {report.divergence_step}")
    print(f"  Final state: {np.array2string(report.final_state, precision=10)}")
    print(f"  Max invariant drift: {report.max_invariant_drift:.3e}")
    print(f"  Min component: {report.min_component:.6g}")
    if report.output:
        print(f"  Trajectory: {report.output}")


def cmd_integrate(args) -> int:
    cfg = config_from_args(args)
    if cfg.dt is None and cfg.target_z is None:
        cfg = cfg._replace(dt=DEFAULT_DT)
    print_report(run_experiment(cfg))
    return EXIT_OK


def cmd_demo_divergence(args) -> int:
    cfg = config_from_args(args, perturbation=args.perturb or DEFAULT_PERTURBATION)
    if cfg.dt is None and cfg.target_z is None:
        problem = resolve_problem(cfg.problem)
        if problem.unstable_z is None:
            raise ParameterError(f"problem {problem.id!r} has no unstable target; give --dt or --target-z")
        cfg = cfg._replace(target_z=problem.unstable_z)
    report = run_experiment(cfg)
    print_report(report)
    if not report.diverged:
        print(f"  No divergence within {report.steps_taken} steps")
    return EXIT_OK


def cmd_ntable(args) -> int:
    schemes = [parse_scheme_spec(text) for text in (args.schemes or DEFAULT_NTABLE_SCHEMES)]
    source = problem_from_args(args)
    problems = [source] if isinstance(source, TestProblem) else (args.problems or problem_ids())
    df = ntable(schemes, problems, dt=args.dt if args.dt is not None else DEFAULT_DT,
                calibration=args.calibration, eps=args.tol)
    print(df.to_string(index=False))
    if args.out:
        df.to_csv(args.out, index=False, float_format=FLOAT_FORMAT)
        print(f"N_T table saved to {args.out}")
    return EXIT_OK


def cmd_region(args) -> int:
    cfg = config_from_args(args, dt=1.0)
    params = scheme_params(cfg)
    out = Path(args.out or f"region_{cfg.scheme}.csv")
    csv_path, script_path = region_export(params, out, (args.re_min, args.re_max),
                                          (args.im_min, args.im_max), args.nx, args.ny)
    print(f"Region scan saved to {csv_path}")
    print(f"Plot script saved to {script_path}")
    return EXIT_OK


def cmd_classify(args) -> int:
    cls = classify_sspmprk2(args.alpha, args.beta)
    print(f"SSPMPRK2({args.alpha:g},{args.beta:g}): {cls.value}")
    print(f"  alpha - 1/(2 beta) = {args.alpha - alpha_critical(args.beta):.6g}")
    print(f"  lim R(z), z -> -inf: {r2_limit(args.alpha, args.beta):.10g}")
    return EXIT_OK


def cmd_jacobian_check(args) -> int:
    cfg = config_from_args(args)
    if cfg.dt is None and cfg.target_z is None:
        cfg = cfg._replace(dt=DEFAULT_DT)
    check_config(cfg)
    problem = resolve_problem(cfg.problem)
    params = scheme_params(cfg)
    dt = resolve_dt(cfg, problem)
    g = one_step_map(pds_from_matrix(problem.system), dt, params)

    report = jacobian_report(g, problem.y_star, problem.kernel)
    transfer = eigenvalue_transfer_error(report.matrix, dt, problem.spectrum, stability_function(params))
    print(f"{params.label()} on {problem.id}, dt = {dt:.10g}")
    print(f"  Eigenvalues of J: {', '.join(f'{lam:.10g}' for lam in report.eigenvalues)}")
    print(f"  Spectral radius: {report.spectral_radius:.12g}")
    print(f"  Kernel residuals: {', '.join(f'{r:.3e}' for r in report.kernel_residuals)}")
    print(f"  Eigenvalue transfer error: {transfer:.3e}")
    if isinstance(params, SSPMPRK2Params):
        analytic = analytic_jacobian_sspmprk2(problem.system, dt, params)
        print(f"  Analytic vs FD Jacobian: {np.max(np.abs(analytic - report.matrix)):.3e}")
    print(f"  Verdict: {stability_verdict(report.matrix, problem.kernel).value}")
    return EXIT_OK


def cmd_order(args) -> int:
    cfg = config_from_args(args, dt=1.0)
    params = scheme_params(cfg)
    df = order_study(cfg.problem, params, args.dts, args.t_final)
    print(df.to_string(index=False))
    if args.out:
        df.to_csv(args.out, index=False, float_format=FLOAT_FORMAT)
    return EXIT_OK


def cmd_param_plane(args) -> int:
    df = parameter_plane(args.beta_max, args.n)
    out = Path(args.out or 'parameter_plane.csv')
    df.to_csv(out, index=False, float_format=FLOAT_FORMAT)
    print(f"Parameter plane curves saved to {out}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument('--problem', default='real3', help=f"Test problem ({', '.join(problem_ids())})")
    common.add_argument('--matrix', default=None,
                        help="System matrix as row-major text, rows split by ';', e.g. '-1 1; 1 -1' (replaces --problem)")
    common.add_argument('--y0', default=None, help='Initial state for --matrix, e.g. "1 2"')
    common.add_argument('--scheme', choices=SCHEMES, default='sspmprk3', help='Integrator')
    common.add_argument('--alpha', type=float, default=0.5, help='SSPMPRK2 alpha')
    common.add_argument('--beta', type=float, default=1.0, help='SSPMPRK2 beta')
    common.add_argument('--eta2', type=lambda v: float(Fraction(v)), default=1.0 / 3.0, help='SSPMPRK3 eta2')
    common.add_argument('--s', type=float, default=None, help='SSPMPRK3 a-stage exponent (derived if omitted)')
    common.add_argument('--dt', type=float, default=None, help='Time step')
    common.add_argument('--target-z', default=None, help='Calibrate dt so that dt*lambda = z (z1..z4 or complex)')
    common.add_argument('--steps', type=int, default=None, help='Fixed number of steps')
    common.add_argument('--tol', type=float, default=DEFAULT_EPS, help='Distance to y* that counts as converged')
    common.add_argument('--perturb', type=float, default=0.0, help='Start at y* + perturb * v')
    common.add_argument('--perturb-vector', default=None,
                        help='Direction v of the perturbed start, orthogonal to every invariant')
    common.add_argument('--out', default=None, help='Output path')
    common.add_argument('-v', '--verbose', action='store_true', help='Verbose output')

    parser = argparse.ArgumentParser(description='SSPMPRK integrators on positive conservative test problems')
    sub = parser.add_subparsers(dest='command', required=True)

    p = sub.add_parser('integrate', parents=[common], help='Integrate one problem')
    p.set_defaults(func=cmd_integrate)

    p = sub.add_parser('ntable', parents=[common], help='N_T table')
    p.add_argument('--schemes', nargs='*', help="Scheme specs such as sspmprk2:0.1,1 or sspmprk3:1/3")
    p.add_argument('--problems', nargs='*', help='Problem ids (default: all)')
    p.add_argument('--calibration', choices=['stable', 'unstable'], default=None,
                   help='Take dt from the problem target z instead of --dt')
    p.set_defaults(func=cmd_ntable)

    p = sub.add_parser('region', parents=[common], help='Stability region scan')
    p.add_argument('--re-min', type=float, default=-15.0)
    p.add_argument('--re-max', type=float, default=0.5)
    p.add_argument('--im-min', type=float, default=-8.0)
    p.add_argument('--im-max', type=float, default=8.0)
    p.add_argument('--nx', type=int, default=600)
    p.add_argument('--ny', type=int, default=600)
    p.set_defaults(func=cmd_region)

    p = sub.add_parser('classify', parents=[common], help='Classify SSPMPRK2(alpha, beta)')
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser('jacobian-check', parents=[common], help='Jacobian eigenvalues at y*')
    p.set_defaults(func=cmd_jacobian_check)

    p = sub.add_parser('order', parents=[common], help='Convergence order study')
    p.add_argument('--dts', type=float, nargs='+', default=[2e-4, 1e-4, 5e-5])
    p.add_argument('--t-final', type=float, default=1e-2)
    p.set_defaults(func=cmd_order)

    p = sub.add_parser('demo-divergence', parents=[common], help='Perturbed start at an unstable dt')
    p.set_defaults(func=cmd_demo_divergence)

    p = sub.add_parser('param-plane', parents=[common], help='Parameter plane boundary curves')
    p.add_argument('--beta-max', type=float, default=5.0)
    p.add_argument('--n', type=int, default=200)
    p.set_defaults(func=cmd_param_plane)

    return parser


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)

    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format='%(asctime)s - %(levelname)s - %(message)s'
    )

    try:
        return args.func(args)
    except (ParameterError, UnknownProblemError, CalibrationError, DimensionError, OSError) as e:
        print(f"Error: {e}")
        return EXIT_USAGE
    except PDSError as e:
        print(f"Contract violation: {e}")
        return EXIT_CONTRACT


if __name__ == "__main__":
    sys.exit(main())
