import numpy as np
import pandas as pd
import pytest

from core.benchmark_problems import Z1, Z2, Z3, get_problem, matrix_problem, problem_ids
from core.errors import CalibrationError, ContractViolationError, DimensionError, ParameterError
from core.experiments import (
    DEFAULT_PERTURBATION,
    EXIT_CONTRACT,
    EXIT_OK,
    EXIT_USAGE,
    ExperimentConfig,
    check_config,
    dt_for_target,
    main,
    ntable,
    order_study,
    parse_scheme_spec,
    parse_target,
    region_export,
    run_experiment,
    trajectory_frame,
    validate_trajectory_frame,
)
from core.schemes import SSPMPRK2Params, SSPMPRK3Params, sspmprk2_params
from core.stability import sspmprk3_default

DIVERGENCE_STEPS = {'real3': 139, 'complex3': 180, 'double-kernel4': 171}


def test_dt_for_target():
    assert dt_for_target(-500.0, -12.5) == pytest.approx(0.025)
    assert dt_for_target(100.0 * (-6.0 + 1.0j), Z2) == pytest.approx(11.0 / 600.0)
    for lam, z in [(-500.0, Z1), (-500.0, 12.5), (0.0, Z3), (-500.0, 0.0)]:
        with pytest.raises(CalibrationError):
            dt_for_target(lam, z)


def test_parse_scheme_spec():
    p = parse_scheme_spec('sspmprk2:0.2,3')
    assert isinstance(p, SSPMPRK2Params)
    assert (p.alpha, p.beta) == (0.2, 3.0)
    p = parse_scheme_spec('sspmprk3:1/3')
    assert isinstance(p, SSPMPRK3Params)
    assert p.eta2 == pytest.approx(1.0 / 3.0)
    for bad in ('rk4:1', 'sspmprk2:0.5', 'sspmprk2:x,1', 'sspmprk2:0.9,1'):
        with pytest.raises(ParameterError):
            parse_scheme_spec(bad)


def test_parse_target():
    assert parse_target('z1') == Z1
    assert parse_target('Z3') == Z3
    assert parse_target('-12+2i') == complex(-12.0, 2.0)
    with pytest.raises(ParameterError):
        parse_target('left')


def test_check_config():
    check_config(ExperimentConfig(problem='real3', dt=1.0))
    bad_configs = [
        ExperimentConfig(problem='real3'),
        ExperimentConfig(problem='real3', dt=1.0, target_z=Z3),
        ExperimentConfig(problem='real3', dt=-1.0),
        ExperimentConfig(problem='real3', scheme='rk4', dt=1.0),
        ExperimentConfig(problem='real3', dt=1.0, perturbation=-1.0),
        ExperimentConfig(problem='real3', dt=1.0, steps=-2),
    ]
    for cfg in bad_configs:
        with pytest.raises(ParameterError):
            check_config(cfg)


def test_ntable_at_dt5():
    schemes = [sspmprk3_default(1.0 / 3.0), sspmprk2_params(0.1, 1.0), sspmprk2_params(0.5, 1.0)]
    df = ntable(schemes, problem_ids(), dt=5.0)
    assert list(df.columns) == ['scheme', 'problem', 'dt', 'n_t']
    n_t = {(row.scheme, row.problem): int(row.n_t) for row in df.itertuples()}

    third = sspmprk3_default(1.0 / 3.0).label()
    for pid, expected in [('real3', 20), ('complex3', 25), ('double-kernel4', 18)]:
        assert abs(n_t[(third, pid)] - expected) <= 1
    for pid in problem_ids():
        assert abs(n_t[('SSPMPRK2(0.1,1)', pid)] - 10) <= 1
    assert 3000 <= n_t[('SSPMPRK2(0.5,1)', 'real3')] <= 4000
    assert 4500 <= n_t[('SSPMPRK2(0.5,1)', 'complex3')] <= 5500
    assert 4500 <= n_t[('SSPMPRK2(0.5,1)', 'double-kernel4')] <= 5500


def test_ntable_stable_calibration():
    df = ntable([sspmprk2_params(0.2, 3.0)], problem_ids(), calibration='stable')
    assert df['n_t'].between(250, 350).all()
    assert df['dt'].iloc[0] == pytest.approx(11.5 / 500.0)
    with pytest.raises(ParameterError):
        ntable([sspmprk2_params(0.2, 3.0)], ['real3'], calibration='sideways')


@pytest.mark.parametrize('pid', problem_ids())
def test_perturbed_start_diverges_at_unstable_dt(pid):
    problem = get_problem(pid)
    cfg = ExperimentConfig(problem=pid, scheme='sspmprk2', alpha=0.2, beta=3.0,
                           target_z=problem.unstable_z, perturbation=DEFAULT_PERTURBATION)
    report = run_experiment(cfg)
    assert report.diverged
    assert abs(report.divergence_step - DIVERGENCE_STEPS[pid]) <= 5
    assert report.min_component > 0.0
    assert report.max_invariant_drift <= 1e-11


@pytest.mark.parametrize('pid', problem_ids())
def test_perturbed_start_settles_at_stable_dt(pid):
    problem = get_problem(pid)
    cfg = ExperimentConfig(problem=pid, scheme='sspmprk2', alpha=0.2, beta=3.0,
                           target_z=problem.stable_z, perturbation=DEFAULT_PERTURBATION)
    report = run_experiment(cfg)
    assert not report.diverged
    assert np.linalg.norm(report.final_state - problem.y_star) < 1e-5 * np.linalg.norm(problem.perturbation)


def test_run_experiment_writes_trajectory(tmp_path):
    out = tmp_path / 'trajectories' / 'ssp3_double-kernel4.csv'
    report = run_experiment(ExperimentConfig(problem='double-kernel4', dt=5.0, output=out))
    assert report.n_t == report.steps_taken
    assert report.output == out

    df = pd.read_csv(out)
    assert list(df.columns) == ['step', 't', 'y1', 'y2', 'y3', 'y4', 'inv1', 'inv2']
    assert len(df) == report.steps_taken + 1
    np.testing.assert_allclose(df['inv1'], 15.0, rtol=1e-11)
    np.testing.assert_allclose(df['inv2'], 25.0, rtol=1e-11)
    assert df['t'].iloc[1] == pytest.approx(5.0)


def test_run_experiment_fixed_steps():
    report = run_experiment(ExperimentConfig(problem='real3', scheme='sspmprk2', alpha=0.1, beta=1.0,
                                             dt=5.0, steps=3))
    assert report.steps_taken == 3
    assert report.n_t is None or report.n_t <= 3


def test_trajectory_frame_validation():
    states = np.array([[1.0, 2.0], [1.5, 1.5]])
    df = trajectory_frame(states, 0.1, [np.ones(2)])
    assert list(df.columns) == ['step', 't', 'y1', 'y2', 'inv1']
    validate_trajectory_frame(df)

    with pytest.raises(ContractViolationError):
        validate_trajectory_frame(trajectory_frame(np.array([[1.0, 2.0], [3.0, -0.1]]), 0.1, []))
    with pytest.raises(ContractViolationError):
        validate_trajectory_frame(trajectory_frame(np.array([[1.0, 2.0], [1.0, 2.5]]), 0.1, [np.ones(2)]))


def test_order_study():
    dts = [2e-4, 1e-4, 5e-5]
    df = order_study('real3', sspmprk2_params(0.5, 1.0), dts, 1e-2)
    assert list(df.columns) == ['dt', 'steps', 'error', 'order']
    assert list(df['steps']) == [50, 100, 200]
    assert np.isnan(df['order'].iloc[0])
    assert (df['order'].iloc[1:] >= 1.8).all()

    df = order_study('real3', sspmprk3_default(1.0 / 3.0), dts, 1e-2)
    assert (df['order'].iloc[1:] >= 2.7).all()

    with pytest.raises(ParameterError):
        order_study('real3', sspmprk2_params(0.5, 1.0), [3e-3], 1e-2)


def test_region_export(tmp_path):
    csv_path, script_path = region_export(sspmprk2_params(0.2, 3.0), tmp_path / 'regions' / 'ssp2.csv',
                                          re_range=(-15.0, 0.0), im_range=(-8.0, 8.0), nx=61, ny=97)
    assert script_path.name == 'ssp2_plot.py'
    df = pd.read_csv(csv_path)
    assert len(df) == 61 * 97
    assert list(df.columns) == ['re', 'im', 'abs_r', 'inside']

    at_z3 = df[(df['re'] == -12.5) & (df['im'].abs() < 1e-9)]
    assert len(at_z3) == 1
    assert at_z3['inside'].iloc[0] == 0

    source = script_path.read_text()
    assert 'ssp2.csv' in source
    compile(source, str(script_path), 'exec')


def test_main_subcommands(tmp_path, capsys):
    assert main(['classify', '--alpha', '0.2', '--beta', '3']) == EXIT_OK
    assert 'BoundedRegion' in capsys.readouterr().out

    out = tmp_path / 'plane.csv'
    assert main(['param-plane', '--out', str(out), '--n', '20']) == EXIT_OK
    assert len(pd.read_csv(out)) == 20

    out = tmp_path / 'ntable.csv'
    assert main(['ntable', '--schemes', 'sspmprk2:0.1,1', '--problems', 'real3', '--out', str(out)]) == EXIT_OK
    assert pd.read_csv(out)['n_t'].iloc[0] == pytest.approx(10, abs=1)

    assert main(['jacobian-check', '--problem', 'double-kernel4', '--scheme', 'sspmprk2',
                 '--alpha', '0.2', '--beta', '3', '--target-z', 'z3']) == EXIT_OK
    assert 'Unstable' in capsys.readouterr().out

    assert main(['demo-divergence', '--problem', 'real3', '--scheme', 'sspmprk2',
                 '--alpha', '0.2', '--beta', '3']) == EXIT_OK
    assert 'Diverged at step' in capsys.readouterr().out


def test_main_usage_errors(capsys):
    assert main(['integrate', '--problem', 'nope', '--dt', '1']) == EXIT_USAGE
    assert main(['classify', '--alpha', '2', '--beta', '1']) == EXIT_USAGE
    assert main(['integrate', '--dt', '1', '--target-z', 'z3']) == EXIT_USAGE
    assert main(['ntable', '--schemes', 'sspmprk9:1']) == EXIT_USAGE
    assert 'Error:' in capsys.readouterr().out


def test_main_contract_violation(monkeypatch, capsys):
    def broken(cfg):
        raise ContractViolationError('forced')

    monkeypatch.setattr('core.experiments.run_experiment', broken)
    assert main(['integrate', '--dt', '1']) == EXIT_CONTRACT
    assert 'Contract violation' in capsys.readouterr().out


SWAP = '-1 1; 1 -1'


def test_perturbation_vector():
    problem = get_problem('real3')
    base = dict(problem='real3', scheme='sspmprk2', alpha=0.2, beta=3.0,
                target_z=problem.unstable_z, perturbation=DEFAULT_PERTURBATION)

    # (0, 1, -1) excites the -500 mode, (1, 0, -1) only the -300 mode
    report = run_experiment(ExperimentConfig(**base, perturbation_vector=np.array([0.0, 1.0, -1.0])))
    assert report.diverged
    assert report.max_invariant_drift <= 1e-11
    report = run_experiment(ExperimentConfig(**base, perturbation_vector=np.array([1.0, 0.0, -1.0])))
    assert not report.diverged

    for vector, error in [([1.0, 0.0, 0.0], ParameterError),
                          ([0.0, 0.0, 0.0], ParameterError),
                          ([1.0, -1.0], DimensionError)]:
        with pytest.raises(error):
            check_config(ExperimentConfig(**base, perturbation_vector=np.array(vector)))


def test_run_experiment_on_matrix_problem():
    problem = matrix_problem(np.array([[-1.0, 1.0], [1.0, -1.0]]), [1.0, 2.0])
    report = run_experiment(ExperimentConfig(problem=problem, scheme='sspmprk2', alpha=0.5, beta=1.0,
                                             dt=1.0, perturbation=DEFAULT_PERTURBATION))
    assert report.problem == 'matrix'
    assert not report.diverged
    np.testing.assert_allclose(report.final_state, [1.5, 1.5], rtol=1e-4)
    assert report.max_invariant_drift <= 1e-12
    with pytest.raises(ParameterError, match='no closed-form solution'):
        order_study(problem, sspmprk2_params(0.5, 1.0), [0.1, 0.05], 1.0)
    with pytest.raises(ParameterError, match='calibration target'):
        ntable([sspmprk2_params(0.5, 1.0)], [problem], calibration='unstable')


def test_main_matrix_problem(tmp_path, capsys):
    out = tmp_path / 'swap.csv'
    assert main(['integrate', '--matrix', SWAP, '--y0', '1 2', '--dt', '1', '--out', str(out)]) == EXIT_OK
    assert 'on matrix' in capsys.readouterr().out
    df = pd.read_csv(out)
    np.testing.assert_allclose(df['inv1'], 3.0, rtol=1e-12)
    np.testing.assert_allclose(df[['y1', 'y2']].iloc[-1], [1.5, 1.5], atol=2e-2)

    assert main(['ntable', '--matrix', SWAP, '--y0', '1 2', '--schemes', 'sspmprk2:0.5,1', '--dt', '0.5']) == EXIT_OK
    assert 'matrix' in capsys.readouterr().out

    assert main(['jacobian-check', '--matrix', SWAP, '--y0', '1 2', '--scheme', 'sspmprk2', '--dt', '1']) == EXIT_OK
    assert 'Verdict' in capsys.readouterr().out

    assert main(['demo-divergence', '--matrix', SWAP, '--y0', '1 2', '--dt', '1']) == EXIT_OK
    assert 'No divergence' in capsys.readouterr().out


def test_main_matrix_usage_errors(capsys):
    assert main(['order', '--matrix', SWAP, '--y0', '1 2']) == EXIT_USAGE
    assert 'no closed-form solution' in capsys.readouterr().out
    assert main(['demo-divergence', '--matrix', SWAP, '--y0', '1 2']) == EXIT_USAGE
    assert 'no unstable target' in capsys.readouterr().out
    assert main(['integrate', '--matrix', SWAP, '--dt', '1']) == EXIT_USAGE
    assert main(['integrate', '--y0', '1 2', '--dt', '1']) == EXIT_USAGE
    assert main(['integrate', '--matrix', '-1 -1; 1 1', '--y0', '1 2', '--dt', '1']) == EXIT_USAGE
    assert main(['integrate', '--matrix', SWAP, '--y0', '1 -2', '--dt', '1']) == EXIT_USAGE
    assert main(['integrate', '--matrix', '1 2 3; 4 5', '--y0', '1 2', '--dt', '1']) == EXIT_USAGE
    assert main(['integrate', '--matrix', SWAP, '--y0', '1 2 3', '--dt', '1']) == EXIT_USAGE
    assert main(['integrate', '--perturb-vector', '1 0 0', '--perturb', '1e-5', '--dt', '1']) == EXIT_USAGE
    assert 'Error:' in capsys.readouterr().out
