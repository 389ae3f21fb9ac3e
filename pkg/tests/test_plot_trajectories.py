import matplotlib

matplotlib.use('Agg')

import numpy as np  # noqa: E402
import pandas as pd  # noqa: E402
import pytest  # noqa: E402

from core.benchmark_problems import get_problem  # noqa: E402
from core.experiments import trajectory_frame  # noqa: E402
from utils.plot_trajectories import load_trajectory, plot_trajectory  # noqa: E402


def _exact_frame(problem_id, dt=1e-3, steps=50):
    problem = get_problem(problem_id)
    states = [problem.exact(k * dt) for k in range(steps + 1)]
    return trajectory_frame(states, dt, problem.invariants)


@pytest.mark.parametrize('problem_id', ['real3', 'double-kernel4'])
def test_plot_written(tmp_path, problem_id):
    csv_file = tmp_path / 'traj.csv'
    _exact_frame(problem_id).to_csv(csv_file, index=False)
    out = plot_trajectory(load_trajectory(csv_file), problem_id, tmp_path / 'traj.png')
    assert out.exists()
    assert out.stat().st_size > 0


def test_plot_t_max(tmp_path):
    out = plot_trajectory(_exact_frame('complex3'), 'complex3', tmp_path / 'short.png', t_max=0.01)
    assert out.exists()


def test_load_rejects_other_csv(tmp_path):
    csv_file = tmp_path / 'other.csv'
    pd.DataFrame({'a': np.arange(3)}).to_csv(csv_file, index=False)
    with pytest.raises(ValueError, match='not a trajectory file'):
        load_trajectory(csv_file)
