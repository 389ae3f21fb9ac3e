#!/usr/bin/env python3
"""
Plot trajectory CSVs written by `python -m core.experiments integrate`: numerical
states as markers, the exact solution dashed, and the invariant columns in a
second panel.
"""

import argparse
import sys
from pathlib import Path
from typing import Optional

import matplotlib as mpl
import matplotlib.pyplot as plt
import numpy as np
import pandas as pd

sys.path.insert(0, str(Path(__file__).resolve().parent.parent))

from core.benchmark_problems import get_problem, problem_ids  # noqa: E402

# Publication style, single-column figures
mpl.rcParams.update({
    'font.size': 8,
    'font.family': 'sans-serif',
    'font.sans-serif': ['Arial', 'DejaVu Sans', 'Liberation Sans'],
    'axes.linewidth': 0.5,
    'axes.labelsize': 8,
    'axes.titlesize': 9,
    'xtick.labelsize': 7,
    'ytick.labelsize': 7,
    'legend.fontsize': 7,
    'lines.linewidth': 1.0,
    'xtick.major.width': 0.5,
    'ytick.major.width': 0.5,
})

COLORS = ['#2E86AB', '#A23B72', '#F18F01', '#3B1F2B']


def load_trajectory(csv_file: Path) -> pd.DataFrame:
    df = pd.read_csv(csv_file)
    if 'step' not in df.columns or 't' not in df.columns:
        raise ValueError(f"{csv_file} is not a trajectory file (missing step/t columns)")
    return df


def plot_trajectory(df: pd.DataFrame, problem_id: str, output_file: Path,
                    t_max: Optional[float] = None) -> Path:
    """Plot states and invariants; the exact solution is drawn dashed."""
    problem = get_problem(problem_id)
    state_cols = [c for c in df.columns if c.startswith('y')]
    inv_cols = [c for c in df.columns if c.startswith('inv')]
    if t_max is not None:
        df = df[df['t'] <= t_max]

    fig_width = 89 / 25.4
    fig, (ax, ax_inv) = plt.subplots(2, 1, figsize=(fig_width, fig_width * 1.1),
                                     gridspec_kw={'height_ratios': [3, 1]}, sharex=True)

    t_fine = np.linspace(0.0, float(df['t'].max()), 400)
    exact = np.array([problem.exact(t) for t in t_fine])
    for i, col in enumerate(state_cols):
        color = COLORS[i % len(COLORS)]
        ax.plot(df['t'], df[col], 'o', markersize=2, color=color, label=f'$y_{i + 1}$')
        ax.plot(t_fine, exact[:, i], '--', linewidth=0.6, color=color)
    ax.set_ylabel('Concentration', fontweight='bold', labelpad=1)
    ax.legend(frameon=False, ncol=len(state_cols))
    ax.grid(True, alpha=0.3, linewidth=0.3)
    ax.set_axisbelow(True)

    for k, col in enumerate(inv_cols):
        ax_inv.plot(df['t'], df[col] - df[col].iloc[0], linewidth=0.8,
                    color=COLORS[k % len(COLORS)], label=f'$n_{k + 1}^T y - n_{k + 1}^T y^0$')
    ax_inv.set_xlabel('t', fontweight='bold', labelpad=1)
    ax_inv.set_ylabel('Drift', fontweight='bold', labelpad=1)
    ax_inv.legend(frameon=False)
    ax_inv.grid(True, alpha=0.3, linewidth=0.3)

    plt.tight_layout()
    plt.savefig(output_file, dpi=300, bbox_inches='tight', facecolor='white', edgecolor='none')
    plt.close()

    print(f"Plot saved as {output_file}")
    return Path(output_file)


def main():
    parser = argparse.ArgumentParser(description='Plot SSPMPRK trajectory CSV files')
    parser.add_argument('csv_files', type=Path, nargs='+', help='Trajectory CSV files')
    parser.add_argument('--problem', choices=problem_ids(), required=True,
                        help='Problem the trajectories belong to (for the exact solution)')
    parser.add_argument('--t-max', type=float, default=None, help='Plot only t <= t_max')

    args = parser.parse_args()

    for csv_file in args.csv_files:
        if not csv_file.exists():
            print(f"Error: trajectory file {csv_file} not found")
            sys.exit(1)
        df = load_trajectory(csv_file)
        plot_trajectory(df, args.problem, csv_file.with_suffix('.png'), args.t_max)


if __name__ == "__main__":
    main()
