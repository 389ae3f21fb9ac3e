#!/usr/bin/env python3
"""
Run the full catalogue of numerical experiments in parallel: N_T runs at dt = 5,
calibrated runs for SSPMPRK2(0.2, 3), perturbed-start divergence demos and the
stability-region scans. Writes one CSV per run and a summary table.
"""

import argparse
import logging
import sys
import time
from concurrent.futures import ProcessPoolExecutor, as_completed
from pathlib import Path
from typing import List, NamedTuple, Optional, Tuple

import pandas as pd
from tqdm import tqdm

sys.path.insert(0, str(Path(__file__).resolve().parent.parent))

from core.benchmark_problems import get_problem, problem_ids  # noqa: E402
from core.errors import PDSError  # noqa: E402
from core.experiments import (  # noqa: E402
    DEFAULT_DT,
    DEFAULT_PERTURBATION,
    ExperimentConfig,
    region_export,
    run_experiment,
)
from core.schemes import sspmprk2_params  # noqa: E402

REGION_PARAMS = [(0.2, 3.0), (0.24, 3.0), (0.2, 3.5), (0.24, 3.5), (0.1, 1.0), (0.5, 1.0)]


class Task(NamedTuple):
    name: str
    kind: str
    config: Optional[ExperimentConfig] = None
    alpha: float = 0.0
    beta: float = 0.0


def build_catalogue(output_dir: Path) -> List[Task]:
    """All runs, named <variant>_<problem>."""
    tasks = []
    for pid in problem_ids():
        problem = get_problem(pid)
        runs = [
            ('ssp3_third', dict(scheme='sspmprk3', eta2=1.0 / 3.0, dt=DEFAULT_DT)),
            ('ssp2_half_one', dict(scheme='sspmprk2', alpha=0.5, beta=1.0, dt=DEFAULT_DT)),
            ('ssp2_tenth_one', dict(scheme='sspmprk2', alpha=0.1, beta=1.0, dt=DEFAULT_DT)),
            ('ssp2_stable', dict(scheme='sspmprk2', alpha=0.2, beta=3.0, target_z=problem.stable_z)),
            ('ssp2_unstable', dict(scheme='sspmprk2', alpha=0.2, beta=3.0, target_z=problem.unstable_z,
                                   perturbation=DEFAULT_PERTURBATION)),
        ]
        for variant, fields in runs:
            name = f"{variant}_{pid}"
            cfg = ExperimentConfig(problem=pid, output=output_dir / 'trajectories' / f"{name}.csv", **fields)
            tasks.append(Task(name, 'experiment', cfg))

    for alpha, beta in REGION_PARAMS:
        tasks.append(Task(f"region_{alpha:g}_{beta:g}", 'region', alpha=alpha, beta=beta))
    return tasks


def run_task(args_tuple: Tuple[Task, Path, int]) -> Tuple[str, bool, str, dict]:
    """Run one task; failures are reported, never raised."""
    task, output_dir, resolution = args_tuple
    try:
        if task.kind == 'region':
            csv_path, _ = region_export(sspmprk2_params(task.alpha, task.beta),
                                        output_dir / 'regions' / f"{task.name}.csv",
                                        nx=resolution, ny=resolution)
            return task.name, True, f"Region scan saved to {csv_path}", {}

        report = run_experiment(task.config)
        row = {
            'scheme': report.scheme, 'problem': report.problem, 'dt': report.dt,
            'n_t': report.n_t, 'diverged': report.diverged, 'divergence_step': report.divergence_step,
            'steps': report.steps_taken, 'max_invariant_drift': report.max_invariant_drift,
            'min_component': report.min_component,
        }
        status = f"diverged at step {report.divergence_step}" if report.diverged else f"N_T = {report.n_t}"
        return task.name, True, status, row
    except (PDSError, OSError) as e:
        error_msg = f"Error in {task.name}: {e}"
        logging.error(error_msg)
        return task.name, False, error_msg, {}


def main():
    parser = argparse.ArgumentParser(description="Reproduce the SSPMPRK numerical experiments")
    parser.add_argument("--output_dir", type=Path, default=Path("./results"), help="Output directory")
    parser.add_argument("--workers", type=int, default=4, help="Number of parallel workers")
    parser.add_argument("--resolution", type=int, default=300, help="Grid points per axis for region scans")
    parser.add_argument("--verbose", action="store_true", help="Verbose output")

    args = parser.parse_args()

    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format='%(asctime)s - %(levelname)s - %(message)s'
    )

    args.output_dir.mkdir(parents=True, exist_ok=True)
    tasks = build_catalogue(args.output_dir)
    print(f"Running {len(tasks)} tasks with {args.workers} workers...")

    rows = {}
    successful = 0
    failed = 0
    start_time = time.time()

    with ProcessPoolExecutor(max_workers=args.workers) as executor:
        futures = {executor.submit(run_task, (task, args.output_dir, args.resolution)): task.name
                   for task in tasks}
        for future in tqdm(as_completed(futures), total=len(futures), desc="Experiments"):
            name, success, message, row = future.result()
            if success:
                successful += 1
                if row:
                    rows[name] = row
                if args.verbose:
                    print(f"✓ {name}: {message}")
            else:
                failed += 1
                print(f"✗ {name}: {message}")

    total_time = time.time() - start_time

    if rows:
        summary = pd.DataFrame([{'name': name, **rows[name]} for name in sorted(rows)])
        summary['n_t'] = summary['n_t'].astype('Int64')
        summary['divergence_step'] = summary['divergence_step'].astype('Int64')
        summary_file = args.output_dir / 'summary.csv'
        summary.to_csv(summary_file, index=False, float_format='%.17g')
        print(f"\n{summary[['name', 'dt', 'n_t', 'diverged', 'divergence_step']].to_string(index=False)}")
        print(f"Summary saved to {summary_file}")

    print(f"\nExperiments complete:")
    print(f"  Successful: {successful}")
    print(f"  Failed: {failed}")
    print(f"  Total time: {total_time:.2f} seconds")
    print(f"  Output directory: {args.output_dir}")
    return 0 if failed == 0 else 1


if __name__ == "__main__":
    sys.exit(main())
