"""
Batch Experiment Runner

Loads named experiments from experiments.yaml and runs their steps through
the CLI, one run directory and one manifest per step.
"""

import os
from datetime import datetime
from typing import List, Optional

from dotenv import load_dotenv
from tqdm import tqdm

from . import config
from .experiment_registry import ExperimentConfig, ExperimentRegistry, make_alpha
from .io import write_sequence


def resolve_output_dir(output_dir: Optional[str] = None) -> str:
    load_dotenv()
    return output_dir or os.getenv(config.OUTPUT_DIR_ENV) or config.DEFAULT_OUTPUT_DIR


def expand_steps(experiment: ExperimentConfig, run_dir: str) -> List[List[str]]:
    """argv lists with {run_dir} and {alpha} filled in."""
    alpha_path = os.path.join(run_dir, "alpha.json")
    return [[a.format(run_dir=run_dir, alpha=alpha_path) for a in step] for step in experiment.steps]


def run_experiment(experiment: ExperimentConfig, output_dir: str, quiet: bool = False) -> bool:
    """Runs every step in order; stops at the first nonzero exit status."""
    from .cli import run

    run_dir = os.path.join(output_dir, experiment.name)
    os.makedirs(run_dir, exist_ok=True)
    if experiment.alpha is not None:
        write_sequence(os.path.join(run_dir, "alpha.json"), make_alpha(experiment.alpha))
    for i, argv in enumerate(expand_steps(experiment, run_dir)):
        argv = ["--manifest", os.path.join(run_dir, f"step{i}{config.MANIFEST_SUFFIX}")] + argv
        if quiet:
            argv = ["--quiet"] + argv
        status = run(argv)
        if status != config.EXIT_OK:
            tqdm.write(f"❌ {experiment.name}: step {i} ({argv[2 + int(quiet)]}) exited with {status}")
            return False
    return True


def print_summary(experiments: List[ExperimentConfig]):
    print("\n" + "=" * 80)
    print("📊 EXPERIMENT STATUS SUMMARY")
    print("=" * 80)
    for e in experiments:
        mark = {"ok": "✅", "failed": "❌"}.get(e.last_status, "⏳")
        print(f"{mark} {e.name}: {e.description} ({len(e.steps)} step(s), last run {e.last_run or 'never'})")
    print("=" * 80)


def batch_run(experiments_file: str = config.EXPERIMENTS_FILE, only: Optional[str] = None,
              dry_run: bool = False, output_dir: Optional[str] = None, quiet: bool = False,
              registry_file: str = config.REGISTRY_FILE) -> bool:
    """
    Runs the active experiments of a YAML file.

    Args:
        experiments_file: YAML file with an `experiments` mapping.
        only: Run just this experiment.
        dry_run: Show what would run without running it.
        output_dir: Root for run directories; defaults to $COMBLAB_OUTPUT_DIR or runs/.
        quiet: Silence the per-step CLI output.

    Returns:
        True when every selected experiment succeeded.
    """
    registry = ExperimentRegistry(registry_file)
    if not quiet:
        print(f"📋 Loading experiments from {experiments_file}...")
    names = registry.load_experiments_from_yaml(experiments_file)
    output_dir = resolve_output_dir(output_dir)

    selected = [registry.get_experiment(name) for name in names]
    if only:
        experiment = registry.get_experiment(only)
        if experiment is None or only not in names:
            raise ValueError(f"Experiment '{only}' not found in {experiments_file}.")
        selected = [experiment]

    if dry_run:
        for e in selected:
            for argv in expand_steps(e, os.path.join(output_dir, e.name)):
                print(f"🔍 {e.name}: {' '.join(argv)}")
        return True

    failed = []
    for experiment in tqdm(selected, desc="Experiments", disable=quiet):
        if not quiet:
            tqdm.write(f"\n🔄 Running: {experiment.name}")
        ok = run_experiment(experiment, output_dir, quiet)
        registry.update_experiment(experiment.name, last_run=datetime.now().isoformat(),
                                   last_status="ok" if ok else "failed")
        if not ok:
            failed.append(experiment.name)

    if not quiet:
        print_summary(selected)
        print(f"✅ Successful: {len(selected) - len(failed)}")
        print(f"❌ Failed: {len(failed)}")
        if failed:
            print(f"Failed experiments: {', '.join(failed)}")
    return not failed
