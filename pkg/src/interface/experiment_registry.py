"""
Experiment Registry

Named experiments are defined in experiments.yaml. Each one is a short list
of CLI steps plus the data alpha they run on; the registry keeps them in a
JSON file together with the status of their last run.
"""

import os
import json
import yaml
from datetime import datetime
from typing import Any, Dict, List, Optional
from dataclasses import dataclass, asdict

import numpy as np

from src.lattice.sequences import ComplexSequence

from . import config


@dataclass
class ExperimentConfig:
    """Configuration for a single named experiment."""
    name: str
    description: str
    steps: List[List[str]]  # argv lists; {alpha} and {run_dir} are substituted
    alpha: Optional[Dict[str, Any]] = None  # explicit, random or constant data
    is_active: bool = True
    created_at: Optional[str] = None
    last_run: Optional[str] = None
    last_status: Optional[str] = None


def make_alpha(spec: Dict[str, Any]) -> ComplexSequence:
    """
    Builds the data of an experiment.

    Accepted forms:
        {"offset": int, "values": [[re, im], ...]}
        {"random": {"K": int, "norm": float, "p": float, "seed": int}}
        {"constant": {"K": int, "re": float, "im": float}}
    """
    if "random" in spec:
        r = spec["random"]
        K = int(r["K"])
        p = float(r.get("p", 2.0))
        rng = np.random.default_rng(int(r.get("seed", 0)))
        values = rng.normal(size=2 * K + 1) + 1j * rng.normal(size=2 * K + 1)
        values *= float(r["norm"]) / np.sum(np.abs(values) ** p) ** (1.0 / p)
        return ComplexSequence.from_dense(values)
    if "constant" in spec:
        c = spec["constant"]
        return ComplexSequence.constant(int(c["K"]), complex(float(c["re"]), float(c.get("im", 0.0))))
    if "offset" in spec and "values" in spec:
        return ComplexSequence(int(spec["offset"]), np.array([complex(re, im) for re, im in spec["values"]]))
    raise ValueError(f"Unrecognized alpha specification with keys {sorted(spec)}.")


class ExperimentRegistry:
    """Manages the named experiments and their last run status."""

    def __init__(self, registry_file: str = config.REGISTRY_FILE):
        self.registry_file = registry_file
        self.experiments: Dict[str, ExperimentConfig] = {}
        self._load_registry()

    def _load_registry(self):
        """Load the experiment registry from file."""
        if not os.path.exists(self.registry_file):
            return
        try:
            with open(self.registry_file, 'r') as f:
                data = json.load(f)
            for experiment_data in data.get('experiments', []):
                experiment = ExperimentConfig(**experiment_data)
                self.experiments[experiment.name] = experiment
        except (OSError, ValueError, TypeError) as e:
            print(f"Error loading experiment registry: {e}")
            self.experiments = {}

    def _save_registry(self):
        """Save the experiment registry to file."""
        parent = os.path.dirname(self.registry_file)
        if parent:
            os.makedirs(parent, exist_ok=True)
        with open(self.registry_file, 'w') as f:
            json.dump({
                'experiments': [asdict(e) for e in self.experiments.values()]
            }, f, indent=2)

    def load_experiments_from_yaml(self, experiments_file: str = config.EXPERIMENTS_FILE) -> List[str]:
        """Load experiment definitions from YAML; returns the names of the active ones."""
        if not os.path.exists(experiments_file):
            raise FileNotFoundError(f"Experiments file '{experiments_file}' not found.")
        with open(experiments_file, 'r') as f:
            data = yaml.safe_load(f) or {}

        added: List[str] = []
        for name, spec in (data.get('experiments') or {}).items():
            if not spec.get('is_active', True):
                continue
            steps = spec.get('steps')
            if not steps or not all(isinstance(s, list) and s for s in steps):
                raise ValueError(f"Experiment '{name}' needs a nonempty list of argv steps.")
            experiment = ExperimentConfig(
                name=name,
                description=spec.get('description', ''),
                steps=[[str(a) for a in s] for s in steps],
                alpha=spec.get('alpha'),
                is_active=True,
            )
            existing = self.experiments.get(name)
            if existing is not None:
                experiment.created_at = existing.created_at
                experiment.last_run = existing.last_run
                experiment.last_status = existing.last_status
            else:
                experiment.created_at = datetime.now().isoformat()
            self.experiments[name] = experiment
            added.append(name)

        self._save_registry()
        return added

    def get_experiment(self, name: str) -> Optional[ExperimentConfig]:
        return self.experiments.get(name)

    def get_active_experiments(self) -> List[ExperimentConfig]:
        return [e for e in self.experiments.values() if e.is_active]

    def list_experiments(self) -> List[Dict]:
        return [
            {
                'name': e.name,
                'description': e.description,
                'steps': len(e.steps),
                'last_run': e.last_run,
                'last_status': e.last_status,
            }
            for e in self.experiments.values()
        ]

    def update_experiment(self, name: str, **kwargs) -> bool:
        if name not in self.experiments:
            return False
        experiment = self.experiments[name]
        for key, value in kwargs.items():
            if hasattr(experiment, key):
                setattr(experiment, key, value)
        self._save_registry()
        return True
