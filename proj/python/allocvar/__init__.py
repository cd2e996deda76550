"""Pull-count variability in multi-armed bandits.

Policies, instances and run configurations are plain dicts in the same
JSON schema the ``allocvar`` command line reads, for example::

    allocvar.run_experiment({"gap_family": {"delta": 0.5}},
                            {"kind": "ucbf", "f": {"a": 1, "gamma": 0.25, "beta": 1}},
                            T=4096, n_trials=1000)
"""

from __future__ import annotations

import json
from typing import Any, Mapping, Sequence

from . import _core
from ._core import ConfigError, ParameterError, bh_bound, divergence_decomposition, kl_gaussian

__version__ = _core.__version__

__all__ = [
    "ConfigError",
    "ParameterError",
    "bh_bound",
    "check_instance_pair",
    "divergence_decomposition",
    "exploration_value",
    "fluid_trajectory",
    "frontier_columns",
    "kl_gaussian",
    "resolve_config",
    "results_columns",
    "run",
    "run_experiment",
    "slopes_columns",
    "solve_fluid",
    "sweep_delta",
    "validate_exploration",
]


def _dump(obj: Mapping[str, Any]) -> str:
    return json.dumps(obj)


def exploration_value(f: Mapping[str, Any], t: float) -> float:
    return _core.exploration_value(_dump(f), t)


def validate_exploration(f: Mapping[str, Any]) -> dict:
    return json.loads(_core.validate_exploration(_dump(f)))


def solve_fluid(means: Sequence[float], f_t: float, t: float) -> dict:
    return json.loads(_core.solve_fluid(list(means), f_t, t))


def fluid_trajectory(means: Sequence[float], f: Mapping[str, Any], ts: Sequence[int]) -> list[dict]:
    return json.loads(_core.fluid_trajectory(list(means), _dump(f), list(ts)))


def run_experiment(instance: Mapping[str, Any], policy: Mapping[str, Any], T: int, n_trials: int,
                   seed: int = 0, threads: int = 0) -> dict:
    return json.loads(_core.run_experiment(_dump(instance), _dump(policy), T, n_trials, seed, threads))


def sweep_delta(policy: Mapping[str, Any], T: int, grid: Sequence[float], n_trials: int,
                seed: int = 0, threads: int = 0) -> dict:
    return json.loads(_core.sweep_delta(_dump(policy), T, list(grid), n_trials, seed, threads))


def check_instance_pair(policy: Mapping[str, Any], delta: float, T: int, n_trials: int,
                        seed: int = 0, threads: int = 0) -> dict:
    return json.loads(_core.check_instance_pair(_dump(policy), delta, T, n_trials, seed, threads))


def resolve_config(config: Mapping[str, Any]) -> dict:
    """Fills in defaults and validates; raises ConfigError listing bad fields."""
    return json.loads(_core.resolve_config(_dump(config)))


def run(config: Mapping[str, Any]) -> list[str]:
    """Runs a subcommand config and returns the paths it wrote."""
    return list(_core.run(_dump(config)))


results_columns = _core.results_columns
frontier_columns = _core.frontier_columns
slopes_columns = _core.slopes_columns
