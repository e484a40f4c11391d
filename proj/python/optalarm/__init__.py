"""Collision alarms, expected-cost scoring and error bounds.

Scenario and benchmark configs are plain dicts with the same flat keys as the
``optalarm`` CLI's ``--config`` file. Missing keys keep their defaults.
"""

import json

from ._core import (
    AlarmResult,
    CostConfig,
    HorizonConfig,
    JointBelief,
    OrientedRect,
    Pose,
    RegressionModel,
    Scenario,
    TrainingReport,
    __version__,
    eac_bound,
    estimate_ttc,
    expected_value_alarm,
    hoeffding_p_eps,
    inflate,
    mc_alarm,
    mc_eac_bound,
    mc_eac_bound_at,
    mc_optimal_eps,
    optimal_cutoff,
    optimal_ec_ceiling,
    rect_overlap,
    regression_alarm,
    rmse_eac_bound,
    unscented_alarm,
)
from . import _core

__all__ = [
    "AlarmResult",
    "CostConfig",
    "HorizonConfig",
    "JointBelief",
    "OrientedRect",
    "Pose",
    "RegressionModel",
    "Scenario",
    "TrainingReport",
    "__version__",
    "eac_bound",
    "estimate_ttc",
    "expected_value_alarm",
    "generate_batch",
    "generate_scenario",
    "hoeffding_p_eps",
    "horizon",
    "inflate",
    "make_belief",
    "mc_alarm",
    "mc_eac_bound",
    "mc_eac_bound_at",
    "mc_optimal_eps",
    "optimal_cutoff",
    "optimal_ec_ceiling",
    "rect_overlap",
    "regression_alarm",
    "rmse_eac_bound",
    "run_benchmark",
    "scenario_config",
    "train_regression",
    "unscented_alarm",
]


def _dump(config, overrides):
    merged = dict(config or {})
    merged.update(overrides)
    return json.dumps(merged)


def scenario_config(config=None, **overrides):
    """Full scenario config with defaults filled in."""
    return json.loads(_core._config_json(_dump(config, overrides)))


def horizon(config=None, **overrides):
    return _core._horizon(_dump(config, overrides))


def generate_scenario(index, config=None, **overrides):
    return _core._generate_scenario(_dump(config, overrides), index)


def generate_batch(count, config=None, threads=1, **overrides):
    return _core._generate_batch(_dump(config, overrides), count, threads)


def make_belief(mean, covariance, config=None, **overrides):
    """Gaussian belief over the joint state, with motion models from the config."""
    return _core._make_belief(mean, covariance, _dump(config, overrides))


def train_regression(n=100000, label_samples=1000, hidden=150, epochs=200,
                     ttc_surrogate=False, threads=1, config=None, **overrides):
    """Returns (RegressionModel, TrainingReport)."""
    return _core._train(_dump(config, overrides), n, label_samples, hidden, epochs,
                        ttc_surrogate, threads)


def run_benchmark(config=None, **overrides):
    """Runs the benchmark and returns the report as a dict."""
    return json.loads(_core._run_benchmark(_dump(config, overrides)))
