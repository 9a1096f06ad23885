"""Python access to the safe CMA-ES core."""

import json

from ._core import (
    RNG_TAG,
    Error,
    GprModel,
    benchmark_names,
    chi2_cdf,
    chi2_ppf,
    default_params,
    eig_sym,
    eval_benchmark,
    project,
    rbf_kernel,
    sqrt_spd,
)
from . import _core


def run_trial(config, trial=0):
    """Run one trial; `config` uses the same keys as the CLI JSON file."""
    return _core.run_trial(json.dumps(config), trial)


def run_experiment(config, out=""):
    return _core.run_experiment(json.dumps(config), out)


__all__ = [
    "RNG_TAG",
    "Error",
    "GprModel",
    "benchmark_names",
    "chi2_cdf",
    "chi2_ppf",
    "default_params",
    "eig_sym",
    "eval_benchmark",
    "project",
    "rbf_kernel",
    "run_experiment",
    "run_trial",
    "sqrt_spd",
]
