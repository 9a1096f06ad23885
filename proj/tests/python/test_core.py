import math

import numpy as np
import pytest

import safecmaes

SMALL = {"problem": "sphere", "dim": 3, "safety": "first-coordinate", "budget": 300, "trials": 1, "seed": 7}


def test_chi2_two_dof_closed_form():
    assert safecmaes.chi2_ppf(0.9, 2) == pytest.approx(2.0 * math.log(10.0), rel=1e-12)
    assert safecmaes.chi2_cdf(safecmaes.chi2_ppf(0.3, 5), 5) == pytest.approx(0.3, rel=1e-10)


def test_default_params():
    p = safecmaes.default_params(5)
    assert p["lambda"] == 8
    assert p["mu"] == 4
    assert sum(p["weights"]) == pytest.approx(1.0)


def test_benchmarks():
    assert set(safecmaes.benchmark_names()) == {"sphere", "ellipsoid", "reversed-ellipsoid", "rosenbrock"}
    assert safecmaes.eval_benchmark("sphere", np.array([1.0, 2.0])) == 5.0
    with pytest.raises(safecmaes.Error):
        safecmaes.eval_benchmark("nope", np.zeros(2))


def test_gpr_interpolates():
    x = np.array([[0.0, 1.0, -0.5], [0.0, 0.5, 1.0]])
    y = np.array([1.0, -1.0, 0.5])
    m = safecmaes.GprModel.fit([x[:, i] for i in range(3)], y, 1.0)
    for i in range(3):
        assert m.mean(x[:, i]) == pytest.approx(y[i], abs=1e-6)


def test_projection_lands_in_ball():
    z, xi, anchor = safecmaes.project(np.array([3.0, 0.0]), [np.zeros(2)], [1.0])
    assert np.linalg.norm(z) == pytest.approx(1.0)
    assert anchor == 0


def test_run_trial_is_deterministic():
    a = safecmaes.run_trial(SMALL, 0)
    b = safecmaes.run_trial(SMALL, 0)
    assert a["best_safe_f"] == b["best_safe_f"]
    assert a["evals"][-1] <= SMALL["budget"]
    assert all(x >= y for x, y in zip(a["best_safe_f"], a["best_safe_f"][1:]))


def test_bad_config_raises():
    with pytest.raises(safecmaes.Error):
        safecmaes.run_trial({**SMALL, "dim": 1})
    with pytest.raises(safecmaes.Error):
        safecmaes.run_trial({**SMALL, "no_such_key": 1})
