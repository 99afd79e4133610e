import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pla.core import validate_config
from pla.harness import (
    baseline_ucb_grid,
    compute_regret,
    fit_slope,
    grid_prices,
    monte_carlo_model,
    read_steps_csv,
    write_steps_csv,
)
from pla.meta import run
from pla.saa import global_optimum
from pla.simulate import StepLog

from .conftest import raw_1x1


def _log(t, p, I):
    return StepLog(t, 0, 3, p, np.array([I]), np.array([1.0 - p]), np.zeros((1, 1)), 0.0)


def test_optimal_decisions_have_zero_regret(tiny_config):
    oracle = global_optimum(tiny_config.demand, tiny_config.market)
    logs = [_log(t, oracle.p_star, oracle.I_star[0]) for t in range(1, 6)]
    series = compute_regret(logs, oracle, tiny_config.demand, tiny_config.market)
    np.testing.assert_allclose(series.cumulative, 0.0, atol=1e-12)


def test_regret_jump(tiny_config):
    oracle = global_optimum(tiny_config.demand, tiny_config.market)
    # Q(I=0.5, p=0.3) = -0.15, W* = -0.25
    logs = [_log(1, oracle.p_star, oracle.I_star[0]), _log(2, 0.3, 0.5)]
    series = compute_regret(logs, oracle, tiny_config.demand, tiny_config.market)
    assert series.instantaneous[1] == pytest.approx(0.1, abs=1e-6)


def test_noiseless_run_is_sublinear(tiny_config):
    res = run(tiny_config)
    oracle = global_optimum(tiny_config.demand, tiny_config.market)
    reg = compute_regret(res.logs, oracle, tiny_config.demand, tiny_config.market).cumulative
    T = len(reg)
    assert np.isfinite(reg[-1])
    assert reg[-1] / T < reg[T // 2 - 1] / (T // 2)
    assert np.all(np.diff(reg) >= -1e-6)


def test_regret_is_additive(reference):
    cfg = reference.with_updates(horizon=600)
    logs = run(cfg).logs
    oracle = global_optimum(cfg.demand, cfg.market)
    whole = compute_regret(logs, oracle, cfg.demand, cfg.market).final
    parts = sum(compute_regret(chunk, oracle, cfg.demand, cfg.market).final for chunk in (logs[:250], logs[250:]))
    assert whole == pytest.approx(parts, rel=1e-12)
    assert all(s.regret >= -1e-6 for s in logs)


def test_continuous_noise_needs_monte_carlo(tiny_config):
    raw = raw_1x1(horizon=200)
    raw["demand"] = {"a": [1.0], "b": [0.5],
                     "noise": {"type": "truncated_gaussian", "sigma": [0.1], "lower": [-0.2], "upper": [0.2]}}
    cfg = validate_config(raw)
    logs = run(cfg).logs
    with pytest.raises(ValueError, match="mc-oracle"):
        compute_regret(logs, global_optimum(tiny_config.demand, tiny_config.market), cfg.demand, cfg.market)
    model = monte_carlo_model(cfg.demand, 200, np.random.default_rng(0))
    assert abs(model.noise.probs @ model.noise.offsets).max() < 1e-12
    series = compute_regret(logs, global_optimum(model, cfg.market), model, cfg.market)
    assert np.isfinite(series.final)


@pytest.mark.parametrize("power", [0.5, 1.0, 2.0 / 3.0])
def test_fit_slope_synthetic(power):
    t = np.arange(1, 5001)
    assert fit_slope(3.0 * t**power, (10, 5000)) == pytest.approx(power, abs=1e-9)


def test_fit_slope_empty_window_is_nan():
    assert math.isnan(fit_slope(np.zeros(100), (1, 100)))


@settings(max_examples=50, deadline=None)
@given(c=st.floats(1e-3, 1e3), power=st.floats(0.1, 1.5))
def test_fit_slope_scale_invariant(c, power):
    t = np.arange(1, 2001)
    series = t**power * (1 + 0.1 * np.sin(t))
    assert fit_slope(c * series, (5, 2000)) == pytest.approx(fit_slope(series, (5, 2000)), abs=1e-9)


def test_steps_csv_round_trip(tmp_path, reference):
    cfg = reference.with_updates(horizon=400)
    res = run(cfg, seed=3)
    oracle = global_optimum(cfg.demand, cfg.market)
    compute_regret(res.logs, oracle, cfg.demand, cfg.market)
    path = tmp_path / "steps.csv"
    write_steps_csv(path, res.logs, 2, 2, 5)
    back = read_steps_csv(path)
    assert len(back) == len(res.logs)
    for x, y in zip(res.logs, back):
        assert (x.t, x.K, x.stage, x.p, x.q_realized, x.q_oracle, x.regret) == (
            y.t, y.K, y.stage, y.p, y.q_realized, y.q_oracle, y.regret)
        assert np.array_equal(x.I, y.I) and np.array_equal(x.D, y.D) and np.array_equal(x.X, y.X)
        assert x.lcb == y.lcb or all(a == b or (math.isinf(a) and math.isinf(b)) for a, b in zip(x.lcb, y.lcb))
    path2 = tmp_path / "again.csv"
    write_steps_csv(path2, back, 2, 2, 5)
    assert path.read_bytes() == path2.read_bytes()


def test_baseline_single_arm():
    cfg = validate_config(raw_1x1(horizon=50))
    logs = baseline_ucb_grid(cfg, 1)
    assert len(logs) == 50 and {s.p for s in logs} == {0.5}


def test_baseline_converges_to_optimal_arm():
    cfg = validate_config(raw_1x1(horizon=3000, radius_scale=1e-9))
    assert grid_prices(1.0, 3)[1] == pytest.approx(0.5)
    logs = baseline_ucb_grid(cfg, 3)
    tail = [s.p for s in logs[-500:]]
    assert tail.count(0.5) == 500
