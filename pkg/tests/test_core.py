import json
import math

import numpy as np
import pytest

from pla.core import (
    ConfigError,
    ExperimentConfig,
    c_check,
    config_to_dict,
    delta_radius,
    load_config,
    log43,
    make_rng,
    n_zero,
    replication_seed,
    theorem_constants,
    validate_config,
)

from .conftest import REFERENCE, market_1x1, raw_1x1


def test_minimal_instance_is_valid():
    cfg = validate_config(raw_1x1())
    assert cfg.market.m == cfg.market.n == 1
    assert cfg.horizon == 100
    assert cfg.epsilon == 0.05


def test_cost_above_pmax_is_reported_with_path():
    raw = raw_1x1()
    raw["market"]["C"] = [[2.0]]
    with pytest.raises(ConfigError) as err:
        validate_config(raw)
    assert any("C[0][0] exceeds p_max" in e for e in err.value.errors)


def test_small_inventory_bound_rejected():
    raw = raw_1x1()
    raw["market"]["I_max"] = 0.5
    with pytest.raises(ConfigError) as err:
        validate_config(raw)
    assert any("I_max < 1" in e for e in err.value.errors)


def test_every_violation_is_reported():
    raw = raw_1x1(horizon=5, epsilon=2.0)
    raw["market"]["C"] = [[2.0]]
    raw["market"]["gamma"] = [-1.0]
    raw["demand"]["noise"]["atoms"][0]["prob"] = 0.5
    with pytest.raises(ConfigError) as err:
        validate_config(raw)
    text = "\n".join(err.value.errors)
    for needle in ("C[0][0]", "gamma", "horizon", "epsilon", "probabilities"):
        assert needle in text, needle
    assert len(err.value.errors) >= 5


def test_infeasible_support_rejected():
    raw = raw_1x1()
    raw["demand"]["noise"]["atoms"] = [{"offset": [-0.5], "prob": 0.5}, {"offset": [0.5], "prob": 0.5}]
    # a - b*p_max - 0.5 = -0.5 < 0
    with pytest.raises(ConfigError, match="support infeasible"):
        validate_config(raw)


def test_round_trip_is_idempotent(reference):
    again = validate_config(config_to_dict(reference))
    assert config_to_dict(again) == config_to_dict(reference)
    assert json.loads(json.dumps(config_to_dict(again))) == config_to_dict(reference)


def test_load_config_reports_bad_json(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text("{not json")
    with pytest.raises(ConfigError, match="not valid JSON"):
        load_config(path)


def test_c_check_at_unit_price():
    assert c_check(1.0) == pytest.approx(1.0)


def test_n_zero_at_four_thirds():
    assert n_zero(4.0 / 3.0, 1.0) == 12


def test_delta_formula():
    market = market_1x1()
    expected = math.sqrt(2.0 * math.log(48 * 3 * 100 / 0.05))
    assert delta_radius(100, 0.05, market) == pytest.approx(expected, rel=1e-15)


def test_delta_monotone_in_horizon_and_confidence():
    market = market_1x1()
    grid = [[delta_radius(T, eps, market) for eps in (0.2, 0.1, 0.05, 0.01)] for T in (10, 100, 1000, 10**5)]
    grid = np.array(grid)
    assert np.all(np.diff(grid, axis=0) >= 0)
    assert np.all(np.diff(grid, axis=1) >= 0)


def test_theorem_constants_reference(reference):
    tc = theorem_constants(reference)
    assert tc.n_0 == math.ceil(6 * (log43(32768) + log43(4.0) + 1))
    assert tc.L_W == pytest.approx(5 * 5 + 2 * 1 * 4)
    assert tc.delta_K == pytest.approx(math.sqrt(2 * math.log(48 * 9 * 32768 / 0.05)) * 4 * 5)


def test_lipschitz_override():
    cfg = validate_config(raw_1x1(L_W=7.5))
    assert theorem_constants(cfg).L_W == 7.5


def test_with_updates_revalidates(tiny_config):
    assert tiny_config.with_updates(seed=9).seed == 9
    with pytest.raises(ConfigError):
        tiny_config.with_updates(epsilon=0.0)


def test_replication_streams_are_independent_and_reproducible():
    assert replication_seed(7, 3) == 10
    assert replication_seed(2**64 - 1, 1) == 0
    a = make_rng(replication_seed(7, 0)).random(5)
    b = make_rng(replication_seed(7, 1)).random(5)
    assert np.array_equal(a, make_rng(7).random(5))
    assert not np.array_equal(a, b)


def test_reference_file_loads():
    cfg = load_config(REFERENCE)
    assert isinstance(cfg, ExperimentConfig)
    assert (cfg.market.m, cfg.market.n) == (2, 2)
