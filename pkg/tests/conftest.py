from pathlib import Path

import numpy as np
import pytest

from pla.core import MarketParams, load_config, validate_config
from pla.environment import DemandModel, FiniteSupport

ROOT = Path(__file__).resolve().parents[1]
REFERENCE = ROOT / "configs" / "reference.json"


def market_1x1(gamma=0.0, C=0.0, p_max=1.0, I_max=1.0):
    return MarketParams(gamma=[gamma], C=[[C]], p_max=p_max, I_max=I_max, gamma_max=1.0, a_max=1.0, b_max=1.0)


def noiseless(a, b):
    a = np.atleast_1d(np.asarray(a, dtype=float))
    return DemandModel(a, np.atleast_1d(b), FiniteSupport.deterministic(len(a)))


def raw_1x1(**overrides):
    raw = {
        "market": {"gamma": [0.0], "C": [[0.0]], "p_max": 1.0, "I_max": 1.0,
                   "gamma_max": 1.0, "a_max": 1.0, "b_max": 1.0},
        "demand": {"a": [1.0], "b": [1.0],
                   "noise": {"type": "finite_support", "atoms": [{"offset": [0.0], "prob": 1.0}]}},
        "horizon": 100,
        "seed": 0,
    }
    raw.update(overrides)
    return raw


@pytest.fixture
def reference():
    return load_config(REFERENCE)


@pytest.fixture
def tiny_config():
    return validate_config(raw_1x1(horizon=1024))
