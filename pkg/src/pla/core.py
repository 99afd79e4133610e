"""Shared market types, config ingestion and the learner's global constants."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Mapping

import numpy as np

from .environment import DemandModel, FiniteSupport, TruncatedGaussian

DEFAULT_EPSILON = 0.05
_LOG_43 = math.log(4.0 / 3.0)


def log43(x: float) -> float:
    """Logarithm in base 4/3."""
    return math.log(x) / _LOG_43


class ConfigError(ValueError):
    """Raised by :func:`validate_config`; ``errors`` lists every violated rule."""

    def __init__(self, errors: list[str]):
        self.errors = list(errors)
        super().__init__("invalid config:\n  " + "\n  ".join(self.errors))


def _frozen(a, dtype=float) -> np.ndarray:
    arr = np.array(a, dtype=dtype)
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True, eq=False)
class MarketParams:
    """Known problem parameters: inventory costs, supply costs and declared bounds."""

    gamma: np.ndarray
    C: np.ndarray
    p_max: float
    I_max: float
    gamma_max: float
    a_max: float
    b_max: float

    def __post_init__(self):
        object.__setattr__(self, "gamma", _frozen(self.gamma))
        object.__setattr__(self, "C", _frozen(np.atleast_2d(self.C)))

    @property
    def m(self) -> int:
        return self.C.shape[0]

    @property
    def n(self) -> int:
        return self.C.shape[1]

    def check_inventory(self, I, tol: float = 1e-9) -> np.ndarray:
        I = np.asarray(I, dtype=float)
        if I.shape != (self.m,):
            raise ValueError(f"inventory must have shape ({self.m},), got {I.shape}")
        if np.any(I < -tol) or I.sum() > self.I_max + tol:
            raise ValueError(f"inventory {I} outside {{I >= 0, sum(I) <= {self.I_max}}}")
        return I


@dataclass(frozen=True)
class TheoremConstants:
    epsilon: float
    delta_K: float
    n_0: int
    C_check: float
    L_W: float


@dataclass(frozen=True)
class ExperimentConfig:
    market: MarketParams
    demand: DemandModel
    horizon: int
    epsilon: float = DEFAULT_EPSILON
    seed: int = 0
    L_W: float | None = None
    output: str = "out"
    replications: int = 1
    radius_scale: float = 1.0
    extra: dict = field(default_factory=dict, compare=False)

    def with_updates(self, **changes) -> "ExperimentConfig":
        raw = config_to_dict(self)
        for key, value in changes.items():
            raw[key] = value
        return validate_config(raw)


# -- constants -------------------------------------------------------------


def c_check(p_max: float) -> float:
    return log43(p_max) + 1.0


def n_zero(T: float, p_max: float) -> int:
    """Minimum complementary-sample count, rounded up to a whole period count."""
    return math.ceil(6.0 * (log43(T) + c_check(p_max)) - 1e-9)


def delta_radius(T: float, epsilon: float, market: MarketParams) -> float:
    mn = market.m * market.n
    scale = max(market.p_max, market.gamma_max) * market.I_max
    return math.sqrt(2.0 * math.log(48.0 * (2 * mn + 1) * T / epsilon)) * scale


def default_lipschitz(market: MarketParams) -> float:
    return market.I_max * (1.0 + market.p_max) + market.n * market.b_max * market.p_max


def theorem_constants(config: ExperimentConfig) -> TheoremConstants:
    market = config.market
    L_W = config.L_W if config.L_W is not None else default_lipschitz(market)
    return TheoremConstants(
        epsilon=config.epsilon,
        delta_K=delta_radius(config.horizon, config.epsilon, market),
        n_0=n_zero(config.horizon, market.p_max),
        C_check=c_check(market.p_max),
        L_W=L_W,
    )


# -- randomness ------------------------------------------------------------


def replication_seed(master_seed: int, replication: int) -> int:
    """Seed of replication ``r`` under master seed ``s``: ``s + r`` (mod 2**64)."""
    return (int(master_seed) + int(replication)) % 2**64


def make_rng(seed: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(int(seed)))


# -- validation ------------------------------------------------------------


def _vector(raw, path, errors, length=None):
    try:
        arr = np.array(raw, dtype=float)
    except (TypeError, ValueError):
        errors.append(f"{path}: expected a list of numbers")
        return None
    if arr.ndim != 1:
        errors.append(f"{path}: expected a flat list, got shape {arr.shape}")
        return None
    if length is not None and arr.shape[0] != length:
        errors.append(f"{path}: expected length {length}, got {arr.shape[0]}")
        return None
    if not np.all(np.isfinite(arr)):
        errors.append(f"{path}: non-finite entry")
        return None
    return arr


def _number(raw: Mapping, key: str, path: str, errors: list[str], default=None):
    if key not in raw:
        if default is None:
            errors.append(f"{path}{key}: missing")
        return default
    value = raw[key]
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        errors.append(f"{path}{key}: expected a number, got {value!r}")
        return None
    if not math.isfinite(value):
        errors.append(f"{path}{key}: non-finite value")
        return None
    return float(value)


def _count(raw: Mapping, key: str, errors: list[str], default=None, minimum=1):
    if key not in raw:
        if default is None:
            errors.append(f"{key}: missing")
        return default
    value = raw[key]
    if isinstance(value, bool) or not isinstance(value, int):
        errors.append(f"{key}: expected an integer, got {value!r}")
        return None
    if value < minimum:
        errors.append(f"{key}: must be >= {minimum}, got {value}")
        return None
    return value


def _validate_market(raw, errors: list[str]):
    if not isinstance(raw, Mapping):
        errors.append("market: expected an object")
        return None
    C = None
    try:
        C = np.array(raw.get("C"), dtype=float)
    except (TypeError, ValueError):
        errors.append("market.C: expected a rectangular matrix of numbers")
    if C is not None and (C.ndim != 2 or C.size == 0):
        errors.append(f"market.C: expected a non-empty m x n matrix, got shape {C.shape}")
        C = None
    m = n = None
    if C is not None:
        m, n = C.shape
        for key, value in (("m", m), ("n", n)):
            if key in raw and raw[key] != value:
                errors.append(f"market.{key}: declared {raw[key]} but C implies {value}")
    gamma = _vector(raw.get("gamma"), "market.gamma", errors, length=m)

    bounds = {}
    for key in ("p_max", "I_max", "gamma_max", "a_max", "b_max"):
        bounds[key] = _number(raw, key, "market.", errors)
    for key, value in bounds.items():
        if value is not None and value < 1.0:
            errors.append(f"market.{key}: {key} < 1 violates the bound normalization (declared bounds must be >= 1)")

    p_max = bounds["p_max"]
    if C is not None and p_max is not None:
        for (i, j), c in np.ndenumerate(C):
            if not math.isfinite(c):
                errors.append(f"market.C[{i}][{j}]: non-finite value")
            elif c < 0:
                errors.append(f"market.C[{i}][{j}] is negative")
            elif c > p_max:
                errors.append(f"market.C[{i}][{j}] exceeds p_max ({c} > {p_max})")
    if gamma is not None:
        for i, g in enumerate(gamma):
            if g < 0:
                errors.append(f"market.gamma[{i}] is negative")
            elif bounds["gamma_max"] is not None and g > bounds["gamma_max"]:
                errors.append(f"market.gamma[{i}] exceeds gamma_max ({g} > {bounds['gamma_max']})")

    if C is None or gamma is None or any(v is None for v in bounds.values()):
        return None
    return MarketParams(gamma=gamma, C=C, **bounds)


def _validate_noise(raw, n, errors: list[str]):
    path = "demand.noise"
    if raw is None:
        return FiniteSupport.deterministic(n) if n is not None else None
    if not isinstance(raw, Mapping):
        errors.append(f"{path}: expected an object")
        return None
    kind = raw.get("type")
    if kind == "finite_support":
        atoms = raw.get("atoms")
        if not isinstance(atoms, list) or not atoms:
            errors.append(f"{path}.atoms: expected a non-empty list")
            return None
        offsets, probs = [], []
        for k, atom in enumerate(atoms):
            if not isinstance(atom, Mapping):
                errors.append(f"{path}.atoms[{k}]: expected an object")
                continue
            off = _vector(atom.get("offset"), f"{path}.atoms[{k}].offset", errors, length=n)
            prob = _number(atom, "prob", f"{path}.atoms[{k}].", errors)
            if off is not None and prob is not None:
                offsets.append(off)
                probs.append(prob)
        if len(offsets) != len(atoms):
            return None
        noise = FiniteSupport(np.array(offsets), np.array(probs))
    elif kind == "truncated_gaussian":
        sigma = _vector(raw.get("sigma"), f"{path}.sigma", errors, length=n)
        lower = _vector(raw.get("lower"), f"{path}.lower", errors, length=n)
        upper = _vector(raw.get("upper"), f"{path}.upper", errors, length=n)
        if sigma is None or lower is None or upper is None:
            return None
        noise = TruncatedGaussian(sigma, lower, upper)
    else:
        errors.append(f"{path}.type: expected 'finite_support' or 'truncated_gaussian', got {kind!r}")
        return None
    errors.extend(f"{path}: {msg}" for msg in noise.problems())
    return noise


def _validate_demand(raw, market: MarketParams | None, n, errors: list[str]):
    if not isinstance(raw, Mapping):
        errors.append("demand: expected an object")
        return None
    a = _vector(raw.get("a"), "demand.a", errors, length=n)
    b = _vector(raw.get("b"), "demand.b", errors, length=n)
    noise = _validate_noise(raw.get("noise"), n, errors)
    if a is None or b is None or noise is None:
        return None
    model = DemandModel(a=a, b=b, noise=noise)
    if market is not None:
        errors.extend(f"demand: {msg}" for msg in model.problems(market.p_max, market.a_max, market.b_max))
    return model


def validate_config(raw: Mapping[str, Any]) -> ExperimentConfig:
    """Validate a parsed config mapping, reporting every violated rule at once."""
    errors: list[str] = []
    if not isinstance(raw, Mapping):
        raise ConfigError(["config: expected a JSON object"])
    market = _validate_market(raw.get("market"), errors)
    n = market.n if market is not None else None
    if n is None and isinstance(raw.get("market"), Mapping):
        try:
            n = np.array(raw["market"].get("C"), dtype=float).shape[1]
        except (TypeError, ValueError, IndexError):
            n = None
    demand = _validate_demand(raw.get("demand"), market, n, errors)

    T = _count(raw, "horizon", errors)
    epsilon = _number(raw, "epsilon", "", errors, default=DEFAULT_EPSILON)
    if epsilon is not None and not 0.0 < epsilon < 1.0:
        errors.append(f"epsilon: must lie in (0, 1), got {epsilon}")
    seed = _count(raw, "seed", errors, default=0, minimum=0)
    if seed is not None and seed >= 2**64:
        errors.append("seed: must fit in 64 bits")
    reps = _count(raw, "replications", errors, default=1)
    L_W = raw.get("L_W")
    if L_W is not None:
        L_W = _number(raw, "L_W", "", errors)
        if L_W is not None and L_W <= 0:
            errors.append("L_W: must be positive")
    radius_scale = _number(raw, "radius_scale", "", errors, default=1.0)
    if radius_scale is not None and radius_scale <= 0:
        errors.append("radius_scale: must be positive")
    output = raw.get("output", "out")
    if not isinstance(output, str):
        errors.append("output: expected a path string")

    if T is not None and market is not None:
        need = 9 * (market.m * market.n + 1)
        if T < need:
            errors.append(f"horizon: T={T} < 3*(mn+1)*3 = {need} initialization periods")

    if errors:
        raise ConfigError(errors)
    known = {"market", "demand", "horizon", "epsilon", "seed", "replications", "L_W", "output", "radius_scale"}
    extra = {k: v for k, v in raw.items() if k not in known}
    return ExperimentConfig(
        market=market,
        demand=demand,
        horizon=T,
        epsilon=epsilon,
        seed=seed,
        L_W=L_W,
        output=output,
        replications=reps,
        radius_scale=radius_scale,
        extra=extra,
    )


def config_to_dict(config: ExperimentConfig) -> dict[str, Any]:
    mk = config.market
    out = {
        "market": {
            "m": mk.m,
            "n": mk.n,
            "gamma": mk.gamma.tolist(),
            "C": mk.C.tolist(),
            "p_max": mk.p_max,
            "I_max": mk.I_max,
            "gamma_max": mk.gamma_max,
            "a_max": mk.a_max,
            "b_max": mk.b_max,
        },
        "demand": config.demand.to_dict(),
        "horizon": config.horizon,
        "epsilon": config.epsilon,
        "seed": config.seed,
        "L_W": config.L_W,
        "output": config.output,
        "replications": config.replications,
        "radius_scale": config.radius_scale,
    }
    out.update(config.extra)
    return out


def load_config(path: str | Path) -> ExperimentConfig:
    try:
        raw = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise ConfigError([f"{path}: not valid JSON ({exc})"]) from exc
    return validate_config(raw)
