"""Ground-truth linear-noisy demand and per-period realized cost."""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
from scipy import stats

from .transport import AllocationResult, solve_allocation

_PROB_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class FiniteSupport:
    """Noise with joint atoms ``offsets[k]`` (n-vectors) taken w.p. ``probs[k]``."""

    offsets: np.ndarray
    probs: np.ndarray

    def __post_init__(self):
        offsets = np.atleast_2d(np.asarray(self.offsets, dtype=float))
        probs = np.asarray(self.probs, dtype=float)
        offsets.flags.writeable = False
        probs.flags.writeable = False
        object.__setattr__(self, "offsets", offsets)
        object.__setattr__(self, "probs", probs)

    @classmethod
    def deterministic(cls, n: int) -> "FiniteSupport":
        return cls(np.zeros((1, n)), np.ones(1))

    @classmethod
    def symmetric_two_point(cls, spread) -> "FiniteSupport":
        spread = np.asarray(spread, dtype=float)
        return cls(np.stack([-spread, spread]), np.array([0.5, 0.5]))

    @property
    def dim(self) -> int:
        return self.offsets.shape[1]

    @property
    def min_offset(self) -> np.ndarray:
        return self.offsets.min(axis=0)

    @property
    def variance(self) -> np.ndarray:
        return self.probs @ (self.offsets**2)

    def problems(self) -> list[str]:
        out = []
        if len(self.probs) != len(self.offsets):
            out.append("one probability per atom required")
            return out
        if np.any(self.probs < 0):
            out.append("negative atom probability")
        if abs(self.probs.sum() - 1.0) > _PROB_TOL:
            out.append(f"atom probabilities sum to {self.probs.sum()!r}, not 1")
        mean = self.probs @ self.offsets
        if np.any(np.abs(mean) > _PROB_TOL):
            out.append(f"noise mean {mean.tolist()} is not the zero vector")
        return out

    def sample(self, rng: np.random.Generator) -> np.ndarray:
        k = rng.choice(len(self.probs), p=self.probs) if len(self.probs) > 1 else 0
        return self.offsets[k]

    def to_dict(self) -> dict:
        return {
            "type": "finite_support",
            "atoms": [
                {"offset": off.tolist(), "prob": float(pr)}
                for off, pr in zip(self.offsets, self.probs)
            ],
        }


@dataclass(frozen=True, eq=False)
class TruncatedGaussian:
    """Independent per-consumer Gaussians truncated to ``[lower, upper]``, then
    shifted by the truncated mean so the offset has mean exactly zero."""

    sigma: np.ndarray
    lower: np.ndarray
    upper: np.ndarray

    def __post_init__(self):
        for name in ("sigma", "lower", "upper"):
            arr = np.asarray(getattr(self, name), dtype=float)
            arr.flags.writeable = False
            object.__setattr__(self, name, arr)

    @property
    def dim(self) -> int:
        return len(self.sigma)

    @cached_property
    def _dist(self):
        return stats.truncnorm(self.lower / self.sigma, self.upper / self.sigma, scale=self.sigma)

    @cached_property
    def mean_shift(self) -> np.ndarray:
        return np.asarray(self._dist.mean(), dtype=float)

    @property
    def min_offset(self) -> np.ndarray:
        return self.lower - self.mean_shift

    def problems(self) -> list[str]:
        out = []
        if np.any(self.sigma <= 0):
            out.append("sigma must be positive")
        if np.any(self.lower >= self.upper):
            out.append("truncation requires lower < upper")
        return out

    def sample(self, rng: np.random.Generator) -> np.ndarray:
        return self._dist.rvs(random_state=rng) - self.mean_shift

    def to_dict(self) -> dict:
        return {
            "type": "truncated_gaussian",
            "sigma": self.sigma.tolist(),
            "lower": self.lower.tolist(),
            "upper": self.upper.tolist(),
        }


@dataclass(frozen=True, eq=False)
class DemandModel:
    """``D = a - b * p + N`` with i.i.d. zero-mean noise ``N``."""

    a: np.ndarray
    b: np.ndarray
    noise: FiniteSupport | TruncatedGaussian

    def __post_init__(self):
        for name in ("a", "b"):
            arr = np.asarray(getattr(self, name), dtype=float)
            arr.flags.writeable = False
            object.__setattr__(self, name, arr)

    @property
    def n(self) -> int:
        return len(self.a)

    @property
    def finite(self) -> bool:
        return isinstance(self.noise, FiniteSupport)

    def mean_demand(self, p: float) -> np.ndarray:
        return self.a - self.b * p

    def problems(self, p_max: float, a_max: float, b_max: float) -> list[str]:
        out = []
        if self.noise.dim != self.n:
            out.append(f"noise dimension {self.noise.dim} != n={self.n}")
            return out
        if np.any(self.a < 0) or np.any(self.b < 0):
            out.append("a and b must be nonnegative")
        if np.max(self.a) > a_max:
            out.append(f"max(a)={np.max(self.a)} exceeds a_max={a_max}")
        if np.max(self.b) > b_max:
            out.append(f"max(b)={np.max(self.b)} exceeds b_max={b_max}")
        if not self.noise.problems():
            floor = self.a - self.b * p_max + self.noise.min_offset
            for j in np.flatnonzero(floor < -1e-12):
                out.append(
                    f"support infeasible for consumer {j}: "
                    f"a - b*p_max + min offset = {floor[j]:.6g} < 0"
                )
        return out

    def validated(self, p_max: float, a_max: float, b_max: float) -> "DemandModel":
        problems = self.noise.problems() + self.problems(p_max, a_max, b_max)
        if problems:
            raise ValueError("; ".join(problems))
        return self

    def scenarios(self, p: float):
        """Exact demand atoms at price ``p`` as ``(D, prob)`` pairs (finite noise only)."""
        if not self.finite:
            raise TypeError("exact scenario enumeration needs FiniteSupport noise")
        base = self.mean_demand(p)
        return [(base + off, float(pr)) for off, pr in zip(self.noise.offsets, self.noise.probs)]

    def to_dict(self) -> dict:
        return {"a": self.a.tolist(), "b": self.b.tolist(), "noise": self.noise.to_dict()}


def sample_demand(model: DemandModel, p: float, rng: np.random.Generator) -> np.ndarray:
    # support feasibility is checked at model validation; clip only float dust
    return np.maximum(model.mean_demand(p) + model.noise.sample(rng), 0.0)


def realized_cost(I, p: float, D, market) -> float:
    return realized_outcome(I, p, D, market)[0]


def realized_outcome(I, p: float, D, market) -> tuple[float, AllocationResult]:
    """``<gamma, I> + g(I, p, D)`` along with the allocation that attains it."""
    I = np.asarray(I, dtype=float)
    alloc = solve_allocation(I, D, p, market.C)
    return float(market.gamma @ I) + alloc.objective, alloc


@dataclass
class ScenarioHistory:
    """Weighted distinct ``(p, D)`` observations; identical pairs merge."""

    entries: dict = field(default_factory=dict)

    def record(self, p: float, D) -> None:
        D = np.asarray(D, dtype=float)
        key = (float(p), D.tobytes())
        if key in self.entries:
            self.entries[key][2] += 1
        else:
            self.entries[key] = [float(p), D.copy(), 1]

    def __len__(self) -> int:
        return len(self.entries)

    @property
    def total_weight(self) -> int:
        return sum(e[2] for e in self.entries.values())

    def at_price(self, p: float) -> list[tuple[np.ndarray, int]]:
        return [(e[1], e[2]) for e in self.entries.values() if e[0] == float(p)]

    def items(self):
        return [tuple(e) for e in self.entries.values()]


def record_scenario(history: ScenarioHistory, p: float, D) -> ScenarioHistory:
    history.record(p, D)
    return history
