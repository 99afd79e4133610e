"""Inventory optimization over scenario sets, plus the exact evaluation oracles.

``saa_argmin_inventory`` solves the learner's sample-average problem as a single
LP: the inventory vector shared by one allocation block per distinct scenario.
``exact_W`` is the same LP with the true atom probabilities as weights.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Iterable, Sequence

import numpy as np
from scipy import sparse
from scipy.optimize import linprog

from .environment import DemandModel, sample_demand
from .intervals import build_intervals
from .transport import solve_allocation

_HIGHS = {"primal_feasibility_tolerance": 1e-10, "dual_feasibility_tolerance": 1e-10}
_INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0


@dataclass(frozen=True, eq=False)
class AggregatedCost:
    """Scenario-averaged cost at one fixed price."""

    p: float
    scenarios: tuple[tuple[np.ndarray, float], ...]

    @classmethod
    def from_pairs(cls, p: float, pairs: Iterable[tuple[Sequence[float], float]]):
        scen = tuple((np.asarray(D, dtype=float), float(w)) for D, w in pairs)
        if not scen:
            raise ValueError("aggregated cost needs at least one scenario")
        if any(w <= 0 for _, w in scen):
            raise ValueError("scenario weights must be positive")
        return cls(float(p), scen)

    @property
    def n_s(self) -> float:
        return sum(w for _, w in self.scenarios)

    def evaluate(self, I, market) -> float:
        I = np.asarray(I, dtype=float)
        total = sum(w * solve_allocation(I, D, self.p, market.C).objective for D, w in self.scenarios)
        return float(market.gamma @ I) + total / self.n_s


def _scenario_lp(p: float, demands: np.ndarray, weights: np.ndarray, market):
    m, n = market.m, market.n
    k = len(weights)
    block = m * n
    nvar = m + k * block
    c = np.concatenate([market.gamma, np.kron(weights, (market.C - p).ravel())])

    rows, cols, vals = [], [], []
    row = 0
    for s in range(k):
        base = m + s * block
        for i in range(m):  # sum_j X_sij - I_i <= 0
            for j in range(n):
                rows.append(row)
                cols.append(base + i * n + j)
                vals.append(1.0)
            rows.append(row)
            cols.append(i)
            vals.append(-1.0)
            row += 1
        for j in range(n):  # sum_i X_sij <= D_sj
            for i in range(m):
                rows.append(row)
                cols.append(base + i * n + j)
                vals.append(1.0)
            row += 1
    for i in range(m):  # sum_i I_i <= I_max
        rows.append(row)
        cols.append(i)
        vals.append(1.0)
    row += 1
    A = sparse.csr_matrix((vals, (rows, cols)), shape=(row, nvar))
    b = np.concatenate([np.concatenate([np.zeros(m), d]) for d in demands] + [[market.I_max]])

    res = linprog(c, A_ub=A, b_ub=b, bounds=(0, None), method="highs", options=_HIGHS)
    if res.status != 0:
        raise RuntimeError(f"scenario LP failed: {res.message}")
    I = np.clip(res.x[:m], 0.0, None)
    if I.sum() > market.I_max:
        I *= market.I_max / I.sum()
    return I, float(res.fun)


def saa_argmin_inventory(agg: AggregatedCost, market) -> tuple[np.ndarray, float]:
    demands = np.array([D for D, _ in agg.scenarios])
    weights = np.array([w for _, w in agg.scenarios]) / agg.n_s
    return _scenario_lp(agg.p, demands, weights, market)


def exact_Q(I, p: float, model: DemandModel, market) -> float:
    I = np.asarray(I, dtype=float)
    g = sum(pr * solve_allocation(I, D, p, market.C).objective for D, pr in model.scenarios(p))
    return float(market.gamma @ I) + g


def monte_carlo_Q(I, p: float, model: DemandModel, market, samples: int, rng) -> tuple[float, float]:
    if samples < 100:
        raise ValueError("monte_carlo_Q needs at least 100 samples")
    I = np.asarray(I, dtype=float)
    hold = float(market.gamma @ I)
    draws = np.array(
        [hold + solve_allocation(I, sample_demand(model, p, rng), p, market.C).objective for _ in range(samples)]
    )
    if np.all(draws == draws[0]):
        return float(draws[0]), 0.0
    return float(draws.mean()), float(draws.std(ddof=1) / math.sqrt(samples))


def exact_W(p: float, model: DemandModel, market) -> tuple[float, np.ndarray]:
    scen = model.scenarios(p)
    demands = np.array([D for D, _ in scen])
    weights = np.array([w for _, w in scen])
    I, value = _scenario_lp(p, demands, weights, market)
    return value, I


def golden_section(f: Callable[[float], float], lo: float, hi: float, tol: float):
    """Minimize a unimodal ``f`` on ``[lo, hi]``; returns ``(x, f(x))``."""
    if hi - lo <= tol:
        x = 0.5 * (lo + hi)
        return x, f(x)
    x1 = hi - _INV_PHI * (hi - lo)
    x2 = lo + _INV_PHI * (hi - lo)
    f1, f2 = f(x1), f(x2)
    while hi - lo > tol:
        if f1 <= f2:
            hi, x2, f2 = x2, x1, f1
            x1 = hi - _INV_PHI * (hi - lo)
            f1 = f(x1)
        else:
            lo, x1, f1 = x1, x2, f2
            x2 = lo + _INV_PHI * (hi - lo)
            f2 = f(x2)
    # a convex minimum may sit on the boundary; the bracket never reaches it exactly
    candidates = [(x1, f1), (x2, f2), (lo, f(lo)), (hi, f(hi))]
    return min(candidates, key=lambda t: t[1])


@dataclass(frozen=True, eq=False)
class IntervalOptimum:
    K: int
    lo: float
    hi: float
    p: float
    W: float
    I: np.ndarray


@dataclass(frozen=True, eq=False)
class OracleResult:
    p_star: float
    I_star: np.ndarray
    W_star: float
    per_interval: tuple[IntervalOptimum, ...]

    def local_value(self, K: int) -> float:
        return self.per_interval[K].W


def global_optimum(model: DemandModel, market, tol: float | None = None) -> OracleResult:
    tol = 1e-6 * market.p_max if tol is None else tol
    cache: dict[float, tuple[float, np.ndarray]] = {}

    def W(p: float) -> float:
        if p not in cache:
            cache[p] = exact_W(p, model, market)
        return cache[p][0]

    per = []
    for K, lo, hi in build_intervals(market.C, market.p_max):
        p, value = golden_section(W, lo, hi, tol)
        per.append(IntervalOptimum(K, lo, hi, p, value, cache[p][1]))
    best = min(per, key=lambda r: (r.W, r.K))
    return OracleResult(p_star=best.p, I_star=best.I, W_star=best.W, per_interval=tuple(per))
