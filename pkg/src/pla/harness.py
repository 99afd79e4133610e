"""Regret accounting, the grid-UCB comparator and CSV persistence."""

from __future__ import annotations

import csv
import logging
import math
from collections import Counter
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .core import ExperimentConfig, make_rng, theorem_constants
from .environment import DemandModel, FiniteSupport
from .saa import AggregatedCost, OracleResult, exact_Q, saa_argmin_inventory
from .simulate import HorizonReached, Simulator, StepLog

log = logging.getLogger(__name__)

STEPS_SCHEMA = "pla-steps/1"
REGRET_SCHEMA = "pla-regret/1"


@dataclass
class RegretSeries:
    cumulative: np.ndarray
    instantaneous: np.ndarray
    slope: float = math.nan
    window: tuple[int, int] | None = None
    replication: int = 0

    @property
    def final(self) -> float:
        return float(self.cumulative[-1]) if len(self.cumulative) else 0.0


# -- regret ----------------------------------------------------------------


def attach_oracle(logs: Sequence[StepLog], oracle: OracleResult, model: DemandModel, market) -> None:
    """Fill the expected cost and instantaneous regret of every logged decision."""
    if not model.finite:
        raise ValueError("exact regret needs FiniteSupport noise; use a Monte Carlo oracle (--mc-oracle N)")
    cache: dict = {}
    for step in logs:
        key = (step.I.tobytes(), step.p)
        if key not in cache:
            cache[key] = exact_Q(step.I, step.p, model, market)
        step.q_oracle = cache[key]
        step.regret = step.q_oracle - oracle.W_star


def compute_regret(logs: Sequence[StepLog], oracle: OracleResult, model: DemandModel, market,
                   window: tuple[int, int] | None = None, replication: int = 0) -> RegretSeries:
    """``Reg(t) = sum_{s <= t} Q(I_s, p_s) - W*`` with the exact expected cost ``Q``."""
    attach_oracle(logs, oracle, model, market)
    inst = np.array([s.regret for s in logs], dtype=float)
    series = RegretSeries(np.cumsum(inst), inst, window=window, replication=replication)
    if window is not None:
        series.slope = fit_slope(series.cumulative, window)
    return series


def fit_slope(cumulative: Sequence[float], window: tuple[int, int]) -> float:
    """Least-squares slope of ``ln Reg(t)`` on ``ln t`` over ``t`` in ``window`` (1-based)."""
    reg = np.asarray(cumulative, dtype=float)
    lo, hi = int(window[0]), min(int(window[1]), len(reg))
    t = np.arange(lo, hi + 1)
    vals = reg[lo - 1:hi]
    keep = vals > 0
    if keep.sum() < 2:
        log.warning("fit_slope: fewer than two positive points in window %s", window)
        return math.nan
    slope, _ = np.polyfit(np.log(t[keep]), np.log(vals[keep]), 1)
    return float(slope)


def monte_carlo_model(model: DemandModel, samples: int, rng: np.random.Generator) -> DemandModel:
    """Finite-support stand-in for continuous noise: ``samples`` centred draws."""
    draws = np.array([model.noise.sample(rng) for _ in range(samples)])
    draws -= draws.mean(axis=0)
    return DemandModel(model.a, model.b, FiniteSupport(draws, np.full(samples, 1.0 / samples)))


# -- baseline --------------------------------------------------------------


def grid_prices(p_max: float, G: int) -> np.ndarray:
    return (np.arange(G) + 0.5) * p_max / G


def baseline_ucb_grid(config: ExperimentConfig, G: int, seed: int | None = None) -> list[StepLog]:
    """Optimistic index policy over ``G`` fixed prices (cost-minimizing LCB).

    Each arm plays the SAA-optimal inventory for its own accumulated demand
    scenarios, refreshed whenever the arm's pull count reaches a power of two.
    """
    if G < 1:
        raise ValueError("grid size must be positive")
    seed = config.seed if seed is None else seed
    market = config.market
    radius = theorem_constants(config).delta_K * config.radius_scale
    prices = grid_prices(market.p_max, G)
    sim = Simulator(market, config.demand, config.horizon, make_rng(seed))
    inventory = [np.ones(market.m) for _ in range(G)]
    for inv in inventory:
        inv.flags.writeable = False
    counts = np.zeros(G, dtype=int)
    sums = np.zeros(G)
    seen = [Counter() for _ in range(G)]
    demands: list[dict] = [{} for _ in range(G)]

    try:
        while sim.t < config.horizon:
            index = np.where(counts > 0, sums / np.maximum(counts, 1) - radius / np.sqrt(np.maximum(counts, 1)), -np.inf)
            k = int(np.argmin(index))
            sim.tag = (k, 0)
            D, q = sim.play(inventory[k], float(prices[k]))
            counts[k] += 1
            sums[k] += q
            key = D.tobytes()
            seen[k][key] += 1
            demands[k][key] = D
            if counts[k] & (counts[k] - 1) == 0:
                agg = AggregatedCost.from_pairs(prices[k], [(demands[k][h], w) for h, w in seen[k].items()])
                inv, _ = saa_argmin_inventory(agg, market)
                inv.flags.writeable = False
                inventory[k] = inv
    except HorizonReached:
        pass
    return sim.logs


# -- CSV -------------------------------------------------------------------


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def steps_header(m: int, n: int, arms: int) -> list[str]:
    return (
        ["t", "K", "stage", "p"]
        + [f"I_{i}" for i in range(m)]
        + [f"D_{j}" for j in range(n)]
        + [f"X_{i}_{j}" for i in range(m) for j in range(n)]
        + ["q_realized", "q_oracle", "regret"]
        + [f"lcb_{k}" for k in range(arms)]
    )


def write_steps_csv(path, logs: Sequence[StepLog], m: int, n: int, arms: int) -> None:
    path = Path(path)
    with path.open("w", newline="") as fh:
        fh.write(f"# schema={STEPS_SCHEMA}\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(steps_header(m, n, arms))
        for s in logs:
            lcb = list(s.lcb) if s.lcb else [math.nan] * arms
            w.writerow(
                [s.t, s.K, s.stage, _fmt(s.p)]
                + [_fmt(x) for x in s.I]
                + [_fmt(x) for x in s.D]
                + [_fmt(x) for x in np.ravel(s.X)]
                + [_fmt(s.q_realized), _fmt(s.q_oracle), _fmt(s.regret)]
                + [_fmt(x) for x in lcb]
            )


def read_steps_csv(path) -> list[StepLog]:
    with Path(path).open() as fh:
        first = fh.readline().strip()
        if first != f"# schema={STEPS_SCHEMA}":
            raise ValueError(f"{path}: unknown steps schema line {first!r}")
        reader = csv.reader(fh)
        header = next(reader)
        m = sum(h.startswith("I_") for h in header)
        n = sum(h.startswith("D_") for h in header)
        out = []
        for row in reader:
            vals = iter(row)
            t, K, stage = int(next(vals)), int(next(vals)), int(next(vals))
            p = float(next(vals))
            I = np.array([float(next(vals)) for _ in range(m)])
            D = np.array([float(next(vals)) for _ in range(n)])
            X = np.array([float(next(vals)) for _ in range(m * n)]).reshape(m, n)
            q_r, q_o, reg = (float(next(vals)) for _ in range(3))
            lcb = tuple(float(x) for x in vals)
            out.append(StepLog(t, K, stage, p, I, D, X, q_r, q_o, reg, lcb))
    return out


def write_regret_csv(path, series: RegretSeries) -> None:
    with Path(path).open("w", newline="") as fh:
        fh.write(f"# schema={REGRET_SCHEMA}\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["t", "instantaneous", "cumulative"])
        for t, (inst, cum) in enumerate(zip(series.instantaneous, series.cumulative), start=1):
            w.writerow([t, _fmt(inst), _fmt(cum)])


def write_oracle_csv(path, oracle: OracleResult) -> None:
    with Path(path).open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        m = len(oracle.I_star)
        w.writerow(["row", "K", "lo", "hi", "p", "W"] + [f"I_{i}" for i in range(m)])
        w.writerow(["global", "", "", "", _fmt(oracle.p_star), _fmt(oracle.W_star)] + [_fmt(x) for x in oracle.I_star])
        for r in oracle.per_interval:
            w.writerow(["interval", r.K, _fmt(r.lo), _fmt(r.hi), _fmt(r.p), _fmt(r.W)] + [_fmt(x) for x in r.I])


def write_summary_csv(path, rows: Sequence[dict]) -> None:
    if not rows:
        return
    keys = list(rows[0])
    for r in rows[1:]:
        keys += [k for k in r if k not in keys]
    with Path(path).open("w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=keys, lineterminator="\n")
        w.writeheader()
        for r in rows:
            w.writerow({k: (_fmt(v) if isinstance(v, float) else v) for k, v in r.items()})
