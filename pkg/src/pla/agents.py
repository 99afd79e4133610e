"""Per-interval learner: trisection search with doubling sub-epochs (stage 1),
complementary sampling at the chosen price (stage 2), exploitation (stage 3).

Every agent owns a horizontal bound (the bracket ``[L, U]`` around its local
optimal price) and a vertical one (the error bar ``Delta`` around ``W_hat``).
The functions below mutate an :class:`AgentState` and play periods through a
:class:`~pla.simulate.Simulator`.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field

import numpy as np

from .saa import AggregatedCost, saa_argmin_inventory

LCB_WIDTH = 34.0
POINTS = ("a", "b", "c")


@dataclass(frozen=True)
class AgentConstants:
    """What an agent needs to know about the run: horizon, radius, sample floor."""

    T: int
    delta_K: float
    n_0: int
    L_W: float


@dataclass
class PriceSlot:
    inventory: np.ndarray
    q_hat: float = math.nan


@dataclass
class AgentState:
    K: int
    lo: float
    hi: float
    stage: int = 1
    L: float = 0.0
    U: float = 0.0
    tau: int = 1
    s: int = 1
    slots: dict = field(default_factory=dict)
    W_hat: float = 0.0
    Delta: float = math.inf
    T_K: int = 0
    # stage 2 / 3
    p_star: float = math.nan
    I_star: np.ndarray | None = None
    N2: int = 0
    r_K: int = 0
    Q_star: float = math.nan
    N3: int = 0
    # trace, for invariant checks
    sampled: dict = field(default_factory=dict)
    epoch_widths: list = field(default_factory=list)
    stage1_deltas: list = field(default_factory=list)
    trace: list = field(default_factory=list)

    @property
    def quarter_points(self) -> tuple[float, float, float]:
        L, U = self.L, self.U
        return (3 * L + U) / 4, (L + U) / 2, (L + 3 * U) / 4

    def point(self, name: str) -> float:
        a, c, b = self.quarter_points
        return {"a": a, "b": b, "c": c}[name]

    @property
    def lcb(self) -> float:
        if math.isinf(self.Delta):
            return -math.inf
        return self.W_hat - LCB_WIDTH * self.Delta

    @property
    def completed_epochs(self) -> int:
        return self.tau - 1

    def snapshot(self) -> None:
        self.trace.append((self.T_K, self.stage, self.Delta, self.W_hat, self.U - self.L))


def _play_batch(sim, inventory, p, count, state: AgentState):
    """Play ``count`` periods at a fixed decision; returns demand multiplicities."""
    seen: Counter = Counter()
    demands = {}
    for _ in range(count):
        D, _ = sim.play(inventory, p)
        state.T_K += 1
        key = D.tobytes()
        seen[key] += 1
        demands[key] = D
    return seen, demands


def _fit(p, seen, demands, market):
    agg = AggregatedCost.from_pairs(p, [(demands[k], w) for k, w in seen.items()])
    inventory, value = saa_argmin_inventory(agg, market)
    inventory.flags.writeable = False
    return inventory, value


def _nearest_inventory(state: AgentState, p: float, m: int) -> np.ndarray:
    if not state.sampled:
        return np.ones(m)
    nearest = min(state.sampled, key=lambda q: (abs(q - p), q))
    return state.sampled[nearest]


def agent_init(K: int, lo: float, hi: float, sim, consts: AgentConstants) -> AgentState:
    """Probe each quarter point once with unit inventory (3 periods)."""
    market = sim.market
    state = AgentState(K=K, lo=lo, hi=hi, L=lo, U=hi)
    start = np.ones(market.m)
    start.flags.writeable = False
    for name in POINTS:
        p = state.point(name)
        seen, demands = _play_batch(sim, start, p, 1, state)
        inventory, _ = _fit(p, seen, demands, market)
        state.slots[name] = PriceSlot(inventory)
        state.sampled[p] = inventory
    state.epoch_widths.append(hi - lo)
    if hi - lo <= 1.0 / consts.T:
        # already inside the stopping width: no search, sample the midpoint
        state.p_star = state.point("c")
        state.I_star = state.slots["c"].inventory
        state.stage = 2
    state.snapshot()
    return state


def stage1_run_subepoch(state: AgentState, sim, consts: AgentConstants) -> int:
    """One doubling sub-epoch over the three quarter points; returns periods used."""
    assert state.stage == 1
    market = sim.market
    n_s = 2**state.s
    q = {}
    for name in POINTS:
        p = state.point(name)
        slot = state.slots[name]
        seen, demands = _play_batch(sim, slot.inventory, p, n_s, state)
        slot.inventory, slot.q_hat = _fit(p, seen, demands, market)
        state.sampled[p] = slot.inventory
        q[name] = slot.q_hat
    delta_s = consts.delta_K / (2.0 * math.sqrt(n_s))
    gap = 4.0 * delta_s
    a, c, b = state.quarter_points

    bracket = None
    if q["a"] > q["b"] + gap:
        bracket = (a, state.U)
    elif q["a"] < q["b"] - gap:
        bracket = (state.L, b)
    elif q["c"] < q["a"] - gap:
        bracket = (a, state.U)
    elif q["c"] < q["b"] - gap:
        bracket = (state.L, b)

    if bracket is not None:
        if bracket[1] - bracket[0] > 1.0 / consts.T:
            state.L, state.U = bracket
            state.tau += 1
            state.s = 1
            state.epoch_widths.append(state.U - state.L)
            for name in POINTS:
                state.slots[name] = PriceSlot(_nearest_inventory(state, state.point(name), market.m))
        else:
            state.p_star = c
            state.I_star = state.slots["c"].inventory
            state.L, state.U = bracket
            state.tau += 1
            state.epoch_widths.append(state.U - state.L)
            state.stage = 2
    else:
        if delta_s < state.Delta:
            state.Delta = delta_s
            state.W_hat = min(q.values())
            state.stage1_deltas.append((state.T_K, delta_s))
        state.s += 1
    state.snapshot()
    return 3 * n_s


def stage2_sample_count(Delta: float, consts: AgentConstants) -> tuple[int, int]:
    """``(N_2, r_K)``: complementary sample target and its number of doubling rounds."""
    if math.isinf(Delta):
        N2 = consts.n_0
    else:
        N2 = math.ceil(4.0 * consts.delta_K**2 / Delta**2 - 1e-9)
    r_K = max(1, math.ceil(math.log2(N2) - 1e-12))
    return N2, r_K


def stage2_run(state: AgentState, sim, consts: AgentConstants) -> int:
    assert state.stage == 2
    market = sim.market
    state.N2, state.r_K = stage2_sample_count(state.Delta, consts)
    used = 0
    inventory = state.I_star
    value = math.nan
    for r in range(1, state.r_K + 1):
        m_r = 2**r
        seen, demands = _play_batch(sim, inventory, state.p_star, m_r, state)
        inventory, value = _fit(state.p_star, seen, demands, market)
        used += m_r
    state.I_star = inventory
    state.Q_star = value
    state.N3 = state.N2
    state.W_hat = value - consts.L_W / consts.T
    state.Delta = consts.delta_K / math.sqrt(state.N2)
    state.stage = 3
    state.snapshot()
    return used


def stage3_step(state: AgentState, sim, consts: AgentConstants) -> int:
    assert state.stage == 3
    _, q = sim.play(state.I_star, state.p_star)
    state.T_K += 1
    state.Q_star = (state.N3 * state.Q_star + q) / (state.N3 + 1)
    state.N3 += 1
    state.W_hat = state.Q_star - consts.L_W / consts.T
    state.Delta = consts.delta_K / math.sqrt(state.N3)
    return 1


def dispatch(state: AgentState, sim, consts: AgentConstants) -> int:
    if state.stage == 1:
        return stage1_run_subepoch(state, sim, consts)
    if state.stage == 2:
        return stage2_run(state, sim, consts)
    return stage3_step(state, sim, consts)
