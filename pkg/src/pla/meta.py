"""Lower-confidence-bound meta strategy over the per-interval agents."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

from . import agents
from .agents import AgentConstants, AgentState
from .core import ExperimentConfig, make_rng, theorem_constants
from .intervals import IntervalSet, build_intervals, sort_pairs  # noqa: F401
from .simulate import HorizonReached, Simulator, StepLog

log = logging.getLogger(__name__)


@dataclass
class MetaState:
    t: int
    agents: list[AgentState]
    lcb: list[float] = field(default_factory=list)

    def refresh(self) -> None:
        self.lcb = [ag.lcb for ag in self.agents]


@dataclass
class RunResult:
    logs: list[StepLog]
    agents: list[AgentState]
    intervals: IntervalSet
    consts: AgentConstants
    dispatches: list = field(default_factory=list)


def select_agent(lcb) -> int:
    """Index of the smallest lower confidence bound; ties go to the smallest index."""
    best = 0
    for K, value in enumerate(lcb):
        if value < lcb[best]:
            best = K
    return best


def agent_constants(config: ExperimentConfig) -> AgentConstants:
    tc = theorem_constants(config)
    return AgentConstants(
        T=config.horizon, delta_K=tc.delta_K * config.radius_scale, n_0=tc.n_0, L_W=tc.L_W
    )


def run(config: ExperimentConfig, seed: int | None = None) -> RunResult:
    """Play ``config.horizon`` periods; returns one :class:`StepLog` per period."""
    seed = config.seed if seed is None else seed
    market = config.market
    consts = agent_constants(config)
    intervals = build_intervals(market.C, market.p_max)
    sim = Simulator(market, config.demand, config.horizon, make_rng(seed))
    state = MetaState(t=0, agents=[])
    dispatches = []

    try:
        for K, lo, hi in intervals:
            sim.tag = (K, 0)
            sim.lcb = tuple([-math.inf] * len(intervals))
            state.agents.append(agents.agent_init(K, lo, hi, sim, consts))
        state.t = sim.t
        state.refresh()
        while sim.t < config.horizon:
            K_hat = select_agent(state.lcb)
            chosen = state.agents[K_hat]
            sim.tag = (K_hat, chosen.stage)
            sim.lcb = tuple(state.lcb)
            stage = chosen.stage
            used = agents.dispatch(chosen, sim, consts)
            dispatches.append((sim.t, K_hat, stage, used))
            state.t = sim.t
            state.refresh()
            log.debug("t=%d K=%d stage=%d used=%d lcb=%s", sim.t, K_hat, stage, used, state.lcb)
    except HorizonReached:
        # the truncated dispatch is logged but never feeds a confidence update
        state.t = sim.t
    log.info("run finished: T=%d, per-agent periods %s", sim.t, [ag.T_K for ag in state.agents])
    return RunResult(sim.logs, state.agents, intervals, consts, dispatches)
