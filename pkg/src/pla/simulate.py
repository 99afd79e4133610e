"""Period clock shared by the learners: plays decisions and records every period."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .environment import DemandModel, realized_outcome, sample_demand


class HorizonReached(Exception):
    """Raised when a learner asks to play past the last period."""


@dataclass(slots=True)
class StepLog:
    t: int
    K: int
    stage: int
    p: float
    I: np.ndarray
    D: np.ndarray
    X: np.ndarray
    q_realized: float
    q_oracle: float = math.nan
    regret: float = math.nan
    lcb: tuple = ()


@dataclass
class Simulator:
    market: object
    model: DemandModel
    horizon: int
    rng: np.random.Generator
    logs: list = field(default_factory=list)
    tag: tuple = (0, 0)
    lcb: tuple = ()

    def __post_init__(self):
        self._outcomes: dict = {}

    @property
    def t(self) -> int:
        return len(self.logs)

    @property
    def remaining(self) -> int:
        return self.horizon - len(self.logs)

    def play(self, I, p: float) -> tuple[np.ndarray, float]:
        if len(self.logs) >= self.horizon:
            raise HorizonReached
        D = sample_demand(self.model, p, self.rng)
        # finite noise repeats (I, p, D) triples within a batch; continuous noise never does
        key = (I.tobytes(), p, D.tobytes()) if self.model.finite else None
        hit = self._outcomes.get(key) if key is not None else None
        if hit is None:
            q, alloc = realized_outcome(I, p, D, self.market)
            hit = (q, alloc.X)
            if key is not None:
                self._outcomes[key] = hit
        q, X = hit
        K, stage = self.tag
        self.logs.append(StepLog(len(self.logs) + 1, K, stage, p, I, D, X, q, lcb=self.lcb))
        return D, q
