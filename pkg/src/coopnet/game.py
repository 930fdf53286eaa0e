"""Prisoner's dilemma payoff accumulation with an optional potentiality cap.

The game is reduced to the single benefit-cost ratio ``r``: a cooperator pays
cost 1 per link and confers benefit ``b = r`` to each neighbor.  A node of
degree ``k`` with ``k_c`` cooperating neighbors accumulates

* cooperator: ``k_c * b - k``
* defector:   ``k_c * b``

When a maximum potentiality ``K`` is set, payoffs of nodes with degree above
``K`` are rescaled to ``P * K / k``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidConfigError, InvalidInputError

COOPERATOR = 1
DEFECTOR = 0

COST = 1.0  # cost per link; b = r under this normalization


@dataclass
class GameConfig:
    """Game parameterization: benefit-cost ratio, potentiality cap, and the
    probability that an incoming node starts as a cooperator."""

    r: float
    K: int | None = None  # None = unbounded
    p_c: float = 0.5

    def __post_init__(self):
        self.validate()

    def validate(self):
        if self.r <= 0:
            raise InvalidConfigError(f"r must be > 0, got {self.r}")
        if not 0.0 <= self.p_c <= 1.0:
            raise InvalidConfigError(f"p_c must lie in [0, 1], got {self.p_c}")
        if self.K is not None and self.K < 1:
            raise InvalidConfigError(f"K must be >= 1 when bounded, got {self.K}")

    @property
    def b(self) -> float:
        return self.r

    @property
    def c(self) -> float:
        return COST


@dataclass
class PayoffVector:
    raw: np.ndarray
    effective: np.ndarray


def payoff(strategy: int, k: int, k_c: int, cfg: GameConfig) -> float:
    """Accumulated payoff of one node from its neighborhood."""
    if not 0 <= k_c <= k:
        raise InvalidInputError(f"k_c={k_c} outside [0, k={k}]")
    if strategy == COOPERATOR:
        return k_c * cfg.b - k * COST
    return k_c * cfg.b


def effective_payoff(raw: float, k: int, cfg: GameConfig) -> float:
    """Rescale the payoff of nodes whose degree exceeds the potentiality cap."""
    if cfg.K is None or k <= cfg.K:
        return raw
    return raw * cfg.K / k


def compute_all_payoffs(g, strategies, cfg: GameConfig) -> PayoffVector:
    """One full interaction pass over the graph (pre-update snapshot)."""
    strat = np.asarray(strategies, dtype=np.int8)
    n = g.node_count
    if len(strat) != n:
        raise InvalidInputError(f"{len(strat)} strategies for {n} nodes")
    raw = np.zeros(n)
    eff = np.zeros(n)
    for i in range(n):
        nbrs = g.adjacency[i]
        k = len(nbrs)
        k_c = int(sum(strat[j] for j in nbrs))
        raw[i] = payoff(int(strat[i]), k, k_c, cfg)
        eff[i] = effective_payoff(raw[i], k, cfg)
    return PayoffVector(raw=raw, effective=eff)
