"""Strategy update rules and the growth-coupled generation scheduler.

This is the reference (pure Python) implementation of the dynamics; the
heavy experiment drivers run the same algorithms through the compiled kernel
in :mod:`coopnet.engine`.

A generation updates every node once (synchronously from the pre-generation
snapshot, or asynchronously as N immediate-commit pair events).  While the
system grows, a generation fires each time the population (or, in link mode,
the link count) has grown a fraction ``n`` since the last generation,
mirroring the N(t0)(1+n) schedule; at small N this fires many generations
per arrival, at large N many arrivals pass between generations.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import netgen
from .errors import InvalidConfigError
from .game import COOPERATOR, GameConfig, PayoffVector, compute_all_payoffs

RULE_IMITATION = "imitation"
RULE_FERMI = "fermi"
TIMING_SYNC = "sync"
TIMING_ASYNC = "async"
UNIT_NODES = "nodes"
UNIT_LINKS = "links"

# Validated growth-fraction regime; larger n floods the system with
# defectors faster than a generation can absorb them.
N_MAX = 0.01

# Relative slack for the accumulator-vs-n comparison (pure float artifact).
_SCHED_EPS = 1e-9


@dataclass
class DynamicsConfig:
    rule: str = RULE_IMITATION
    beta: float = 1.0
    timing: str = TIMING_SYNC
    n: float = 0.001
    growth_unit: str = UNIT_NODES

    def __post_init__(self):
        self.validate()

    def validate(self):
        if self.rule not in (RULE_IMITATION, RULE_FERMI):
            raise InvalidConfigError(f"unknown rule {self.rule!r}")
        if self.timing not in (TIMING_SYNC, TIMING_ASYNC):
            raise InvalidConfigError(f"unknown timing {self.timing!r}")
        if not 0.0 < self.n <= N_MAX:
            raise InvalidConfigError(f"n must lie in (0, {N_MAX}], got {self.n}")
        if self.rule == RULE_FERMI and self.beta <= 0:
            raise InvalidConfigError(f"beta must be > 0, got {self.beta}")
        if self.growth_unit not in (UNIT_NODES, UNIT_LINKS):
            raise InvalidConfigError(f"unknown growth_unit {self.growth_unit!r}")


@dataclass
class PopulationState:
    """The evolving system: topology, strategies, payoffs, scheduler state."""

    graph: netgen.Graph
    strategies: np.ndarray
    payoffs: PayoffVector | None = None
    generation_count: int = 0
    growth_accumulator: float = 0.0
    # population / link count at the most recent generation (scheduler refs)
    nodes_ref: int = field(default=0)
    edges_ref: int = field(default=0)

    def __post_init__(self):
        self.strategies = np.asarray(self.strategies, dtype=np.int8)
        if self.nodes_ref == 0:
            self.nodes_ref = self.graph.node_count
        if self.edges_ref == 0:
            self.edges_ref = self.graph.edge_count

    @property
    def cooperator_count(self) -> int:
        return int(self.strategies.sum())

    @property
    def cooperator_fraction(self) -> float:
        return self.cooperator_count / self.graph.node_count


def initial_state(g: netgen.Graph, strategies) -> PopulationState:
    return PopulationState(graph=g, strategies=np.asarray(strategies, dtype=np.int8))


def imitation_probability(p_i: float, p_j: float, k_i: int, k_j: int, cfg: GameConfig) -> float:
    """Probability that i adopts j's strategy under the imitation rule.

    Zero unless j outperforms i; normalized by max(k_i, k_j) * (b + c) so the
    result is always a probability.
    """
    if p_i >= p_j:
        return 0.0
    k_m = max(k_i, k_j)
    return (p_j - p_i) / (k_m * (cfg.b + cfg.c))


def fermi_probability(p_i: float, p_j: float, beta: float) -> float:
    """Logistic adoption probability; allows imitation against the gradient."""
    return 1.0 / (1.0 + math.exp(-beta * (p_j - p_i)))


def _adoption_probability(p_i, p_j, k_i, k_j, dyn: DynamicsConfig, game: GameConfig) -> float:
    if dyn.rule == RULE_IMITATION:
        return imitation_probability(p_i, p_j, k_i, k_j, game)
    return fermi_probability(p_i, p_j, dyn.beta)


def generation_synchronous(state: PopulationState, dyn: DynamicsConfig, game: GameConfig,
                           rng: np.random.Generator, _order=None) -> PopulationState:
    """One synchronous generation: all adoptions read the pre-update snapshot.

    ``_order`` overrides the node iteration order (test hook; the outcome
    distribution must not depend on it).
    """
    g = state.graph
    state.payoffs = compute_all_payoffs(g, state.strategies, game)
    eff = state.payoffs.effective
    old = state.strategies
    new = old.copy()
    order = range(g.node_count) if _order is None else _order
    for i in order:
        k_i = g.degree[i]
        if k_i == 0:
            continue
        j = g.adjacency[i][int(rng.integers(k_i))]
        p = _adoption_probability(eff[i], eff[j], k_i, g.degree[j], dyn, game)
        if p > 0.0 and rng.random() < p:
            new[i] = old[j]
    state.strategies = new
    state.generation_count += 1
    return state


def generation_asynchronous(state: PopulationState, dyn: DynamicsConfig, game: GameConfig,
                            rng: np.random.Generator) -> PopulationState:
    """One asynchronous generation: N immediate-commit pairwise events."""
    from .game import effective_payoff, payoff  # local to keep module top uncluttered

    g = state.graph
    strat = state.strategies
    n = g.node_count

    def node_payoff(i):
        nbrs = g.adjacency[i]
        k_c = int(sum(strat[x] for x in nbrs))
        raw = payoff(int(strat[i]), len(nbrs), k_c, game)
        return effective_payoff(raw, len(nbrs), game)

    for _ in range(n):
        i = int(rng.integers(n))
        k_i = g.degree[i]
        if k_i == 0:
            continue
        j = g.adjacency[i][int(rng.integers(k_i))]
        p = _adoption_probability(node_payoff(i), node_payoff(j), k_i, g.degree[j], dyn, game)
        if p > 0.0 and rng.random() < p:
            strat[i] = strat[j]
    state.payoffs = compute_all_payoffs(g, strat, game)
    state.generation_count += 1
    return state


def run_generation(state, dyn, game, rng):
    if dyn.timing == TIMING_SYNC:
        return generation_synchronous(state, dyn, game, rng)
    return generation_asynchronous(state, dyn, game, rng)


def _fire_due_generations(state, dyn, game, rng):
    while state.growth_accumulator >= dyn.n * (1.0 - _SCHED_EPS):
        run_generation(state, dyn, game, rng)
        state.growth_accumulator -= dyn.n
        state.nodes_ref = state.graph.node_count
        state.edges_ref = state.graph.edge_count


def grow_and_update(state: PopulationState, growth: netgen.GrowthConfig, dyn: DynamicsConfig,
                    game: GameConfig, rng: np.random.Generator, target_n: int) -> PopulationState:
    """Grow the system to ``target_n`` nodes, interleaving generations.

    Each incorporation event draws the newcomer's strategy (cooperator with
    probability ``p_c``) before any of its edges is placed.  In link mode the
    accumulator advances after every single edge insertion, so generations
    can fire between the FL and the last RL of one event.
    """
    g = state.graph
    if target_n < g.node_count:
        raise InvalidConfigError(f"target size {target_n} below current size {g.node_count}")
    link_mode = dyn.growth_unit == UNIT_LINKS
    while g.node_count < target_n:
        new_strategy = COOPERATOR if rng.random() < game.p_c else 0
        if link_mode:
            # place edges one by one, letting generations fire in between
            new = g.add_node()
            state.strategies = np.append(state.strategies, np.int8(new_strategy))
            edges = _event_edges_lazy(g, growth, rng, new)
            for u, v in edges:
                g.add_edge(u, v)
                state.growth_accumulator += 1.0 / state.edges_ref
                _fire_due_generations(state, dyn, game, rng)
        else:
            netgen.grow_step(g, growth, rng)
            state.strategies = np.append(state.strategies, np.int8(new_strategy))
            state.growth_accumulator += 1.0 / state.nodes_ref
            _fire_due_generations(state, dyn, game, rng)
    return state


def _event_edges_lazy(g, growth, rng, new):
    """Yield the edges of one incorporation event without inserting them.

    Used by link mode, where the caller inserts edges itself so generations
    can run between insertions.  Sampling still sees the partially inserted
    event because the graph is mutated between yields.
    """
    if growth.model == netgen.MODEL_BAM:
        def gen():
            chosen = {new}
            for _ in range(growth.L):
                t = netgen.sample_preferential(g, rng, chosen)
                chosen.add(t)
                yield (new, t)
        return gen()

    def gen_a():
        if growth.fl_mode == netgen.FL_PREFERENTIAL:
            t = netgen.sample_preferential(g, rng, {new})
        else:
            t = netgen._sample_uniform(g, rng, {new})
        yield (new, t)
        max_attempts = growth.max_attempt_factor * g.node_count
        for rl_index in range(growth.L - 1):
            random_target = growth.one_rl_random and rl_index == 0
            for _ in range(100 * max_attempts):
                if growth.rl_mode == netgen.RL_UNIFORM_SOURCE_PA_TARGET:
                    src = netgen._sample_uniform(g, rng)
                    if random_target:
                        tgt = netgen._sample_uniform(g, rng, {src})
                    else:
                        tgt = netgen.sample_preferential(g, rng, {src})
                else:
                    src = netgen.sample_preferential(g, rng)
                    tgt = netgen._sample_uniform(g, rng, {src})
                if not g.has_edge(src, tgt):
                    yield (src, tgt)
                    break
            else:
                raise netgen.StructuralError("RL rejection sampling failed to place an edge")
    return gen_a()
