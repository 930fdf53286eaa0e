"""Exact analysis of the smallest systems in the slow-growth limit.

In the limit where the system fully equilibrates between arrivals, imitation
flows only from lower to strictly higher payoff, so the outcome of each
scenario is deterministic and the thresholds are closed-form.  The same
scenarios can be simulated (``simulate``) to cross-check the dynamics.

Scenarios (all start from cooperators, with the last arrival a defector
unless stated otherwise):

* ``two_node``: C-D pair; the defector always outperforms the cooperator.
* ``chain3``: C-C-D line; the exposed middle cooperator is always beaten.
* ``star3_defector``: a cooperator with two cooperating neighbors receives a
  defector; it out-earns the defector exactly when r > 3.
* ``hub_k``: a cooperator with k cooperating neighbors receives a defector;
  the threshold is r = (k+1)/(k-1).
* ``parent_child``: two linked cooperating parents and one child defector
  attached to one parent, with the child's payoff offset by -d (intrinsic
  adaptability); the parent wins while d > 2c.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import netgen
from .dynamics import DynamicsConfig, _adoption_probability
from .errors import InvalidInputError
from .game import COOPERATOR, DEFECTOR, GameConfig, compute_all_payoffs

COOP_FIXES = "cooperation_fixes"
DEFECT_FIXES = "defection_fixes"
NEUTRAL = "neutral"

SCENARIOS = ("two_node", "chain3", "star3_defector", "hub_k", "parent_child")


@dataclass
class ScenarioAnalysis:
    scenario: str
    threshold: float | None  # critical r (or d for parent_child), None if outcome unconditional
    outcome: str


def analyze(scenario: str, r: float, k: int | None = None, d: float | None = None,
            c: float = 1.0) -> ScenarioAnalysis:
    """Closed-form outcome of one scenario in the slow-growth limit."""
    if scenario == "two_node":
        # defector earns b, cooperator -c; b > -c for all b, c
        return ScenarioAnalysis(scenario, None, DEFECT_FIXES)
    if scenario == "chain3":
        # end defector earns b, exposed middle cooperator b - 2c < b
        return ScenarioAnalysis(scenario, None, DEFECT_FIXES)
    if scenario == "star3_defector":
        return _hub_analysis(scenario, 2, r, c)
    if scenario == "hub_k":
        if k is None or k < 2:
            raise InvalidInputError("hub_k requires k >= 2")
        return _hub_analysis(scenario, k, r, c)
    if scenario == "parent_child":
        if d is None or d < 0:
            raise InvalidInputError("parent_child requires d >= 0")
        # linked parent earns b - 2c, the child defector b - d
        threshold = 2.0 * c
        if d > threshold:
            return ScenarioAnalysis(scenario, threshold, COOP_FIXES)
        if d < threshold:
            return ScenarioAnalysis(scenario, threshold, DEFECT_FIXES)
        return ScenarioAnalysis(scenario, threshold, NEUTRAL)
    raise InvalidInputError(f"unknown scenario {scenario!r}")


def _hub_analysis(name, k, r, c):
    # hub with k cooperating neighbors plus the new defector:
    # hub payoff k*b - (k+1)*c vs defector payoff b  =>  r_c = (k+1)/(k-1)
    threshold = (k + 1.0) / (k - 1.0)
    b = r * c
    hub = k * b - (k + 1) * c
    if hub > b:
        return ScenarioAnalysis(name, threshold, COOP_FIXES)
    if hub < b:
        return ScenarioAnalysis(name, threshold, DEFECT_FIXES)
    return ScenarioAnalysis(name, threshold, NEUTRAL)


def _build(scenario, k, d):
    """Graph, strategies, and per-node payoff offsets of one scenario."""
    g = netgen.Graph()
    offsets = None
    if scenario == "two_node":
        a, b_ = g.add_node(), g.add_node()
        g.add_edge(a, b_)
        strat = [COOPERATOR, DEFECTOR]
    elif scenario == "chain3":
        nodes = [g.add_node() for _ in range(3)]
        g.add_edge(nodes[0], nodes[1])
        g.add_edge(nodes[1], nodes[2])
        strat = [COOPERATOR, COOPERATOR, DEFECTOR]
    elif scenario in ("star3_defector", "hub_k"):
        kk = 2 if scenario == "star3_defector" else k
        hub = g.add_node()
        strat = [COOPERATOR]
        for _ in range(kk):
            leaf = g.add_node()
            g.add_edge(hub, leaf)
            strat.append(COOPERATOR)
        newcomer = g.add_node()
        g.add_edge(hub, newcomer)
        strat.append(DEFECTOR)
    elif scenario == "parent_child":
        p1, p2 = g.add_node(), g.add_node()
        g.add_edge(p1, p2)
        child = g.add_node()
        g.add_edge(p1, child)
        strat = [COOPERATOR, COOPERATOR, DEFECTOR]
        offsets = np.array([0.0, 0.0, -d])
    else:
        raise InvalidInputError(f"unknown scenario {scenario!r}")
    return g, np.asarray(strat, dtype=np.int8), offsets


def simulate(scenario: str, r: float, rng: np.random.Generator, k: int | None = None,
             d: float | None = None, dyn: DynamicsConfig | None = None,
             max_generations: int = 100_000) -> str:
    """Run the dynamics on a scenario until it absorbs.

    Models the slow-growth limit: the freshly attached defector is already in
    place and the system equilibrates with no further arrivals.  Returns the
    observed outcome, or ``neutral`` if no strategy ever changes within the
    generation budget (frozen mixed state).
    """
    if scenario == "hub_k" and (k is None or k < 2):
        raise InvalidInputError("hub_k requires k >= 2")
    if scenario == "parent_child" and (d is None or d < 0):
        raise InvalidInputError("parent_child requires d >= 0")
    dyn = dyn or DynamicsConfig(n=1e-4)
    game = GameConfig(r=r, p_c=0.0)
    g, strat, offsets = _build(scenario, k, d)
    n = g.node_count
    for _ in range(max_generations):
        total = int(strat.sum())
        if total == 0:
            return DEFECT_FIXES
        if total == n:
            return COOP_FIXES
        pv = compute_all_payoffs(g, strat, game)
        eff = pv.effective if offsets is None else pv.effective + offsets
        new = strat.copy()
        for i in range(n):
            k_i = g.degree[i]
            if k_i == 0:
                continue
            j = g.adjacency[i][int(rng.integers(k_i))]
            p = _adoption_probability(eff[i], eff[j], k_i, g.degree[j], dyn, game)
            if p > 0.0 and rng.random() < p:
                new[i] = strat[j]
        strat = new
    return NEUTRAL
