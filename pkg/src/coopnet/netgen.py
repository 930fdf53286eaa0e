"""Growable undirected simple graphs and the two network growth models.

The graph starts from a fully connected seed of ``N0`` nodes and grows one
node at a time, each incorporation event adding exactly ``L`` edges.  Two
models are supported:

* ``bam``: every new edge runs from the new node to an existing node chosen
  by preferential attachment (Barabasi-Albert growth).
* ``model_a``: the new node places a single first link (FL); the remaining
  ``L - 1`` links (RL) are added between nodes already in the system, one
  endpoint uniform and the other preferential.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidConfigError, InvalidInputError, SamplingExhaustedError, StructuralError

MODEL_BAM = "bam"
MODEL_A = "model_a"

FL_PREFERENTIAL = "preferential"
FL_RANDOM = "random"

RL_UNIFORM_SOURCE_PA_TARGET = "uniform_source_pa_target"
RL_PA_SOURCE_UNIFORM_TARGET = "pa_source_uniform_target"

# Cheap rejection attempts before falling back to an exact roulette scan.
_FAST_REJECT_ATTEMPTS = 64


@dataclass
class GrowthConfig:
    """Parameters of the network growth process.

    ``L`` is the number of edges added per incorporation event; the seed
    clique size ``N0`` defaults to ``L``.  ``one_rl_random`` switches exactly
    one RL per event to a uniform target (degree-distribution-preserving
    comparison mode); ``per_link_updates`` marks the intent to run strategy
    updates between the individual edge insertions of one event (realised by
    the dynamics scheduler's link mode).
    """

    model: str = MODEL_BAM
    L: int = 3
    N0: int | None = None
    fl_mode: str = FL_PREFERENTIAL
    rl_mode: str = RL_UNIFORM_SOURCE_PA_TARGET
    one_rl_random: bool = False
    per_link_updates: bool = False
    max_attempt_factor: int = 10

    def __post_init__(self):
        if self.N0 is None:
            self.N0 = self.L
        self.validate()

    def validate(self):
        if self.model not in (MODEL_BAM, MODEL_A):
            raise InvalidConfigError(f"model must be '{MODEL_BAM}' or '{MODEL_A}', got {self.model!r}")
        if self.N0 < 2:
            raise InvalidConfigError(f"N0 must be >= 2, got {self.N0}")
        if self.L < 1:
            raise InvalidConfigError(f"L must be >= 1, got {self.L}")
        if self.L > self.N0:
            raise InvalidConfigError(f"L must not exceed N0 (got L={self.L}, N0={self.N0})")
        if self.fl_mode not in (FL_PREFERENTIAL, FL_RANDOM):
            raise InvalidConfigError(f"unknown fl_mode {self.fl_mode!r}")
        if self.rl_mode not in (RL_UNIFORM_SOURCE_PA_TARGET, RL_PA_SOURCE_UNIFORM_TARGET):
            raise InvalidConfigError(f"unknown rl_mode {self.rl_mode!r}")
        if self.one_rl_random and self.L < 2:
            raise InvalidConfigError("one_rl_random requires L >= 2 (there must be an RL)")


class Graph:
    """Undirected simple graph with degree bookkeeping.

    Keeps the edge list in insertion order (the growth history), per-node
    adjacency lists, and a flattened endpoint list used for O(1) expected
    degree-proportional sampling.
    """

    __slots__ = ("adjacency", "degree", "edges", "_nbr_sets", "_endpoints")

    def __init__(self):
        self.adjacency: list[list[int]] = []
        self.degree: list[int] = []
        self.edges: list[tuple[int, int]] = []
        self._nbr_sets: list[set[int]] = []
        self._endpoints: list[int] = []

    @property
    def node_count(self) -> int:
        return len(self.adjacency)

    @property
    def edge_count(self) -> int:
        return len(self.edges)

    @property
    def degree_sum(self) -> int:
        return 2 * len(self.edges)

    def add_node(self) -> int:
        self.adjacency.append([])
        self.degree.append(0)
        self._nbr_sets.append(set())
        return len(self.adjacency) - 1

    def has_edge(self, u: int, v: int) -> bool:
        return v in self._nbr_sets[u]

    def add_edge(self, u: int, v: int):
        if u == v:
            raise StructuralError(f"self-loop on node {u}")
        if v in self._nbr_sets[u]:
            raise StructuralError(f"duplicate edge ({u}, {v})")
        self.adjacency[u].append(v)
        self.adjacency[v].append(u)
        self._nbr_sets[u].add(v)
        self._nbr_sets[v].add(u)
        self.degree[u] += 1
        self.degree[v] += 1
        self.edges.append((u, v))
        self._endpoints.append(u)
        self._endpoints.append(v)

    def is_complete(self) -> bool:
        n = self.node_count
        return self.edge_count == n * (n - 1) // 2

    def audit(self):
        """Full-scan check of the structural invariants; raises on violation."""
        if len(self.degree) != self.node_count or len(self._nbr_sets) != self.node_count:
            raise StructuralError("bookkeeping arrays out of sync")
        total = 0
        for i, nbrs in enumerate(self.adjacency):
            if len(nbrs) != len(self._nbr_sets[i]):
                raise StructuralError(f"duplicate neighbor entries at node {i}")
            if i in self._nbr_sets[i]:
                raise StructuralError(f"self-loop at node {i}")
            if self.degree[i] != len(nbrs):
                raise StructuralError(f"degree mismatch at node {i}")
            for j in nbrs:
                if i not in self._nbr_sets[j]:
                    raise StructuralError(f"asymmetric edge ({i}, {j})")
            total += len(nbrs)
        if total != 2 * self.edge_count:
            raise StructuralError("degree sum != 2 * edge_count")

    def to_arrays(self) -> tuple[np.ndarray, np.ndarray]:
        """Edge endpoints in insertion order as two int64 arrays."""
        if not self.edges:
            return np.empty(0, dtype=np.int64), np.empty(0, dtype=np.int64)
        arr = np.asarray(self.edges, dtype=np.int64)
        return np.ascontiguousarray(arr[:, 0]), np.ascontiguousarray(arr[:, 1])

    def write_edge_list(self, path):
        """Text export: one "i j" pair per line, 0-based, insertion order."""
        with open(path, "w") as fh:
            for u, v in self.edges:
                fh.write(f"{u} {v}\n")


def new_clique(n0: int) -> Graph:
    """Complete graph on ``n0`` nodes."""
    if n0 < 2:
        raise InvalidConfigError(f"clique size must be >= 2, got {n0}")
    g = Graph()
    for _ in range(n0):
        g.add_node()
    for i in range(n0):
        for j in range(i + 1, n0):
            g.add_edge(i, j)
    return g


def sample_preferential(g: Graph, rng: np.random.Generator, excluded=frozenset()) -> int:
    """Draw a node with probability proportional to its degree.

    Excluded nodes are never returned.  Fast path: rejection sampling on the
    flattened endpoint list; falls back to an exact roulette scan when the
    exclusions dominate.
    """
    total = g.degree_sum - sum(g.degree[i] for i in excluded)
    if total <= 0:
        raise SamplingExhaustedError("no candidate with positive degree outside the excluded set")
    endpoints = g._endpoints
    m = len(endpoints)
    for _ in range(_FAST_REJECT_ATTEMPTS):
        cand = endpoints[int(rng.integers(m))]
        if cand not in excluded:
            return cand
    # exact fallback over the surviving degree mass
    x = rng.random() * total
    acc = 0
    last = -1
    for i in range(g.node_count):
        if i in excluded or g.degree[i] == 0:
            continue
        acc += g.degree[i]
        last = i
        if x < acc:
            return i
    return last


def _sample_uniform(g: Graph, rng: np.random.Generator, excluded=frozenset()) -> int:
    """Uniform draw over nodes, honoring exclusions."""
    n = g.node_count
    if len(excluded) >= n:
        raise SamplingExhaustedError("all nodes excluded from uniform draw")
    while True:
        cand = int(rng.integers(n))
        if cand not in excluded:
            return cand


def grow_step_bam(g: Graph, L: int, rng: np.random.Generator):
    """One Barabasi-Albert incorporation event.

    The new node gains exactly ``L`` distinct edges, each target chosen by
    preferential attachment over the pre-existing nodes; edges are inserted
    sequentially.
    """
    if g.node_count < L:
        raise InvalidInputError(f"need at least L={L} existing nodes, have {g.node_count}")
    new = g.add_node()
    excluded = {new}
    added = []
    for _ in range(L):
        t = sample_preferential(g, rng, excluded)
        g.add_edge(new, t)
        excluded.add(t)
        added.append((new, t))
    return new, added


def grow_step_model_a(g: Graph, cfg: GrowthConfig, rng: np.random.Generator):
    """One Model A incorporation event: FL to the new node, then L-1 RLs.

    The new node enters the RL candidate pool as soon as its FL is placed.
    Every RL is redrawn from scratch whenever rejection sampling exhausts its
    attempt budget; a complete graph makes RL insertion impossible.
    """
    if g.node_count < cfg.N0:
        raise InvalidInputError(f"need at least N0={cfg.N0} existing nodes, have {g.node_count}")
    new = g.add_node()
    added = []
    # first link of the new node
    if cfg.fl_mode == FL_PREFERENTIAL:
        t = sample_preferential(g, rng, {new})
    else:
        t = _sample_uniform(g, rng, {new})
    g.add_edge(new, t)
    added.append((new, t))
    # remaining links, placed between nodes already in the system
    max_attempts = cfg.max_attempt_factor * g.node_count
    for rl_index in range(cfg.L - 1):
        random_target = cfg.one_rl_random and rl_index == 0
        placed = False
        for _restart in range(100):
            if g.is_complete():
                raise StructuralError("graph is complete; cannot place another RL")
            for _ in range(max_attempts):
                if cfg.rl_mode == RL_UNIFORM_SOURCE_PA_TARGET:
                    src = _sample_uniform(g, rng)
                    if random_target:
                        tgt = _sample_uniform(g, rng, {src})
                    else:
                        tgt = sample_preferential(g, rng, {src})
                else:
                    src = sample_preferential(g, rng)
                    tgt = _sample_uniform(g, rng, {src})
                if not g.has_edge(src, tgt):
                    g.add_edge(src, tgt)
                    added.append((src, tgt))
                    placed = True
                    break
            if placed:
                break
        if not placed:
            raise StructuralError("RL rejection sampling failed to place an edge")
    return new, added


def grow_step(g: Graph, cfg: GrowthConfig, rng: np.random.Generator):
    if cfg.model == MODEL_BAM:
        return grow_step_bam(g, cfg.L, rng)
    return grow_step_model_a(g, cfg, rng)


def grow_network(cfg: GrowthConfig, target_n: int, rng: np.random.Generator) -> Graph:
    """Grow from the N0-clique until the graph has ``target_n`` nodes."""
    if target_n < cfg.N0:
        raise InvalidConfigError(f"target size {target_n} below seed size {cfg.N0}")
    g = new_clique(cfg.N0)
    while g.node_count < target_n:
        grow_step(g, cfg, rng)
    return g


@dataclass
class DegreeDistribution:
    """Exact degree counts with the accumulated (complementary cumulative)
    distribution and a power-law tail fit."""

    counts: dict[int, int]
    ks: np.ndarray = field(repr=False)
    p_a: np.ndarray = field(repr=False)
    fitted_gamma: float | None
    fit_range: tuple[float, float]

    def cumulative(self, k: int) -> float:
        """P_a(k): fraction of nodes with degree >= k."""
        idx = np.searchsorted(self.ks, k)
        if idx >= len(self.ks):
            return 0.0
        return float(self.p_a[idx])

    def write_csv(self, fh):
        fh.write("k,count,p_a\n")
        for k, pa in zip(self.ks, self.p_a):
            fh.write(f"{int(k)},{self.counts[int(k)]},{pa:.6g}\n")


def degree_distribution(g_or_degrees, fit_range=None) -> DegreeDistribution:
    """Degree counts, accumulated distribution, and tail-exponent fit.

    The accumulated distribution decays one power slower than the density, so
    the fitted slope of ``log P_a`` vs ``log k`` is ``1 - gamma``; we report
    ``gamma``.  Default fit window is ``[10, sqrt(N)]`` to dodge the small-k
    bending and the finite-size cutoff.
    """
    if isinstance(g_or_degrees, Graph):
        degrees = np.asarray(g_or_degrees.degree, dtype=np.int64)
    else:
        degrees = np.asarray(g_or_degrees, dtype=np.int64)
    n = len(degrees)
    if n < 2:
        raise InvalidInputError("need at least 2 nodes for a degree distribution")
    ks, cnt = np.unique(degrees, return_counts=True)
    # number of nodes with degree >= k, for each observed k
    tail = np.cumsum(cnt[::-1])[::-1]
    p_a = tail / n
    if fit_range is None:
        fit_range = (10.0, math.sqrt(n))
    lo, hi = fit_range
    mask = (ks >= lo) & (ks <= hi) & (p_a > 0)
    gamma = None
    if mask.sum() >= 3:
        slope = np.polyfit(np.log(ks[mask]), np.log(p_a[mask]), 1)[0]
        gamma = float(1.0 - slope)
    return DegreeDistribution(
        counts={int(k): int(c) for k, c in zip(ks, cnt)},
        ks=ks,
        p_a=p_a,
        fitted_gamma=gamma,
        fit_range=(float(lo), float(hi)),
    )
