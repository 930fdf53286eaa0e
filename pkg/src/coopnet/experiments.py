"""Experiment protocols: r/K sweeps, fixation curves, stationarity detection.

Every protocol fans independent realizations out over a worker pool.  A
realization's random streams are derived from ``(master_seed, spawn_key)``
alone, so results are byte-identical for any worker count.  Realizations
grow their network in Python (:mod:`coopnet.netgen`) and hand the recorded
edge history to the compiled kernel (:mod:`coopnet.engine`) for the coupled
dynamics and the stationarity measurement.
"""
from __future__ import annotations

import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from . import engine, netgen
from .dynamics import (DynamicsConfig, PopulationState, UNIT_LINKS, run_generation)
from .errors import InvalidConfigError, NonStationaryError
from .game import GameConfig
from .netgen import GrowthConfig

DEFAULT_N_FINAL = 10_000


@dataclass
class StabilityConfig:
    """Stationarity stopping rule: a transient, then fixed windows until the
    standard deviation of the cooperator fraction drops to 1/sqrt(N)."""

    transient: int = 10_000
    window: int = 1_000
    max_windows: int = 50
    threshold: float | None = None  # None -> 1/sqrt(N)

    def __post_init__(self):
        if self.transient < 1 or self.window < 1 or self.max_windows < 1:
            raise InvalidConfigError("transient, window, and max_windows must be >= 1")


@dataclass
class StabilityReport:
    windows: list[tuple[float, float]]  # (mean fraction, std) per examined window
    generations: int
    stationary: bool


@dataclass
class SweepRecord:
    parameter: float
    c_bar: float
    stderr: float
    realizations: int
    discarded: int = 0


@dataclass
class FixationCurve:
    r: float
    m: int
    points: list[tuple[int, float, int]] = field(default_factory=list)  # (n_i, p_f, m_c)


def run_to_stationarity(state: PopulationState, stab: StabilityConfig, dyn: DynamicsConfig,
                        game: GameConfig, rng: np.random.Generator):
    """Reference implementation of the stopping rule on a fixed-size system.

    Returns ``(c_bar, StabilityReport)``; raises :class:`NonStationaryError`
    when the window budget runs out.
    """
    n = state.graph.node_count
    thr = stab.threshold if stab.threshold is not None else 1.0 / math.sqrt(n)
    gens = 0

    def absorbed():
        c = state.cooperator_count
        return c == 0 or c == n

    for _ in range(stab.transient):
        if absorbed():
            break
        run_generation(state, dyn, game, rng)
        gens += 1
    windows = []
    for _ in range(stab.max_windows):
        if absorbed():
            f = state.cooperator_fraction
            windows.append((f, 0.0))
            return f, StabilityReport(windows, gens, True)
        fracs = np.empty(stab.window)
        for g in range(stab.window):
            run_generation(state, dyn, game, rng)
            gens += 1
            fracs[g] = state.cooperator_fraction
        mean = float(fracs.mean())
        std = float(fracs.std())
        windows.append((mean, std))
        if std <= thr:
            return mean, StabilityReport(windows, gens, True)
    raise NonStationaryError(
        f"no stationary window within {stab.max_windows} windows (last std {windows[-1][1]:.4g})")


# ---------------------------------------------------------------------------
# realization tasks (top-level and picklable for the process pool)

@dataclass
class _Task:
    kind: str  # "growing" | "static" | "fixation"
    growth: GrowthConfig
    dyn: DynamicsConfig
    game: GameConfig
    stability: StabilityConfig
    n_final: int
    master_seed: int
    spawn_key: tuple[int, ...]
    n_i: int = 0                        # all-cooperator seed size (growing/fixation)
    network_key: tuple[int, ...] = ()   # static only: key of the shared network


def _streams(master_seed, spawn_key, count=3):
    ss = np.random.SeedSequence(entropy=master_seed, spawn_key=spawn_key)
    return ss.spawn(count)


def _kernel_seed(child) -> np.uint64:
    # kept as a numpy scalar: a plain int >= 2**63 would not coerce to the
    # kernel's unsigned seed argument
    return child.generate_state(1, np.uint64)[0]


def _run_kernel(task: _Task, edges_u, edges_v, start_nodes, start_edges, init_strat, pc, seed):
    dyn = task.dyn
    game = task.game
    stab = task.stability
    return engine.run_realization(
        edges_u, edges_v,
        start_nodes, start_edges, task.growth.L, task.n_final,
        np.asarray(init_strat, dtype=np.int8),
        float(pc), float(game.b),
        int(game.K) if game.K is not None else 0,
        engine.rule_code(dyn.rule), float(dyn.beta), engine.timing_code(dyn.timing),
        float(dyn.n), dyn.growth_unit == UNIT_LINKS,
        int(stab.transient), int(stab.window), int(stab.max_windows),
        float(stab.threshold) if stab.threshold is not None else -1.0,
        seed,
    )


def _run_task(task: _Task):
    """Run one realization; returns (c_bar, status)."""
    growth = task.growth
    if task.kind == "static":
        net_ss = np.random.SeedSequence(entropy=task.master_seed, spawn_key=task.network_key)
        g = netgen.grow_network(growth, task.n_final, np.random.default_rng(net_ss))
        strat_stream, kern_stream = _streams(task.master_seed, task.spawn_key, 2)
        strat = (np.random.default_rng(strat_stream).random(task.n_final)
                 < task.game.p_c).astype(np.int8)
        eu, ev = g.to_arrays()
        return _run_kernel(task, eu, ev, task.n_final, g.edge_count, strat,
                           0.0, _kernel_seed(kern_stream))

    if task.kind not in ("growing", "fixation"):
        raise InvalidConfigError(f"unknown task kind {task.kind!r}")
    growth_stream, kern_stream = _streams(task.master_seed, task.spawn_key, 2)
    g = netgen.grow_network(growth, task.n_final, np.random.default_rng(growth_stream))
    eu, ev = g.to_arrays()
    # dynamics start from an all-cooperator structure of n_i nodes (strategy
    # updates during the all-C phase are no-ops, so only its topology matters)
    start_nodes = task.n_i
    start_edges = growth.N0 * (growth.N0 - 1) // 2 + (task.n_i - growth.N0) * growth.L
    pc = task.game.p_c if task.kind == "growing" else 0.0
    init = np.ones(start_nodes, dtype=np.int8)
    return _run_kernel(task, eu, ev, start_nodes, start_edges, init, pc,
                       _kernel_seed(kern_stream))


def _map_tasks(tasks, workers):
    if workers is None:
        workers = os.cpu_count() or 1
    if workers <= 1 or len(tasks) <= 1:
        return [_run_task(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=workers) as ex:
        return list(ex.map(_run_task, tasks, chunksize=1))


def _aggregate(results, parameter):
    vals = [c for c, status, _ in results if status == engine.STATUS_OK]
    discarded = len(results) - len(vals)
    if not vals:
        return SweepRecord(parameter, float("nan"), float("nan"), 0, discarded)
    arr = np.asarray(vals)
    stderr = float(arr.std(ddof=1) / math.sqrt(len(arr))) if len(arr) > 1 else 0.0
    return SweepRecord(parameter, float(arr.mean()), stderr, len(arr), discarded)


# ---------------------------------------------------------------------------
# protocols

DEFAULT_SEED_SIZE = 200


def _check_seed_size(growth, seed_size, n_final):
    if seed_size < growth.N0 or seed_size > n_final:
        raise InvalidConfigError(
            f"seed_size must lie in [N0={growth.N0}, n_final={n_final}], got {seed_size}")


def sweep_r_growing(growth: GrowthConfig, dyn: DynamicsConfig, game_template: GameConfig,
                    r_values, n_final: int = DEFAULT_N_FINAL, realizations: int = 40,
                    seed_size: int = DEFAULT_SEED_SIZE,
                    stability: StabilityConfig | None = None, master_seed: int = 0,
                    workers: int | None = None) -> list[SweepRecord]:
    """Growing protocol: an all-cooperator structure of ``seed_size`` nodes
    (grown under the same model) keeps growing to ``n_final`` with incoming
    strategies drawn at ``p_c`` (0 = defectors only, the worst case the
    cooperative system must resist); the stationary cooperator fraction is
    then measured at fixed size."""
    stability = stability or StabilityConfig()
    _check_seed_size(growth, seed_size, n_final)
    records = []
    for ri, r in enumerate(r_values):
        game = replace(game_template, r=float(r))
        tasks = [_Task("growing", growth, dyn, game, stability, n_final,
                       master_seed, (1, ri, rep), n_i=seed_size)
                 for rep in range(realizations)]
        records.append(_aggregate(_map_tasks(tasks, workers), float(r)))
    return records


def sweep_r_static(growth: GrowthConfig, dyn: DynamicsConfig, game_template: GameConfig,
                   r_values, n_final: int = DEFAULT_N_FINAL, networks: int = 10,
                   initial_conditions: int = 10, stability: StabilityConfig | None = None,
                   master_seed: int = 0, workers: int | None = None) -> list[SweepRecord]:
    """Static baseline: pre-grown networks, strategies assigned at p_c, no
    growth during the dynamics.  ``networks x initial_conditions``
    realizations per r value."""
    stability = stability or StabilityConfig()
    records = []
    for ri, r in enumerate(r_values):
        game = replace(game_template, r=float(r))
        tasks = [_Task("static", growth, dyn, game, stability, n_final,
                       master_seed, (2, ri, net, ic), network_key=(0, net))
                 for net in range(networks) for ic in range(initial_conditions)]
        records.append(_aggregate(_map_tasks(tasks, workers), float(r)))
    return records


def fixation_probability(growth: GrowthConfig, dyn: DynamicsConfig, game: GameConfig,
                         n_i_values, m: int = 500, n_final: int = DEFAULT_N_FINAL,
                         stability: StabilityConfig | None = None, master_seed: int = 0,
                         workers: int | None = None) -> FixationCurve:
    """P_f(N_i): probability that a grown structure of N_i cooperators keeps
    a cooperator majority while growing to ``n_final`` by defectors only."""
    stability = stability or StabilityConfig()
    curve = FixationCurve(r=game.r, m=m)
    for ni_idx, n_i in enumerate(n_i_values):
        if n_i < growth.N0:
            raise InvalidConfigError(f"N_i={n_i} below seed size N0={growth.N0}")
        tasks = [_Task("fixation", growth, dyn, game, stability, n_final,
                       master_seed, (3, ni_idx, trial), n_i=int(n_i))
                 for trial in range(m)]
        results = _map_tasks(tasks, workers)
        m_c = sum(1 for c, status, _ in results
                  if status == engine.STATUS_OK and c > 0.5)
        curve.points.append((int(n_i), m_c / m, m_c))
    return curve


def sweep_k(growth: GrowthConfig, dyn: DynamicsConfig, game_template: GameConfig,
            k_values, n_final: int = DEFAULT_N_FINAL, realizations: int = 40,
            seed_size: int = DEFAULT_SEED_SIZE,
            stability: StabilityConfig | None = None, master_seed: int = 0,
            workers: int | None = None) -> list[SweepRecord]:
    """Growing protocol with the potentiality cap swept; ``None`` in
    ``k_values`` means unbounded."""
    stability = stability or StabilityConfig()
    _check_seed_size(growth, seed_size, n_final)
    records = []
    for ki, k in enumerate(k_values):
        game = replace(game_template, K=None if k is None else int(k))
        tasks = [_Task("growing", growth, dyn, game, stability, n_final,
                       master_seed, (4, ki, rep), n_i=seed_size)
                 for rep in range(realizations)]
        rec = _aggregate(_map_tasks(tasks, workers),
                         float("inf") if k is None else float(k))
        records.append(rec)
    return records


def estimate_rc(records: list[SweepRecord]) -> float:
    """Transition estimate: midpoint of the steepest rise of c-bar on the grid."""
    if len(records) < 2:
        raise InvalidConfigError("need at least two sweep points to estimate a threshold")
    best, best_rise = 0, -math.inf
    for i in range(len(records) - 1):
        rise = records[i + 1].c_bar - records[i].c_bar
        if rise > best_rise:
            best_rise = rise
            best = i
    return 0.5 * (records[best].parameter + records[best + 1].parameter)


def wilson_interval(successes: int, trials: int, z: float = 1.96) -> tuple[float, float]:
    """Wilson 95% score interval for a binomial proportion."""
    if trials == 0:
        return 0.0, 1.0
    p = successes / trials
    denom = 1.0 + z * z / trials
    center = (p + z * z / (2 * trials)) / denom
    half = z * math.sqrt(p * (1 - p) / trials + z * z / (4 * trials * trials)) / denom
    return max(0.0, center - half), min(1.0, center + half)


# ---------------------------------------------------------------------------
# CSV emission (6 significant digits)

def _fmt(x) -> str:
    return f"{x:.6g}"


def write_sweep_csv(records: list[SweepRecord], fh):
    fh.write("param,c_bar,stderr,realizations\n")
    for rec in records:
        fh.write(f"{_fmt(rec.parameter)},{_fmt(rec.c_bar)},{_fmt(rec.stderr)},{rec.realizations}\n")


def write_fixation_csv(curve: FixationCurve, fh):
    fh.write("n_i,p_f,m,m_c\n")
    for n_i, p_f, m_c in curve.points:
        fh.write(f"{n_i},{_fmt(p_f)},{curve.m},{m_c}\n")


def write_analyzer_csv(rows, fh):
    fh.write("scenario,threshold,outcome\n")
    for res in rows:
        thr = "" if res.threshold is None else _fmt(res.threshold)
        fh.write(f"{res.scenario},{thr},{res.outcome}\n")
