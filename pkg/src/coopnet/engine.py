"""Compiled simulation kernel for full-scale realizations.

Topology evolution is decoupled from the strategies, so a realization is run
in two stages: :mod:`coopnet.netgen` grows the network and records the edge
insertion history, then :func:`run_realization` replays that history while
running the strategy dynamics and the stationarity measurement in compiled
code.  The kernel carries its own splitmix64 RNG state so realizations are
deterministic and independent of thread or process scheduling.

All arguments mirror the Python reference implementation in
:mod:`coopnet.dynamics`; the scalar update formulas are identical.
"""
from __future__ import annotations

import math

import numpy as np
from numba import njit

RULE_IMITATION = 0
RULE_FERMI = 1
TIMING_SYNC = 0
TIMING_ASYNC = 1

STATUS_OK = 0
STATUS_NONSTATIONARY = 1

_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_MIX1 = np.uint64(0xBF58476D1CE4E5B9)
_MIX2 = np.uint64(0x94D049BB133111EB)


@njit(cache=True, inline="always")
def _next_u64(st):
    st[0] += _GOLDEN
    z = st[0]
    z = (z ^ (z >> np.uint64(30))) * _MIX1
    z = (z ^ (z >> np.uint64(27))) * _MIX2
    return z ^ (z >> np.uint64(31))


@njit(cache=True, inline="always")
def _rand(st):
    return (_next_u64(st) >> np.uint64(11)) * 1.1102230246251565e-16  # 2**-53


@njit(cache=True, inline="always")
def _randint(st, bound):
    # multiply-shift; bias ~ bound / 2**32, negligible at simulation sizes
    return int(((_next_u64(st) >> np.uint64(32)) * np.uint64(bound)) >> np.uint64(32))


@njit(cache=True)
def _payoffs(edges_u, edges_v, cur_e, strat, cur_deg, cur_n, b, cap, kc, eff):
    for i in range(cur_n):
        kc[i] = 0
    for e in range(cur_e):
        u = edges_u[e]
        v = edges_v[e]
        kc[u] += strat[v]
        kc[v] += strat[u]
    for i in range(cur_n):
        if strat[i] == 1:
            p = kc[i] * b - cur_deg[i]
        else:
            p = kc[i] * b
        k = cur_deg[i]
        if cap > 0 and k > cap:
            p = p * cap / k
        eff[i] = p


@njit(cache=True)
def _node_payoff(adj, indptr, cur_deg, strat, i, b, cap):
    k = cur_deg[i]
    kc = 0
    base = indptr[i]
    for a in range(k):
        kc += strat[adj[base + a]]
    if strat[i] == 1:
        p = kc * b - k
    else:
        p = kc * b
    if cap > 0 and k > cap:
        p = p * cap / k
    return p


@njit(cache=True)
def _generation(edges_u, edges_v, cur_e, adj, indptr, cur_deg, strat, new_strat,
                kc, eff, cur_n, b, cap, rule, beta, timing, st):
    """One generation; returns the new cooperator count."""
    if timing == TIMING_SYNC:
        _payoffs(edges_u, edges_v, cur_e, strat, cur_deg, cur_n, b, cap, kc, eff)
        for i in range(cur_n):
            new_strat[i] = strat[i]
            k_i = cur_deg[i]
            if k_i == 0:
                continue
            j = adj[indptr[i] + _randint(st, k_i)]
            p_i = eff[i]
            p_j = eff[j]
            if rule == RULE_IMITATION:
                if p_j > p_i:
                    k_m = max(k_i, cur_deg[j])
                    p = (p_j - p_i) / (k_m * (b + 1.0))
                else:
                    p = 0.0
            else:
                p = 1.0 / (1.0 + math.exp(-beta * (p_j - p_i)))
            if p > 0.0 and _rand(st) < p:
                new_strat[i] = strat[j]
        c = 0
        for i in range(cur_n):
            strat[i] = new_strat[i]
            c += strat[i]
        return c
    # asynchronous: cur_n immediate-commit pair events
    c = 0
    for i in range(cur_n):
        c += strat[i]
    for _ in range(cur_n):
        i = _randint(st, cur_n)
        k_i = cur_deg[i]
        if k_i == 0:
            continue
        j = adj[indptr[i] + _randint(st, k_i)]
        p_i = _node_payoff(adj, indptr, cur_deg, strat, i, b, cap)
        p_j = _node_payoff(adj, indptr, cur_deg, strat, j, b, cap)
        if rule == RULE_IMITATION:
            if p_j > p_i:
                k_m = max(k_i, cur_deg[j])
                p = (p_j - p_i) / (k_m * (b + 1.0))
            else:
                p = 0.0
        else:
            p = 1.0 / (1.0 + math.exp(-beta * (p_j - p_i)))
        if p > 0.0 and _rand(st) < p:
            if strat[i] != strat[j]:
                c += strat[j] - strat[i]
                strat[i] = strat[j]
    return c


@njit(cache=True)
def run_realization(edges_u, edges_v, start_nodes, start_edges, links_per_event,
                    n_final, init_strat, pc, b, cap, rule, beta, timing,
                    n_frac, link_mode, transient, window, max_windows,
                    fluct_threshold, seed):
    """Replay a growth history with coupled dynamics, then measure c-bar.

    ``edges_u/edges_v``: full edge insertion history up to ``n_final`` nodes;
    the first ``start_edges`` edges (and ``start_nodes`` nodes, with
    strategies ``init_strat``) are present before dynamics start.  Arrival
    events after that add exactly ``links_per_event`` edges each.
    ``cap <= 0`` disables the potentiality cap; ``fluct_threshold <= 0``
    selects the default 1/sqrt(N).

    Returns ``(c_bar, status, generations)``.
    """
    st = np.empty(1, dtype=np.uint64)
    st[0] = np.uint64(seed)

    n_total = n_final
    e_total = len(edges_u)

    # CSR sized by final degrees; filled incrementally in insertion order
    final_deg = np.zeros(n_total, dtype=np.int64)
    for e in range(e_total):
        final_deg[edges_u[e]] += 1
        final_deg[edges_v[e]] += 1
    indptr = np.zeros(n_total + 1, dtype=np.int64)
    for i in range(n_total):
        indptr[i + 1] = indptr[i] + final_deg[i]
    adj = np.empty(2 * e_total, dtype=np.int64)
    cur_deg = np.zeros(n_total, dtype=np.int64)

    strat = np.zeros(n_total, dtype=np.int8)
    new_strat = np.zeros(n_total, dtype=np.int8)
    kc = np.zeros(n_total, dtype=np.int64)
    eff = np.zeros(n_total, dtype=np.float64)

    cur_n = start_nodes
    c = 0
    for i in range(start_nodes):
        strat[i] = init_strat[i]
        c += strat[i]
    cur_e = 0
    for e in range(start_edges):
        u = edges_u[e]
        v = edges_v[e]
        adj[indptr[u] + cur_deg[u]] = v
        adj[indptr[v] + cur_deg[v]] = u
        cur_deg[u] += 1
        cur_deg[v] += 1
        cur_e += 1

    generations = 0
    acc = 0.0
    nodes_ref = cur_n
    edges_ref = cur_e
    eps = n_frac * 1e-9
    edge_ptr = cur_e

    while cur_n < n_final:
        # absorbing shortcuts: no strategy contrast can ever appear again
        if pc == 0.0 and c == 0:
            return 0.0, STATUS_OK, generations
        if pc == 1.0 and c == cur_n:
            return 1.0, STATUS_OK, generations
        # incorporate one node; strategy drawn before its edges are placed
        if _rand(st) < pc:
            strat[cur_n] = 1
            c += 1
        else:
            strat[cur_n] = 0
        cur_n += 1
        for _ in range(links_per_event):
            u = edges_u[edge_ptr]
            v = edges_v[edge_ptr]
            adj[indptr[u] + cur_deg[u]] = v
            adj[indptr[v] + cur_deg[v]] = u
            cur_deg[u] += 1
            cur_deg[v] += 1
            cur_e += 1
            edge_ptr += 1
            if link_mode:
                acc += 1.0 / edges_ref
                while acc >= n_frac - eps:
                    if c != 0 and c != cur_n:
                        c = _generation(edges_u, edges_v, cur_e, adj, indptr, cur_deg,
                                        strat, new_strat, kc, eff, cur_n, b, cap,
                                        rule, beta, timing, st)
                    generations += 1
                    acc -= n_frac
                    edges_ref = cur_e
        if not link_mode:
            acc += 1.0 / nodes_ref
            while acc >= n_frac - eps:
                if c != 0 and c != cur_n:
                    c = _generation(edges_u, edges_v, cur_e, adj, indptr, cur_deg,
                                    strat, new_strat, kc, eff, cur_n, b, cap,
                                    rule, beta, timing, st)
                generations += 1
                acc -= n_frac
                nodes_ref = cur_n

    # stationarity measurement at fixed size
    n = cur_n
    thr = fluct_threshold if fluct_threshold > 0 else 1.0 / math.sqrt(n)
    for _ in range(transient):
        if c == 0 or c == n:
            break
        c = _generation(edges_u, edges_v, cur_e, adj, indptr, cur_deg, strat,
                        new_strat, kc, eff, n, b, cap, rule, beta, timing, st)
        generations += 1
    mean = c / n
    for _ in range(max_windows):
        if c == 0 or c == n:
            return c / n, STATUS_OK, generations
        s = 0.0
        s2 = 0.0
        for _ in range(window):
            c = _generation(edges_u, edges_v, cur_e, adj, indptr, cur_deg, strat,
                            new_strat, kc, eff, n, b, cap, rule, beta, timing, st)
            generations += 1
            f = c / n
            s += f
            s2 += f * f
        mean = s / window
        var = s2 / window - mean * mean
        if var < 0.0:
            var = 0.0
        if math.sqrt(var) <= thr:
            return mean, STATUS_OK, generations
    return mean, STATUS_NONSTATIONARY, generations


def rule_code(rule: str) -> int:
    return RULE_IMITATION if rule == "imitation" else RULE_FERMI


def timing_code(timing: str) -> int:
    return TIMING_SYNC if timing == "sync" else TIMING_ASYNC
