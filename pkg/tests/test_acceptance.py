"""End-to-end acceptance runs at reduced desk scale.

Each test covers one headline result and emits a single PASS/FAIL line
(visible in the pytest summary via ``-rA``).  The heavy sweeps are shared
module-scope fixtures; the full module takes tens of minutes on one core.
"""
import io

import numpy as np
import pytest

from coopnet import experiments, game, netgen, smallsys
from coopnet.dynamics import DynamicsConfig
from coopnet.experiments import (StabilityConfig, estimate_rc,
                                 fixation_probability, sweep_k,
                                 sweep_r_growing, sweep_r_static,
                                 wilson_interval, write_sweep_csv)
from coopnet.game import GameConfig

SEED = 20260826


def _report(name, ok, detail):
    line = f"[{name}] {'PASS' if ok else 'FAIL'}: {detail}"
    print(line)
    return ok


def _grid(lo, hi, step):
    count = int(round((hi - lo) / step)) + 1
    return [round(lo + i * step, 10) for i in range(count)]


def _growing(growth, r_values, *, n_final=5000, realizations=10, seed=SEED,
             dyn=None, seed_size=200):
    return sweep_r_growing(growth, dyn or DynamicsConfig(),
                           GameConfig(r=2.0, p_c=0.0), r_values,
                           n_final=n_final, realizations=realizations,
                           seed_size=seed_size, master_seed=seed, workers=1)


# ---------------------------------------------------------------------------
# criterion 1: degree structure

def _pooled_degrees(growth, networks, n, seed):
    degrees = []
    rng_root = np.random.SeedSequence(entropy=seed, spawn_key=(100,))
    for child in rng_root.spawn(networks):
        g = netgen.grow_network(growth, n, np.random.default_rng(child))
        degrees.extend(g.degree)
    return np.asarray(degrees)


def test_criterion_1_degree_structure():
    n, networks, L = 10_000, 20, 3
    results = {}
    for label, growth in (("bam", netgen.GrowthConfig(model="bam", L=L)),
                          ("model_a", netgen.GrowthConfig(model="model_a", L=L))):
        degrees = _pooled_degrees(growth, networks, n, SEED)
        dist = netgen.degree_distribution(degrees, fit_range=(10, 100))
        results[label] = (dist.fitted_gamma, degrees.mean(),
                          float((degrees < L).mean()))
    ok = True
    for label, (gamma, mean_k, frac_low) in results.items():
        ok &= abs(gamma - 2.9) <= 0.3
        ok &= abs(mean_k - 2 * L) / (2 * L) <= 0.02
    ok &= results["model_a"][2] > 0.0
    assert _report(
        "criterion 1", ok,
        f"gamma bam={results['bam'][0]:.2f} model_a={results['model_a'][0]:.2f} "
        f"(target 2.9 +/- 0.3); mean degree bam={results['bam'][1]:.3f} "
        f"model_a={results['model_a'][1]:.3f} (target 6 +/- 2%); "
        f"model_a frac k<L={results['model_a'][2]:.4f} (> 0)")


# ---------------------------------------------------------------------------
# criterion 2 fixture reused by criterion 3

@pytest.fixture(scope="module")
def bam_growing_l3():
    return _growing(netgen.GrowthConfig(model="bam", L=3), _grid(2.0, 4.0, 0.1))


def test_criterion_2_growing_bam_transition(bam_growing_l3):
    records = bam_growing_l3
    rc = estimate_rc(records)
    low = records[0].c_bar
    high = records[-1].c_bar
    ok = abs(rc - 2.9) <= 0.3 and low < 0.1 and high > 0.8
    assert _report(
        "criterion 2", ok,
        f"growing BAM L=3 r_c={rc:.2f} (target 2.9 +/- 0.3), "
        f"c_bar(r=2.0)={low:.3f} (< 0.1), c_bar(r=4.0)={high:.3f} (> 0.8)")


def _static(L, seed_offset):
    return sweep_r_static(
        netgen.GrowthConfig(model="bam", L=L), DynamicsConfig(),
        GameConfig(r=2.0, p_c=0.5), _grid(3.0, 8.0, 0.5), n_final=3000,
        networks=5, initial_conditions=2, master_seed=SEED + seed_offset,
        workers=1)


def test_criterion_3_growing_vs_static_ordering(bam_growing_l3):
    rc_growing = estimate_rc(bam_growing_l3)
    rc_static = {L: estimate_rc(_static(L, 300 + L)) for L in (2, 3, 4)}
    ok = rc_static[3] > rc_growing and rc_static[4] >= rc_static[2]
    assert _report(
        "criterion 3", ok,
        f"static BAM r_c: L=2 {rc_static[2]:.2f}, L=3 {rc_static[3]:.2f}, "
        f"L=4 {rc_static[4]:.2f}; growing L=3 {rc_growing:.2f}; "
        f"needs static(L=3) > growing and static(L=4) >= static(L=2)")


# ---------------------------------------------------------------------------
# criterion 4: Model A first transition

def test_criterion_4_model_a_first_transition():
    rc1_l2 = estimate_rc(_growing(netgen.GrowthConfig(model="model_a", L=2),
                                  _grid(1.4, 3.0, 0.2)))
    rc1_l8 = estimate_rc(_growing(netgen.GrowthConfig(model="model_a", L=8),
                                  _grid(1.0, 2.6, 0.2)))
    rc_bam_l2 = estimate_rc(_growing(netgen.GrowthConfig(model="bam", L=2),
                                     _grid(2.0, 3.6, 0.2)))
    rc1_l32 = estimate_rc(_growing(netgen.GrowthConfig(model="model_a", L=32),
                                   _grid(0.5, 2.1, 0.4), n_final=3000,
                                   realizations=6))
    ok = rc1_l8 < rc1_l2 < rc_bam_l2 and abs(rc1_l32 - 1.3) <= 0.4
    assert _report(
        "criterion 4", ok,
        f"Model A r_c1: L=8 {rc1_l8:.2f} < L=2 {rc1_l2:.2f} < BAM L=2 "
        f"{rc_bam_l2:.2f}; L=32 spot {rc1_l32:.2f} (target 1.3 +/- 0.4)")


# ---------------------------------------------------------------------------
# criterion 5: fixation curves at r = 3.5

def _fixation(growth, ni_values, *, link_mode=False, seed_offset=0, m=100):
    dyn = DynamicsConfig(growth_unit="links" if link_mode else "nodes")
    return fixation_probability(growth, dyn, GameConfig(r=3.5, p_c=0.0),
                                ni_values, m=m, n_final=2000,
                                master_seed=SEED + seed_offset, workers=1)


def test_criterion_5_fixation_curves():
    bam = _fixation(netgen.GrowthConfig(model="bam", L=3),
                    [10, 25, 50, 100, 200], seed_offset=500)
    a_node = _fixation(netgen.GrowthConfig(model="model_a", L=3),
                       [3, 5, 10, 25, 50], seed_offset=501)
    a_link = _fixation(netgen.GrowthConfig(model="model_a", L=3), [3],
                       link_mode=True, seed_offset=502)

    def fixated(curve, ni_max):
        """P_f consistent with 1 (Wilson 95% upper bound) at some N_i <= ni_max."""
        for n_i, p_f, m_c in curve.points:
            if n_i <= ni_max and p_f >= 0.99 \
                    and wilson_interval(m_c, curve.m)[1] >= 0.999:
                return n_i
        return None

    bam_nc = fixated(bam, 200)
    a_nc = fixated(a_node, 50)
    rise_exists = bam.points[0][1] < 0.95  # N_i = 10 is still inside the rise
    link_pf = a_link.points[0][1]
    ok = (bam_nc is not None and a_nc is not None and rise_exists
          and link_pf >= 0.95)
    assert _report(
        "criterion 5", ok,
        f"BAM P_f=1 by N_i={bam_nc} (<= 200, rise from "
        f"P_f({bam.points[0][0]})={bam.points[0][1]:.2f}); Model A node-mode "
        f"P_f=1 by N_i={a_nc} (<= 50); Model A link-mode P_f(N_i=N0=3)="
        f"{link_pf:.2f} (>= 0.95)")


# ---------------------------------------------------------------------------
# criterion 6: potentiality transition

def test_criterion_6_potentiality_transition():
    growth = netgen.GrowthConfig(model="model_a", L=3)
    records = sweep_k(growth, DynamicsConfig(), GameConfig(r=2.8, p_c=0.0),
                      [1, 2, 4, 8, 16, 32, 64, None], n_final=5000,
                      realizations=10, seed_size=200, master_seed=SEED + 600,
                      workers=1)
    finite = records[:-1]
    unbounded = records[-1]
    rise = any(rec.c_bar > 0.5 for rec in finite)
    suppressed = finite[0].c_bar < 0.1
    compare = _growing(growth, [2.8], seed=SEED + 601)[0]
    gap = abs(unbounded.c_bar - compare.c_bar)
    band = 2.0 * np.hypot(unbounded.stderr, compare.stderr)
    ok = rise and suppressed and gap <= max(band, 1e-9)
    values = ", ".join(f"K={rec.parameter:g}:{rec.c_bar:.2f}" for rec in records)
    assert _report(
        "criterion 6", ok,
        f"{values}; unbounded vs independent growing run at r=2.8: "
        f"|{unbounded.c_bar:.3f} - {compare.c_bar:.3f}| = {gap:.3f} "
        f"<= {band:.3f} (2 stderr)")


# ---------------------------------------------------------------------------
# criterion 7: small-system oracle

def test_criterion_7_small_system_oracle():
    ok = smallsys.analyze("star3_defector", 3.5).threshold == pytest.approx(3.0)
    for k in range(2, 11):
        ok &= smallsys.analyze("hub_k", 2.0, k=k).threshold == pytest.approx(
            (k + 1) / (k - 1))
    ok &= smallsys.analyze("parent_child", 2.0, d=1.0).threshold == pytest.approx(2.0)
    for r in (0.5, 2.0, 10.0):
        ok &= smallsys.analyze("two_node", r).outcome == smallsys.DEFECT_FIXES

    agreements = 0
    trials_total = 0
    cases = [("star3_defector", 3.2, {}, smallsys.COOP_FIXES),
             ("star3_defector", 2.8, {}, smallsys.DEFECT_FIXES),
             ("two_node", 2.0, {}, smallsys.DEFECT_FIXES),
             ("two_node", 5.0, {}, smallsys.DEFECT_FIXES),
             ("parent_child", 2.0, {"d": 2.2}, smallsys.COOP_FIXES),
             ("parent_child", 2.0, {"d": 1.8}, smallsys.DEFECT_FIXES)]
    for k in range(2, 11):
        t = (k + 1) / (k - 1)
        cases.append(("hub_k", t + 0.2, {"k": k}, smallsys.COOP_FIXES))
        cases.append(("hub_k", t - 0.2, {"k": k}, smallsys.DEFECT_FIXES))
    dyn = DynamicsConfig(n=1e-4)
    rng = np.random.default_rng(SEED)
    for scenario, r, kw, expected in cases:
        for _ in range(100):
            trials_total += 1
            if smallsys.simulate(scenario, r, rng, dyn=dyn, **kw) == expected:
                agreements += 1
    ok &= agreements == trials_total
    assert _report(
        "criterion 7", ok,
        f"analyzer thresholds exact; simulator agreement "
        f"{agreements}/{trials_total} across both sides of every threshold")


# ---------------------------------------------------------------------------
# criterion 8: property suites

def test_criterion_8_property_suites():
    rng = np.random.default_rng(SEED)
    ok = True

    # payoff-oracle equivalence on 1000 random graphs (exact)
    for _ in range(1000):
        n = int(rng.integers(2, 14))
        g = netgen.Graph()
        for _ in range(n):
            g.add_node()
        for i in range(n):
            for j in range(i + 1, n):
                if rng.random() < 0.4:
                    g.add_edge(i, j)
        strat = rng.integers(0, 2, size=n).astype(np.int8)
        cfg = GameConfig(r=float(rng.uniform(0.5, 6.0)))
        pv = game.compute_all_payoffs(g, strat, cfg)
        for i in range(n):
            k = g.degree[i]
            k_c = sum(int(strat[j]) for j in g.adjacency[i])
            expect = k_c * cfg.b - k if strat[i] else k_c * cfg.b
            ok &= pv.raw[i] == pytest.approx(expect, abs=1e-12)

    # imitation probability stays in [0, 1] on fuzzed realizable payoffs
    from coopnet.dynamics import imitation_probability
    for _ in range(10_000):
        cfg = GameConfig(r=float(rng.uniform(0.01, 50.0)))
        k_i, k_j = int(rng.integers(1, 300)), int(rng.integers(1, 300))
        p_i = float(rng.uniform(-k_i, k_i * cfg.b))
        p_j = float(rng.uniform(-k_j, k_j * cfg.b))
        p = imitation_probability(p_i, p_j, k_i, k_j, cfg)
        ok &= 0.0 <= p <= 1.0

    # homogeneous-state absorption under every rule/timing combination
    from coopnet.dynamics import initial_state, run_generation
    g = netgen.grow_network(netgen.GrowthConfig(L=2), 30, rng)
    for rule, timing in (("imitation", "sync"), ("imitation", "async"),
                         ("fermi", "sync"), ("fermi", "async")):
        for val in (0, 1):
            state = initial_state(g, np.full(30, val))
            for _ in range(3):
                run_generation(state, DynamicsConfig(rule=rule, timing=timing),
                               GameConfig(r=3.0), rng)
            ok &= (state.strategies == val).all()

    # identical CSV bytes irrespective of worker count
    def sweep_bytes(workers):
        records = sweep_r_growing(
            netgen.GrowthConfig(L=3), DynamicsConfig(n=0.005),
            GameConfig(r=2.0, p_c=0.0), [3.4], n_final=150, realizations=3,
            seed_size=50, stability=StabilityConfig(transient=200, window=100,
                                                    max_windows=10),
            master_seed=SEED + 800, workers=workers)
        buf = io.StringIO()
        write_sweep_csv(records, buf)
        return buf.getvalue()

    ok &= sweep_bytes(1) == sweep_bytes(2)

    # the stationarity rule halts on an absorbing state at the first window
    from coopnet.experiments import run_to_stationarity
    state = initial_state(netgen.new_clique(5), np.zeros(5, dtype=np.int8))
    c_bar, report = run_to_stationarity(
        state, StabilityConfig(transient=100, window=50, max_windows=5),
        DynamicsConfig(), GameConfig(r=2.0), rng)
    ok &= c_bar == 0.0 and report.stationary and len(report.windows) == 1

    assert _report(
        "criterion 8", ok,
        "payoff oracle exact on 1000 graphs; imitation probability in [0,1] "
        "on 10000 fuzzed inputs; homogeneous absorption; CSV identical for "
        "1 vs 2 workers; stationarity halts on absorbing first window")
