"""Graph container and growth-model tests."""
import numpy as np
import pytest

from coopnet import netgen
from coopnet.errors import (InvalidConfigError, InvalidInputError,
                            SamplingExhaustedError, StructuralError)


def test_clique_sizes():
    for n0 in (2, 3, 5):
        g = netgen.new_clique(n0)
        assert g.node_count == n0
        assert g.edge_count == n0 * (n0 - 1) // 2
        assert all(d == n0 - 1 for d in g.degree)
        g.audit()


def test_clique_too_small():
    with pytest.raises(InvalidConfigError):
        netgen.new_clique(1)


def test_add_edge_rejects_self_loop_and_duplicate():
    g = netgen.new_clique(2)
    with pytest.raises(StructuralError):
        g.add_edge(0, 0)
    with pytest.raises(StructuralError):
        g.add_edge(1, 0)  # (0, 1) already present, either orientation


def test_growth_config_validation():
    with pytest.raises(InvalidConfigError):
        netgen.GrowthConfig(model="other")
    with pytest.raises(InvalidConfigError):
        netgen.GrowthConfig(L=0)
    with pytest.raises(InvalidConfigError):
        netgen.GrowthConfig(L=4, N0=3)  # L must not exceed the seed size
    with pytest.raises(InvalidConfigError):
        netgen.GrowthConfig(N0=1)
    with pytest.raises(InvalidConfigError):
        netgen.GrowthConfig(L=1, one_rl_random=True)
    cfg = netgen.GrowthConfig(L=4)
    assert cfg.N0 == 4  # defaults to L


def test_bam_node_and_edge_counts():
    cfg = netgen.GrowthConfig(model=netgen.MODEL_BAM, L=3)
    g = netgen.grow_network(cfg, 200, np.random.default_rng(1))
    assert g.node_count == 200
    n0 = cfg.N0
    assert g.edge_count == n0 * (n0 - 1) // 2 + (200 - n0) * cfg.L
    assert min(g.degree) >= cfg.L  # every arrival places all L edges itself
    g.audit()


def test_model_a_node_and_edge_counts():
    cfg = netgen.GrowthConfig(model=netgen.MODEL_A, L=3)
    g = netgen.grow_network(cfg, 200, np.random.default_rng(2))
    assert g.node_count == 200
    n0 = cfg.N0
    assert g.edge_count == n0 * (n0 - 1) // 2 + (200 - n0) * cfg.L
    g.audit()


def test_model_a_has_low_degree_nodes():
    # nodes kept at their first link only: degree < L must occur
    cfg = netgen.GrowthConfig(model=netgen.MODEL_A, L=5, N0=5)
    g = netgen.grow_network(cfg, 2000, np.random.default_rng(3))
    assert sum(1 for d in g.degree if d < cfg.L) > 0


def test_every_event_adds_exactly_l_edges():
    for model in (netgen.MODEL_BAM, netgen.MODEL_A):
        cfg = netgen.GrowthConfig(model=model, L=3)
        g = netgen.new_clique(cfg.N0)
        rng = np.random.default_rng(4)
        for _ in range(50):
            before = g.edge_count
            _, added = netgen.grow_step(g, cfg, rng)
            assert g.edge_count - before == cfg.L
            assert len(added) == cfg.L
        g.audit()


def test_preferential_sampling_frequencies():
    # star-with-extras: hub degrees 8 vs 4 -> draw ratio must track degree
    g = netgen.Graph()
    hub_a, hub_b = g.add_node(), g.add_node()
    for _ in range(8):
        leaf = g.add_node()
        g.add_edge(hub_a, leaf)
    for _ in range(4):
        leaf = g.add_node()
        g.add_edge(hub_b, leaf)
    rng = np.random.default_rng(5)
    trials = 100_000
    hits = np.zeros(g.node_count)
    for _ in range(trials):
        hits[netgen.sample_preferential(g, rng)] += 1
    total_deg = g.degree_sum
    for node in (hub_a, hub_b):
        p = g.degree[node] / total_deg
        sigma = (trials * p * (1 - p)) ** 0.5
        assert abs(hits[node] - trials * p) < 3 * sigma


def test_preferential_sampling_honors_exclusions():
    g = netgen.new_clique(4)
    rng = np.random.default_rng(6)
    excluded = {0, 1}
    for _ in range(200):
        assert netgen.sample_preferential(g, rng, excluded) in (2, 3)
    with pytest.raises(SamplingExhaustedError):
        netgen.sample_preferential(g, rng, {0, 1, 2, 3})


def test_grow_step_bam_needs_enough_nodes():
    g = netgen.new_clique(2)
    with pytest.raises(InvalidInputError):
        netgen.grow_step_bam(g, 3, np.random.default_rng(0))


def test_model_a_first_link_belongs_to_newcomer():
    cfg = netgen.GrowthConfig(model=netgen.MODEL_A, L=3, N0=3)
    for seed in range(20):
        g = netgen.new_clique(3)
        new, added = netgen.grow_step_model_a(g, cfg, np.random.default_rng(seed))
        assert added[0][0] == new  # the FL runs from the new node
        assert added[0][1] != new
        assert len(added) == cfg.L
        g.audit()


def test_to_arrays_preserves_insertion_order():
    g = netgen.new_clique(3)
    g.add_node()
    g.add_edge(3, 0)
    eu, ev = g.to_arrays()
    assert list(zip(eu.tolist(), ev.tolist())) == g.edges


def test_write_edge_list_round_trip(tmp_path):
    cfg = netgen.GrowthConfig(L=2)
    g = netgen.grow_network(cfg, 30, np.random.default_rng(8))
    path = tmp_path / "edges.txt"
    g.write_edge_list(path)
    pairs = [tuple(map(int, line.split())) for line in path.read_text().splitlines()]
    assert pairs == g.edges


def test_degree_distribution_counts_and_cumulative():
    degrees = [1, 1, 2, 3, 3, 3]
    dist = netgen.degree_distribution(degrees, fit_range=(1, 3))
    assert dist.counts == {1: 2, 2: 1, 3: 3}
    assert dist.cumulative(1) == pytest.approx(1.0)
    assert dist.cumulative(2) == pytest.approx(4 / 6)
    assert dist.cumulative(3) == pytest.approx(3 / 6)
    assert dist.cumulative(4) == 0.0


def test_degree_distribution_gamma_recovers_power_law():
    # synthetic pure power law p(k) ~ k^-3 -> accumulated slope -2, gamma 3
    rng = np.random.default_rng(9)
    ks = np.arange(1, 2000)
    weights = ks.astype(float) ** -3
    weights /= weights.sum()
    degrees = rng.choice(ks, size=400_000, p=weights)
    dist = netgen.degree_distribution(degrees, fit_range=(5, 80))
    assert dist.fitted_gamma == pytest.approx(3.0, abs=0.2)


def test_degree_distribution_csv(tmp_path):
    dist = netgen.degree_distribution([1, 2, 2], fit_range=(1, 2))
    path = tmp_path / "dd.csv"
    with open(path, "w") as fh:
        dist.write_csv(fh)
    lines = path.read_text().splitlines()
    assert lines[0] == "k,count,p_a"
    assert lines[1].startswith("1,1,")
    assert lines[2].startswith("2,2,")
