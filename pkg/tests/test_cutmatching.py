import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from _fixtures import satellite_fixture
from expander import oracle
from expander.cutmatching import (
    BALANCED,
    EXPANDER,
    NEAR_EXPANDER,
    CutMatchConfig,
    apply_matching,
    bisect,
    bisection_violations,
    cut_match,
    matching_capacity,
    project_flow_vectors,
    random_directions,
    round_count,
    routing_height,
    strip_paths,
)
from expander.errors import ParameterError
from expander.generators import barbell, clique, cycle
from expander.graph import Graph, conductance
from expander.unitflow import FlowInstance, PreflowState, unit_flow

finite = st.floats(-1e3, 1e3, allow_nan=False, allow_infinity=False)


def test_parameters():
    assert round_count(120) == math.ceil(16 * math.log2(120) ** 2)
    assert round_count(2) == 16 and round_count(2, 0.01) == 1
    assert matching_capacity(120, Fraction(1, 100)) == 100 // 49
    assert matching_capacity(120, Fraction(1, 2)) == 1
    assert routing_height(120, Fraction(1, 100)) == math.ceil(100 / math.log(120))


@settings(max_examples=300, deadline=None)
@given(arrays(np.float64, st.integers(2, 80), elements=finite))
def test_bisection_properties(u):
    cut = bisect(u, float(u.mean()))
    if not cut.sources:
        # only a constant vector may come back without sources
        assert np.allclose(u, u.mean()) or len(u) < 8 or cut.targets
        return
    assert bisection_violations(u, float(u.mean()), cut) == []
    assert not set(cut.sources) & set(cut.targets)


def test_bisection_of_constant_vector_is_empty():
    cut = bisect(np.ones(10), 1.0)
    assert cut.sources == [] and cut.targets == []


def test_bisection_picks_the_lonely_outlier():
    u = np.array([0.0] * 15 + [10.0])
    cut = bisect(u, float(u.mean()))
    assert cut.sources == [15]
    assert 15 not in cut.targets and len(cut.targets) == 8


@settings(max_examples=40, deadline=None)
@given(st.integers(4, 40), st.integers(0, 6), st.integers(0, 10**6))
def test_projection_matches_dense_matrix(m, rounds, seed):
    rng = np.random.default_rng(seed)
    matchings = []
    for _ in range(rounds):
        perm = rng.permutation(m)
        k = rng.integers(0, m // 2 + 1)
        matchings.append(perm[: 2 * k].reshape(-1, 2))
    r = random_directions(rng, m, 1)[:, 0]
    dense = oracle.dense_flow_matrix([map(tuple, p) for p in matchings], m)
    assert np.allclose(project_flow_vectors(matchings, r), dense @ r)
    block = random_directions(rng, m, 5)
    expected = dense @ block
    for pairs in matchings:
        apply_matching(block, pairs)
    assert np.allclose(block, expected)


def test_random_directions_are_unit_and_centered():
    block = random_directions(np.random.default_rng(3), 30, 8)
    assert np.allclose(block.sum(axis=0), 0)
    assert np.allclose(np.linalg.norm(block, axis=0), 1)


def test_projection_spread_tracks_the_potential():
    # the expected squared spread of a projection is psi / (m - 1), and every
    # row stays within C log(m) / m of its own squared distance (C frozen at 10)
    rng = np.random.default_rng(0)
    for m in (50, 120):
        matchings = [rng.permutation(m).reshape(-1, 2)[: m // 4] for _ in range(6)]
        dense = oracle.dense_flow_matrix([map(tuple, p) for p in matchings], m)
        dist = ((dense - dense.mean(axis=0)) ** 2).sum(axis=1)
        proj = dense @ random_directions(rng, m, 2000)
        proj -= proj.mean(axis=0)
        spread = (proj**2).sum(axis=0).mean()
        assert spread == pytest.approx(dist.sum() / (m - 1), rel=0.05)
        assert (proj**2 <= 10 * math.log(m) / m * dist[:, None]).all()


def _routing_instance(graph, sources, targets, capacity, height):
    source = [0] * graph.n
    sink = [0] * graph.n
    for x in sources:
        source[x] = 1
    for x in targets:
        sink[x] = 1
    inst = FlowInstance(graph, source, sink, capacity, height, excess_cap=list(graph.deg))
    state = PreflowState(inst)
    unit_flow(inst, state, sweep=False)
    return inst, state


@pytest.mark.parametrize("capacity", [1, 2])
def test_path_stripping_gives_valid_pairs(capacity):
    sub = barbell(5).subdivision()
    ge = sub.graph
    splits = list(range(sub.base.n, ge.n))
    sources, targets = splits[:3], splits[-10:]
    inst, state = _routing_instance(ge, sources, targets, capacity, 12)
    pairs, unmatched = strip_paths(inst, state, sources, targets)
    assert len(pairs) + len(unmatched) == len(sources)
    assert {a for a, _ in pairs} | set(unmatched) == set(sources)
    used = [b for _, b in pairs]
    assert set(used) <= set(targets) and len(used) == len(set(used))
    assert all(abs(f) <= capacity for f in state.flow)
    absorbed = sum(min(state.mass[x], 1) for x in targets)
    assert len(pairs) == absorbed


def test_clique_is_an_expander():
    g = clique(16)
    r = cut_match(g, Fraction(1, 100), seed=0)
    assert r.case == EXPANDER
    assert r.kept == list(range(16)) and r.removed == []
    assert r.rounds == r.round_budget == round_count(g.m)


def test_barbell_bridge_is_found():
    g = barbell(8)
    phi = Fraction(1, 100)
    r = cut_match(g, phi, seed=0)
    assert r.case == BALANCED
    assert sorted(r.removed) in (list(range(8)), list(range(8, 16)))
    assert r.removed_conductance <= r.threshold
    assert 10 * r.round_budget * r.removed_volume > g.m


def test_small_satellite_is_a_near_expander_cut():
    g = satellite_fixture()
    phi = Fraction(1, 20)
    r = cut_match(g, phi, seed=0, config=CutMatchConfig(round_factor=0.02))
    assert r.case == NEAR_EXPANDER
    assert r.removed == [12, 13, 14]
    assert 10 * r.round_budget * r.removed_volume <= g.m
    assert r.removed_conductance <= r.threshold
    assert oracle.exact_nearly_expander(g, r.kept, phi)


def test_potential_is_tracked_and_shrinks():
    g = clique(12)
    r = cut_match(g, Fraction(1, 100), seed=2, config=CutMatchConfig(track_potential=True))
    assert r.potential_after[0] == pytest.approx(g.m - 1)
    assert len(r.potential_before) == r.rounds
    for before, after in zip(r.potential_after, r.potential_before):
        assert after <= before + 1e-9
    assert r.potential_after[-1] <= 1 / (16 * g.m**2)
    dense = oracle.dense_flow_matrix([map(tuple, p) for p in r.matchings], g.m)
    assert oracle.potential(dense, range(g.m)) == pytest.approx(r.potential_after[-1], abs=1e-9)


def test_same_seed_same_result():
    g = barbell(6)
    a = cut_match(g, Fraction(1, 50), seed=9)
    b = cut_match(g, Fraction(1, 50), seed=9)
    assert (a.case, a.kept, a.cuts, a.matched) == (b.case, b.kept, b.cuts, b.matched)


def test_tiny_graphs_are_settled_exactly():
    r = cut_match(cycle(6), Fraction(1, 2))
    assert r.exact and r.case == BALANCED
    assert conductance(cycle(6), r.removed) == Fraction(1, 3)
    r = cut_match(clique(5), Fraction(1, 2))
    assert r.exact and r.case == EXPANDER
    with pytest.raises(ParameterError):
        cut_match(Graph(30, [(v, v + 1) for v in range(10)]), Fraction(1, 2))


def test_strict_mode_checks_phi():
    with pytest.raises(ParameterError):
        cut_match(clique(16), Fraction(1, 10), config=CutMatchConfig(strict=True))
    r = cut_match(clique(16), Fraction(1, 100), config=CutMatchConfig(strict=True))
    assert r.case == EXPANDER


def test_debug_mode_checks_every_bisection():
    r = cut_match(barbell(6), Fraction(1, 50), seed=4, config=CutMatchConfig(debug=True))
    assert r.case in (EXPANDER, BALANCED, NEAR_EXPANDER)
