import math
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from _fixtures import flow_case
from expander import oracle
from expander.errors import ContractViolation, ParameterError
from expander.generators import clique, path
from expander.graph import Graph
from expander.trimming import trimming_height
from expander.unitflow import (
    FlowInstance,
    PreflowState,
    check_valid_solution,
    check_valid_state,
    state_violations,
    unit_flow,
)


def scaled_instance(graph, phi, source, height=None, limit=True):
    p, q = phi.numerator, phi.denominator
    return FlowInstance(
        graph,
        list(source),
        [p * d for d in graph.deg],
        2 * q,
        height if height is not None else trimming_height(graph.m, phi),
        mass_limit=(3 * p * graph.m) // 2 if limit else None,
    )


def test_path_example_routes_exactly():
    # phi = 1/2: sinks p*deg = (1, 2, 1), capacity 2q = 4, four units at node 0
    inst = FlowInstance(path(3), [4, 0, 0], [1, 2, 1], 4, 10)
    result = unit_flow(inst, debug=True)
    assert result.feasible
    assert result.state.mass == [1, 2, 1]
    assert result.state.flow == [3, 1]


def test_star_overload_breaks_the_mass_hypothesis():
    star = Graph(4, [(0, 1), (0, 2), (0, 3)])
    inst = FlowInstance(star, [16, 0, 0, 0], [3, 1, 1, 1], 4, 2, mass_limit=(3 * star.m) // 2)
    with pytest.raises(ParameterError):
        unit_flow(inst)
    inst.mass_limit = None
    result = unit_flow(inst, debug=True)
    assert not result.feasible
    assert not oracle.exact_flow_feasible(star, inst.source, inst.sink, 4).feasible
    assert check_valid_solution(inst, result.state)


def test_isolated_heavy_node_is_a_level_cut():
    g = Graph(3, [(0, 1), (1, 2), (2, 2)])
    inst = FlowInstance(g, [0, 0, 9], [1, 2, 2], 1, 6)
    result = unit_flow(inst, debug=True)
    assert not result.feasible
    assert 2 in result.cut


@settings(max_examples=150, deadline=None)
@given(st.integers(0, 10**9), st.booleans())
def test_feasible_iff_exact_max_flow(seed, heavy):
    rng = random.Random(seed)
    g, phi, source = flow_case(rng, heavy)
    inst = scaled_instance(g, phi, source, height=rng.randint(g.n, 4 * g.n), limit=not heavy)
    result = unit_flow(inst)
    exact = oracle.exact_flow_feasible(g, source, inst.sink, inst.capacity)
    assert result.feasible == exact.feasible
    assert check_valid_solution(inst, result.state)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10**9))
def test_debug_mode_never_trips(seed):
    rng = random.Random(seed)
    g, phi, source = flow_case(rng, heavy=True)
    inst = scaled_instance(g, phi, source, height=rng.randint(1, 3 * g.n), limit=False)
    try:
        unit_flow(inst, debug=True)
    except ContractViolation as exc:
        # small label bounds may leave no sparse level cut; anything else is a bug
        assert "level cut" in str(exc)


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 10**9))
def test_level_cut_meets_the_crossing_bound(seed):
    rng = random.Random(seed)
    g, phi, source = flow_case(rng, heavy=True)
    inst = scaled_instance(g, phi, source, limit=False)
    result = unit_flow(inst)
    if result.feasible:
        return
    st_ = result.state
    inside = set(result.cut)
    assert inside == {v for v in range(g.n) if st_.label[v] >= result.level}
    unsaturated = 0
    for e, (a, b) in enumerate(g.edges):
        if a == b or (a in inside) == (b in inside):
            continue
        out = st_.flow[e] if a in inside else -st_.flow[e]
        if out < inst.capacity:
            unsaturated += 1
    vol = g.vol(inside)
    assert unsaturated <= 5 * vol * math.log(2 * g.m) / inst.height


def test_warm_start_continues_from_a_valid_state():
    g = clique(5)
    inst = FlowInstance(g, [6, 0, 0, 0, 0], [4] * 5, 2, 12)
    state = PreflowState(inst)
    first = unit_flow(inst, state)
    assert first.feasible
    state.add_source(inst, 3, 9)
    second = unit_flow(inst, state, validate=True)
    assert second.feasible
    assert sum(state.mass) == 15
    assert check_valid_solution(inst, state)
    assert oracle.exact_flow_feasible(g, inst.source, inst.sink, 2).feasible


def test_invalid_state_is_rejected():
    g = path(3)
    inst = FlowInstance(g, [2, 0, 0], [1, 2, 1], 4, 5)
    state = PreflowState(inst)
    state.set_labels(inst, [3, 0, 0])  # steep edge that is not saturated
    assert not check_valid_state(inst, state)
    assert any("saturated" in msg for msg in state_violations(inst, state))
    with pytest.raises(ContractViolation):
        unit_flow(inst, state, validate=True)


def test_label_one_needs_saturated_sink():
    g = path(3)
    inst = FlowInstance(g, [0, 0, 0], [1, 2, 1], 4, 5)
    state = PreflowState(inst)
    state.set_labels(inst, [0, 1, 0])
    assert any("unsaturated sink" in msg for msg in state_violations(inst, state))


def test_bad_parameters():
    g = path(2)
    with pytest.raises(ParameterError):
        FlowInstance(g, [1], [1, 1], 1, 1)
    with pytest.raises(ParameterError):
        FlowInstance(g, [1, 0], [1, 1], 0, 1)
    with pytest.raises(ParameterError):
        FlowInstance(g, [-1, 0], [1, 1], 1, 1)


def test_loops_give_sink_capacity_but_no_arcs():
    g = Graph(2, [(0, 0), (0, 0), (0, 1)])
    inst = FlowInstance(g, [3, 0], [3, 1], 1, 4)
    result = unit_flow(inst)
    assert result.feasible
    assert result.state.flow == [0, 0, 0]


def test_work_is_counted():
    inst = FlowInstance(path(6), [10, 0, 0, 0, 0, 0], [1, 2, 2, 2, 2, 1], 10, 20)
    result = unit_flow(inst)
    assert result.feasible
    assert result.state.pushes > 0 and result.state.relabels > 0
    assert result.state.work >= result.state.pushes + result.state.relabels
