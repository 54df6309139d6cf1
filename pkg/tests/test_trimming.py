from fractions import Fraction
from itertools import combinations

import pytest

from _fixtures import trimming_cases
from expander import oracle
from expander.errors import ParameterError, TrimFailure
from expander.graph import Graph
from expander.trimming import DynamicFlow, trim, trimming_height
from expander.unitflow import check_valid_solution, check_valid_state


def clique_with_pendant():
    return Graph(7, list(combinations(range(6), 2)) + [(5, 6)])


def heavy_satellite():
    """Five nodes joined by 12 parallel copies of every pair, plus node 5 tied to
    the core by one edge and to four outside nodes by twelve edges."""
    edges = [(a, b) for a, b in combinations(range(5), 2) for _ in range(12)]
    edges.append((0, 5))
    edges += [(5, 6 + j % 4) for j in range(12)]
    return Graph(10, edges)


def test_clique_absorbs_its_single_source():
    g = clique_with_pendant()
    result = trim(g, range(6), Fraction(1, 3), debug=True)
    assert result.kept == list(range(6))
    assert result.rounds == []
    assert result.initial_mass == 6


def test_weakly_attached_node_is_trimmed():
    g = heavy_satellite()
    phi = Fraction(1, 2)
    assert oracle.exact_nearly_expander(g, range(6), phi)
    result = trim(g, range(6), phi, debug=True)
    assert result.kept == [0, 1, 2, 3, 4]
    assert result.removed == [5]
    assert oracle.graph_conductance(g.induce_with_loops(result.kept)) >= phi / 6
    # the only severed edge was saturated toward the core, so no mass is created
    assert result.rounds[0].created == 0


def test_matches_slow_exact_trimming_on_this_fixture():
    g = heavy_satellite()
    kept, _ = oracle.slow_trim(g, range(6), Fraction(1, 2))
    assert trim(g, range(6), Fraction(1, 2)).kept == kept


def test_precondition_is_enforced():
    g = clique_with_pendant()
    with pytest.raises(ParameterError):
        trim(g, range(6), Fraction(1, 40))
    with pytest.raises(ParameterError):
        trim(g, [], Fraction(1, 3))


def test_no_certificate_without_the_nearly_expander_hypothesis():
    # two heavy blobs joined by one edge, two boundary edges on the second blob:
    # the boundary precondition holds, but A is not a nearly expander, and the
    # little source mass is absorbed locally so nothing is trimmed
    edges = [(a, b) for a, b in combinations(range(4), 2) for _ in range(10)]
    edges += [(a + 4, b + 4) for a, b in combinations(range(4), 2) for _ in range(10)]
    edges += [(3, 4), (7, 8), (6, 8)]
    g = Graph(9, edges)
    phi = Fraction(1, 2)
    assert not oracle.exact_nearly_expander(g, range(8), phi)
    result = trim(g, range(8), phi)
    assert result.kept == list(range(8))
    assert oracle.graph_conductance(g.induce_with_loops(result.kept)) < phi / 6


def test_trim_failure_carries_reason():
    exc = TrimFailure("every node was trimmed", [3, 1])
    assert exc.reason == "every node was trimmed" and exc.removed == [3, 1]


@pytest.mark.parametrize("case", trimming_cases(40, seed=7), ids=lambda c: f"n{c[0].n}m{c[0].m}")
def test_postconditions_and_round_accounting(case):
    g, nodes, phi = case
    p, q = phi.numerator, phi.denominator
    result = trim(g, nodes, phi, debug=True)
    b = result.boundary_before
    assert oracle.graph_conductance(g.induce_with_loops(result.kept)) >= phi / 6
    assert p * result.volume_after >= p * result.volume_before - 4 * q * b
    assert result.boundary_after <= 2 * b
    removed_volume = sum(r.volume for r in result.rounds)
    assert p * removed_volume <= result.created <= 2 * result.initial_mass
    for r in result.rounds:
        assert 2 * r.created <= p * r.volume
        assert r.destroyed >= p * r.volume


def test_dynamic_flow_state_stays_valid_between_rounds():
    g = heavy_satellite()
    phi = Fraction(1, 2)
    sub = g.induce_with_loops(range(6))
    engine = DynamicFlow(sub, phi)
    engine.add_mass(5, 2 * phi.denominator * 12)
    removed = engine.run(debug=True)
    assert removed == [5]
    assert check_valid_state(engine.instance, engine.state)
    assert check_valid_solution(engine.instance, engine.state)
    assert engine.height == trimming_height(sub.m, phi)
