"""Cut-matching on the subdivision graph.

Every split node owns one unit of its own commodity. Each round projects the
current commodity mix onto a random direction, splits the split nodes into a
small source set and a large target set, and routes one unit per source with a
label-bounded Unit-Flow of low edge capacity. Each routed unit matches a
source with a target and the two mixes are averaged. When routing gets stuck,
a sparse level cut is moved from the active side ``A`` to the removed side
``R``. The run ends in one of three cases:

* ``expander``: nothing was ever removed;
* ``balanced``: ``R`` grew past ``m / (10 T)`` in volume;
* ``near_expander``: all rounds ran and ``R`` stayed small.

The mix matrix is never formed. Projections are kept for a block of random
directions at a time and updated in place by each matching; a new block is
brought up to date by replaying the stored matchings.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from .errors import ParameterError
from .graph import Graph, Subdivision
from .oracle import MAX_ENUM_NODES, exact_min_conductance, potential
from .unitflow import FlowInstance, PreflowState, level_sets, unit_flow

log = logging.getLogger(__name__)

EXPANDER = "expander"
BALANCED = "balanced"
NEAR_EXPANDER = "near_expander"


@dataclass(frozen=True)
class CutMatchConfig:
    """Tuning knobs. ``round_factor`` multiplies ``log2(m)^2`` to give the round
    count. ``c0`` only feeds the reported case-3 volume allowance
    ``m / (10 c0 log2(m)^2)``; the case itself is decided by ``m / (10 T)``."""

    round_factor: float = 16.0
    c0: float = 1.0
    min_edges: int = 16
    block: int = 32
    strict: bool = False
    track_potential: bool = False
    debug: bool = False


def round_count(m: int, factor: float = 16.0) -> int:
    return max(1, math.ceil(factor * math.log2(max(m, 2)) ** 2))


def matching_capacity(m: int, phi: Fraction) -> int:
    """Edge capacity ``floor(1 / (phi * ceil(log2 m)^2))``, at least 1."""
    k = math.ceil(math.log2(max(m, 2)))
    return max(1, phi.denominator // (phi.numerator * k * k))


def routing_height(m: int, phi: Fraction) -> int:
    """Label bound ``ceil(1 / (phi * ln m))``, at least 1."""
    return max(1, math.ceil(1 / (float(phi) * math.log(max(m, 2)))))


@dataclass
class Bisection:
    """Sources, targets (positions into the projection vector) and the separator."""

    sources: list[int]
    targets: list[int]
    eta: float


def bisect(u: np.ndarray, mean: float) -> Bisection:
    """Pick at most ``n/8`` extreme sources and at least ``n/2`` targets on the far side.

    Both orientations are tried. For each, the targets are the ``ceil(n/2)``
    values furthest in the opposite direction, ``eta`` is their inner edge,
    and sources are the most extreme values beyond ``eta`` that are at least a
    third of their deviation away from it. The orientation whose sources carry
    the larger squared deviation wins.
    """
    n = len(u)
    dev2 = (u - mean) ** 2
    k_src = n // 8
    if k_src == 0 or float(dev2.sum()) <= 0.0:
        return Bisection([], [], float(mean))
    k_tgt = (n + 1) // 2
    order = np.argsort(u, kind="stable")
    best: tuple[float, Bisection] | None = None
    for side in (1, -1):
        ranked = order if side == 1 else order[::-1]
        targets = ranked[:k_tgt]
        eta = float(u[targets[-1]])
        rest = ranked[k_tgt:][::-1]
        gap = side * (u[rest] - eta)
        ok = (gap >= 0) & (9 * gap**2 >= dev2[rest])
        sources = rest[ok][:k_src]
        score = float(dev2[sources].sum())
        if best is None or score > best[0]:
            best = (score, Bisection(sorted(sources.tolist()), sorted(targets.tolist()), eta))
    return best[1]


def bisection_violations(u: np.ndarray, mean: float, cut: Bisection) -> list[str]:
    """Which of the four bisection properties fail."""
    n = len(u)
    src = np.asarray(cut.sources, dtype=np.int64)
    tgt = np.asarray(cut.targets, dtype=np.int64)
    dev2 = (u - mean) ** 2
    problems = []
    if src.size and tgt.size:
        low_side = u[src].max() <= cut.eta <= u[tgt].min()
        high_side = u[src].min() >= cut.eta >= u[tgt].max()
        if not (low_side or high_side):
            problems.append("eta does not separate sources from targets")
    if 2 * tgt.size < n or 8 * src.size > n:
        problems.append("set sizes out of range")
    if src.size and np.any(9 * (u[src] - cut.eta) ** 2 < dev2[src] * (1 - 1e-12)):
        problems.append("a source sits too close to eta")
    if 80 * dev2[src].sum() < dev2.sum() * (1 - 1e-9):
        problems.append("sources carry too little of the spread")
    return problems


def random_directions(rng: np.random.Generator, m: int, count: int) -> np.ndarray:
    """``count`` random unit columns orthogonal to the all-ones vector."""
    block = rng.standard_normal((m, count))
    block -= block.mean(axis=0)
    norms = np.linalg.norm(block, axis=0)
    norms[norms == 0] = 1.0
    return block / norms


def apply_matching(values: np.ndarray, pairs: np.ndarray) -> None:
    """Replace the rows of each matched pair by their average, in place."""
    if pairs.size:
        avg = (values[pairs[:, 0]] + values[pairs[:, 1]]) / 2
        values[pairs[:, 0]] = avg
        values[pairs[:, 1]] = avg


def project_flow_vectors(matchings: Sequence[np.ndarray], r: np.ndarray) -> np.ndarray:
    """Projection of every commodity mix onto ``r`` after the given matchings."""
    u = np.array(r, dtype=float)
    for pairs in matchings:
        apply_matching(u, pairs)
    return u


@dataclass
class Routing:
    """Matched (source, target) split-node pairs and an optional level cut."""

    pairs: list[tuple[int, int]]
    cut: list[int]
    unmatched: list[int]
    work: int


def route_matching(
    sub: Subdivision,
    alive: Sequence[bool],
    sources: Sequence[int],
    targets: Sequence[int],
    capacity: int,
    height: int,
) -> Routing:
    """Route one unit per source to targets of capacity one in the live part.

    Each unit follows a path read off the flow, so every path becomes one
    matched pair. When some mass is stuck at the top label, the returned cut
    is the level set of smallest conductance among those whose regular part
    is a nonempty proper subset of the live regular nodes.
    """
    graph = sub.graph
    n_all = graph.n
    source = [0] * n_all
    sink = [0] * n_all
    for x in sources:
        source[x] = 1
    for x in targets:
        sink[x] = 1
    inst = FlowInstance(
        graph, source, sink, capacity, height, excess_cap=list(graph.deg), edge_count=graph.m
    )
    state = PreflowState(inst, alive)
    result = unit_flow(inst, state, sweep=False)
    pairs, unmatched = strip_paths(inst, state, sources, targets)
    cut: list[int] = []
    if not result.feasible:
        cut = best_level_cut(sub, inst, state)
    return Routing(pairs, cut, unmatched, state.work)


def strip_paths(
    inst: FlowInstance, state: PreflowState, sources: Sequence[int], targets: Sequence[int]
) -> tuple[list[tuple[int, int]], list[int]]:
    """Follow each source's unit along positive flow until a target absorbs it.

    At every node the walk stops if the node is a target with absorbed mass
    left, otherwise follows any arc with flow left, otherwise stops unmatched.
    Flow conservation guarantees one of these always applies.
    """
    adj = inst.graph.adj
    flow, mass, alive = state.flow, state.mass, state.alive
    is_target = set(targets)
    absorb = {x: min(mass[x], inst.sink[x]) for x in targets if alive[x]}
    outs: dict[int, list[list[int]]] = {}
    pointer: dict[int, int] = {}

    def out_arcs(w: int) -> list[list[int]]:
        arcs = outs.get(w)
        if arcs is None:
            arcs = [[u, sign * flow[e]] for u, e, sign in adj[w] if alive[u] and sign * flow[e] > 0]
            outs[w] = arcs
            pointer[w] = 0
        return arcs

    pairs = []
    unmatched = []
    for a in sorted(sources):
        cur = a
        while True:
            if cur in is_target and absorb.get(cur, 0) > 0:
                absorb[cur] -= 1
                pairs.append((a, cur))
                break
            arcs = out_arcs(cur)
            i = pointer[cur]
            while i < len(arcs) and arcs[i][1] == 0:
                i += 1
            pointer[cur] = i
            if i == len(arcs):
                unmatched.append(a)
                break
            arcs[i][1] -= 1
            cur = arcs[i][0]
    return pairs, unmatched


def best_level_cut(sub: Subdivision, inst: FlowInstance, state: PreflowState) -> list[int]:
    graph = sub.graph
    alive = state.alive
    live = [v for v in range(graph.n) if alive[v]]
    live_regular = sum(1 for v in live if not sub.is_split(v))
    live_vol = graph.vol(live)
    best: tuple[Fraction, list[int]] | None = None
    for _, members in level_sets(inst, state):
        cut = sorted(v for v in sub.normalize(members) if alive[v])
        regular = sum(1 for v in cut if not sub.is_split(v))
        if regular == 0 or regular == live_regular:
            continue
        value = live_conductance(graph, cut, alive, live_vol)
        if best is None or value < best[0]:
            best = (value, cut)
    return best[1] if best else []


def live_conductance(graph: Graph, cut: Sequence[int], alive: Sequence[bool], live_vol: int) -> Fraction:
    """Conductance of ``cut`` inside the live induced subgraph with loops."""
    inside = set(cut)
    vol = graph.vol(cut)
    crossing = sum(1 for v in cut for u, _, _ in graph.adj[v] if alive[u] and u not in inside)
    low = min(vol, live_vol - vol)
    return Fraction(0) if low == 0 else Fraction(crossing, low)


@dataclass
class CutMatchResult:
    """Outcome with both sides projected to the input graph's node ids."""

    case: str
    kept: list[int]
    removed: list[int]
    rounds: int
    round_budget: int
    removed_volume: int
    threshold: Fraction
    near_bound: float = 0.0
    removed_conductance: Fraction | None = None
    capacity: int = 0
    height: int = 0
    exact: bool = False
    cuts: list[list[int]] = field(default_factory=list)
    matched: int = 0
    work: int = 0
    potential_before: list[float] = field(default_factory=list)
    potential_after: list[float] = field(default_factory=list)
    matchings: list[np.ndarray] = field(default_factory=list, repr=False)


def cut_match(
    graph: Graph,
    phi: Fraction,
    seed: int | np.random.SeedSequence = 0,
    config: CutMatchConfig = CutMatchConfig(),
) -> CutMatchResult:
    """Run the cut-matching step on ``graph`` (assumed connected).

    Graphs with fewer than ``config.min_edges`` edges are settled exactly by
    subset enumeration: the whole graph is an expander if its conductance is
    at least ``phi``, otherwise the minimizing cut is returned as balanced.
    """
    m = graph.m
    T = round_count(m, config.round_factor)
    threshold = phi * T
    if config.strict and phi * Fraction(math.log2(max(m, 2))) ** 2 >= 1:
        raise ParameterError("phi must be below 1 / log2(m)^2 in strict mode")
    if m < max(config.min_edges, 8):
        return _exact_cut_match(graph, phi, T, threshold)

    rng = np.random.default_rng(seed)
    sub = graph.subdivision()
    ge = sub.graph
    n = graph.n
    U = matching_capacity(m, phi)
    h = routing_height(m, phi)
    alive = [True] * ge.n
    history: list[np.ndarray] = []
    dense = np.eye(m) if config.track_potential else None
    result = CutMatchResult(EXPANDER, [], [], 0, T, 0, threshold, capacity=U, height=h)
    result.near_bound = m / (10 * config.c0 * math.log2(m) ** 2)
    if dense is not None:
        result.potential_after.append(potential(dense, range(m)))

    block = np.empty((m, 0))
    col = 0
    removed_vol = 0
    live_vol = ge.total_volume()
    while result.rounds < T and 10 * T * removed_vol <= m:
        result.rounds += 1
        if col == block.shape[1]:
            block = random_directions(rng, m, config.block)
            for pairs in history:
                apply_matching(block, pairs)
            col = 0
        live_edges = np.array([e for e in range(m) if alive[n + e]], dtype=np.int64)
        u = block[live_edges, col]
        col += 1
        bis = bisect(u, float(u.mean()))
        if config.debug and bis.sources:
            problems = bisection_violations(u, float(u.mean()), bis)
            if problems:
                raise AssertionError("; ".join(problems))
        routing = route_matching(
            sub,
            alive,
            [n + int(live_edges[i]) for i in bis.sources],
            [n + int(live_edges[i]) for i in bis.targets],
            U,
            h,
        )
        result.work += routing.work
        pairs = np.array(
            [(sub.edge_of(a), sub.edge_of(b)) for a, b in routing.pairs], dtype=np.int64
        ).reshape(-1, 2)
        history.append(pairs)
        result.matched += len(pairs)
        apply_matching(block, pairs)
        if dense is not None:
            apply_matching(dense, pairs)
            result.potential_before.append(potential(dense, live_edges))

        if routing.cut:
            value = live_conductance(ge, routing.cut, alive, live_vol)
            if value <= threshold:
                for x in routing.cut:
                    alive[x] = False
                vol = ge.vol(routing.cut)
                removed_vol += vol
                live_vol -= vol
                result.cuts.append(sub.project(routing.cut))
                log.debug("round %d removed %d nodes (conductance %s)", result.rounds, len(routing.cut), value)
        if dense is not None:
            live_now = [e for e in range(m) if alive[n + e]]
            result.potential_after.append(potential(dense, live_now))

    result.kept = [v for v in range(n) if alive[v]]
    result.removed = [v for v in range(n) if not alive[v]]
    result.removed_volume = removed_vol
    result.matchings = history
    if not result.removed:
        result.case = EXPANDER
    elif 10 * T * removed_vol > m:
        result.case = BALANCED
    else:
        result.case = NEAR_EXPANDER
    if result.removed:
        dead = [x for x in range(ge.n) if not alive[x]]
        result.removed_conductance = _conductance_or_zero(ge, dead)
    return result


def _conductance_or_zero(graph: Graph, nodes: list[int]) -> Fraction:
    inside = set(nodes)
    vol = graph.vol(nodes)
    low = min(vol, graph.total_volume() - vol)
    crossing = sum(1 for v in nodes for u, _, _ in graph.adj[v] if u not in inside)
    return Fraction(0) if low == 0 else Fraction(crossing, low)


def _exact_cut_match(graph: Graph, phi: Fraction, T: int, threshold: Fraction) -> CutMatchResult:
    if graph.n > MAX_ENUM_NODES:
        raise ParameterError("graph too sparse for cut-matching and too large for enumeration")
    value, side = exact_min_conductance(graph)
    result = CutMatchResult(EXPANDER, list(range(graph.n)), [], 0, T, 0, threshold, exact=True)
    if value >= phi:
        return result
    rest = [v for v in range(graph.n) if v not in set(side)]
    result.case = BALANCED
    result.kept, result.removed = rest, side
    result.removed_volume = graph.vol(side)
    result.removed_conductance = value
    result.cuts = [side]
    return result
