"""Label-bounded push-relabel that either routes all mass or finds a level cut.

The flow problem lives on a fixed :class:`~expander.graph.Graph`. Nodes can be
switched off through ``PreflowState.alive``; a dead neighbor behaves exactly
like the far end of a boundary edge that was turned into a self-loop, so the
live part of the graph is the induced subgraph with loops. This lets trimming
and pruning shrink the node set between calls without rebuilding anything,
and lets the state be warm-started across calls.

Quantities are integers: callers scale a rational conductance ``p/q`` so that
sinks are ``p * deg`` and edge capacities ``2q`` (or any other integers).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

from .errors import ContractViolation, ParameterError, SweepFailure
from .graph import Graph


@dataclass
class FlowInstance:
    """Source mass, sink capacity, edge capacity and label bound.

    ``excess_cap[u]`` caps how much a push may deliver to ``u``; it defaults to
    the sink capacity. ``mass_limit`` bounds the total live source mass.
    ``edge_count`` is the edge count used in the level-cut bound and defaults
    to the number of edges of the graph.
    """

    graph: Graph
    source: list[int]
    sink: list[int]
    capacity: int
    height: int
    excess_cap: list[int] | None = None
    mass_limit: int | None = None
    edge_count: int | None = None

    def __post_init__(self):
        n = self.graph.n
        if len(self.source) != n or len(self.sink) != n:
            raise ParameterError("source and sink must have one entry per node")
        if self.excess_cap is None:
            self.excess_cap = self.sink
        if len(self.excess_cap) != n:
            raise ParameterError("excess_cap must have one entry per node")
        if self.capacity <= 0 or self.height < 1:
            raise ParameterError("capacity and height must be positive")
        if min(self.source, default=0) < 0 or min(self.sink, default=0) < 0:
            raise ParameterError("source and sink values must be non-negative")
        for u in range(n):
            if self.graph.adj[u] and self.excess_cap[u] < 1:
                raise ParameterError(f"node {u} has arcs but cannot receive mass")
        if self.edge_count is None:
            self.edge_count = self.graph.m

    def sweep_bound(self, volume: int) -> float:
        """Largest number of one-step crossing edges allowed at a level cut."""
        return 5 * volume * math.log(2 * self.edge_count) / self.height


class PreflowState:
    """Edge flows, node labels and the bookkeeping needed to resume a run.

    ``mass[v]`` is the source mass of ``v`` plus its net inflow from live
    neighbors. Active nodes (live, positive excess, label below the bound) sit
    in per-label buckets; ``level[i]`` holds the live nodes with label ``i``
    for ``i >= 1`` so level cuts can be read off without a full scan.
    """

    def __init__(self, instance: FlowInstance, alive: Sequence[bool] | None = None):
        graph = instance.graph
        n = graph.n
        h = instance.height
        self.flow = [0] * graph.m
        self.label = [0] * n
        self.cursor = [0] * n
        self.alive = list(alive) if alive is not None else [True] * n
        self.mass = list(instance.source)
        self.buckets: list[list[int]] = [[] for _ in range(h)]
        self.queued = [-1] * n
        self.level: list[set[int]] = [set() for _ in range(h + 1)]
        self.low = 0
        self.source_total = sum(instance.source[v] for v in range(n) if self.alive[v])
        self.work = 0
        self.pushes = 0
        self.relabels = 0
        for v in range(n):
            self.activate(instance, v)

    def excess(self, instance: FlowInstance, v: int) -> int:
        return max(0, self.mass[v] - instance.sink[v])

    def activate(self, instance: FlowInstance, v: int) -> None:
        """Queue ``v`` if it is active and not already queued at its label."""
        lv = self.label[v]
        if (
            self.alive[v]
            and lv < instance.height
            and self.mass[v] > instance.sink[v]
            and self.queued[v] != lv
        ):
            self.buckets[lv].append(v)
            self.queued[v] = lv
            if lv < self.low:
                self.low = lv

    def add_source(self, instance: FlowInstance, v: int, amount: int) -> None:
        instance.source[v] += amount
        self.mass[v] += amount
        if self.alive[v]:
            self.source_total += amount
        self.activate(instance, v)

    def set_labels(self, instance: FlowInstance, labels: Sequence[int]) -> None:
        """Replace all labels (for hand-built states) and rebuild the queues."""
        h = instance.height
        self.label = list(labels)
        self.cursor = [0] * len(self.label)
        self.level = [set() for _ in range(h + 1)]
        for v, lv in enumerate(self.label):
            if not 0 <= lv <= h:
                raise ContractViolation(f"label of node {v} is outside [0, {h}]")
            if lv >= 1 and self.alive[v]:
                self.level[lv].add(v)
        self.rebuild_queue(instance)

    def set_flow(self, instance: FlowInstance, flow: Sequence[int]) -> None:
        """Replace all edge flows and recompute masses."""
        self.flow = list(flow)
        self.mass = recompute_mass(instance, self.flow, self.alive)
        self.rebuild_queue(instance)

    def rebuild_queue(self, instance: FlowInstance) -> None:
        self.buckets = [[] for _ in range(instance.height)]
        self.queued = [-1] * len(self.label)
        self.low = 0
        for v in range(len(self.label)):
            self.activate(instance, v)

    def live_nodes(self) -> list[int]:
        return [v for v, ok in enumerate(self.alive) if ok]


@dataclass
class FlowResult:
    """Outcome of a run: an empty ``cut`` means every unit was routed."""

    cut: list[int]
    level: int | None
    state: PreflowState = field(repr=False)
    crossing: int = 0

    @property
    def feasible(self) -> bool:
        return not self.cut


def recompute_mass(instance: FlowInstance, flow: Sequence[int], alive: Sequence[bool]) -> list[int]:
    mass = list(instance.source)
    for e, (a, b) in enumerate(instance.graph.edges):
        if a != b and alive[a] and alive[b]:
            mass[a] -= flow[e]
            mass[b] += flow[e]
    return mass


def state_violations(
    instance: FlowInstance, state: PreflowState, solution: bool = False
) -> list[str]:
    """Everything wrong with ``state`` as a valid state (or valid solution)."""
    graph = instance.graph
    h = instance.height
    cap = instance.capacity
    sink = instance.sink
    alive = state.alive
    label = state.label
    flow = state.flow
    problems = []
    mass = recompute_mass(instance, flow, alive)
    for v in range(graph.n):
        if not alive[v]:
            continue
        if mass[v] != state.mass[v]:
            problems.append(f"cached mass of node {v} is stale")
        if mass[v] < 0:
            problems.append(f"node {v} sends out more than its source mass")
        if not 0 <= label[v] <= h:
            problems.append(f"label of node {v} is outside [0, {h}]")
        if label[v] >= 1 and mass[v] < sink[v]:
            problems.append(f"node {v} has label {label[v]} but an unsaturated sink")
        if solution and label[v] < h and mass[v] > sink[v]:
            problems.append(f"node {v} has excess below the top label")
    for e, (a, b) in enumerate(graph.edges):
        if a == b or not (alive[a] and alive[b]):
            continue
        f = flow[e]
        if abs(f) > cap:
            problems.append(f"edge {e} carries {f} over capacity {cap}")
        if label[a] > label[b] + 1 and f != cap:
            problems.append(f"edge {e} goes down more than one label but is not saturated")
        if label[b] > label[a] + 1 and -f != cap:
            problems.append(f"edge {e} goes down more than one label but is not saturated")
    return problems


def check_valid_state(instance: FlowInstance, state: PreflowState) -> bool:
    return not state_violations(instance, state)


def check_valid_solution(instance: FlowInstance, state: PreflowState) -> bool:
    return not state_violations(instance, state, solution=True)


def unit_flow(
    instance: FlowInstance,
    state: PreflowState | None = None,
    *,
    validate: bool = False,
    debug: bool = False,
    sweep: bool = True,
) -> FlowResult:
    """Run push-relabel on the lowest-label active node until none is left.

    Returns an empty cut when no live node is left with excess, otherwise a
    level cut ``{v : label(v) >= k}`` for the highest ``k`` whose one-step
    crossing edges satisfy the sparse-crossing bound. ``validate`` checks the
    input state first; ``debug`` checks every invariant after every operation.
    With ``sweep=False`` an infeasible run returns the top level set instead,
    leaving the choice of cut to the caller.
    """
    if state is None:
        state = PreflowState(instance)
    if instance.mass_limit is not None and state.source_total > instance.mass_limit:
        raise ParameterError(
            f"total source mass {state.source_total} exceeds the limit {instance.mass_limit}"
        )
    if validate or debug:
        problems = state_violations(instance, state)
        if problems:
            raise ContractViolation("invalid input state: " + "; ".join(problems[:3]))

    adj = instance.graph.adj
    sink = instance.sink
    excess_cap = instance.excess_cap
    cap = instance.capacity
    h = instance.height
    label, mass, flow = state.label, state.mass, state.flow
    cursor, alive, queued = state.cursor, state.alive, state.queued
    buckets, level = state.buckets, state.level
    lo = state.low
    work = pushes = relabels = 0

    while True:
        while lo < h and not buckets[lo]:
            lo += 1
        if lo >= h:
            break
        bucket = buckets[lo]
        v = bucket[-1]
        if queued[v] != lo or not alive[v] or label[v] != lo or mass[v] <= sink[v]:
            bucket.pop()
            if queued[v] == lo:
                queued[v] = -1
            continue

        arcs = adj[v]
        i = cursor[v]
        target = lo - 1
        pushed = False
        while i < len(arcs):
            u, e, sign = arcs[i]
            work += 1
            if label[u] == target and alive[u]:
                out = cap - sign * flow[e]
                if out > 0:
                    if mass[u] > sink[u]:
                        raise ContractViolation(f"push target {u} already holds excess")
                    amount = min(mass[v] - sink[v], out, excess_cap[u])
                    flow[e] += sign * amount
                    mass[v] -= amount
                    mass[u] += amount
                    pushes += 1
                    if mass[u] > sink[u]:
                        buckets[target].append(u)
                        queued[u] = target
                        lo = target
                    if mass[v] <= sink[v]:
                        queued[v] = -1
                        bucket.pop()
                    pushed = True
                    break
            i += 1
        cursor[v] = i if pushed else 0
        if not pushed:
            relabels += 1
            bucket.pop()
            queued[v] = -1
            label[v] = lo + 1
            if lo >= 1:
                level[lo].discard(v)
            level[lo + 1].add(v)
            if lo + 1 < h:
                buckets[lo + 1].append(v)
                queued[v] = lo + 1
        if debug:
            state.low = lo
            problems = state_violations(instance, state)
            if problems:
                raise ContractViolation("invariant broken: " + "; ".join(problems[:3]))

    state.low = lo
    state.work += work + pushes + relabels
    state.pushes += pushes
    state.relabels += relabels

    top = [v for v in level[h] if alive[v]]
    if not top:
        return FlowResult([], None, state)
    if not sweep:
        return FlowResult(sorted(top), h, state)
    cut, k, crossing = level_cut(instance, state)
    return FlowResult(cut, k, state, crossing)


def level_cut(instance: FlowInstance, state: PreflowState) -> tuple[list[int], int, int]:
    """Sweep ``k`` from the top label down and return the first level set whose
    edges to the next label down satisfy the sparse-crossing bound."""
    adj = instance.graph.adj
    deg = instance.graph.deg
    label, alive = state.label, state.alive
    volume = 0
    members: list[int] = []
    for k in range(instance.height, 0, -1):
        layer = [v for v in state.level[k] if alive[v] and label[v] == k]
        members.extend(layer)
        crossing = 0
        for v in layer:
            volume += deg[v]
            crossing += sum(1 for u, _, _ in adj[v] if alive[u] and label[u] == k - 1)
            state.work += len(adj[v])
        if members and crossing <= instance.sweep_bound(volume):
            return sorted(members), k, crossing
    raise SweepFailure("no level cut meets the crossing bound; the label bound is too small")


def level_sets(instance: FlowInstance, state: PreflowState) -> list[tuple[int, list[int]]]:
    """All nonempty level sets ``{v : label(v) >= k}`` from the top down."""
    out = []
    members: list[int] = []
    for k in range(instance.height, 0, -1):
        members.extend(v for v in state.level[k] if state.alive[v] and state.label[v] == k)
        if members:
            out.append((k, sorted(members)))
    return out
