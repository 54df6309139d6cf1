"""Brute-force reference implementations used to check the fast algorithms.

Everything here is exponential or cubic and meant for small instances only:
subset enumeration for conductance (up to 20 nodes), textbook max-flow for
flow feasibility, and dense matrices for the flow-vector bookkeeping of the
cut-matching step.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

from .errors import ParameterError
from .graph import Graph

MAX_ENUM_NODES = 20


def _pair_counts(graph: Graph, nodes: Sequence[int]) -> list[tuple[int, int, int]]:
    pos = {v: i for i, v in enumerate(nodes)}
    counts: dict[tuple[int, int], int] = {}
    for u, v in graph.edges:
        if u != v and u in pos and v in pos:
            key = (min(pos[u], pos[v]), max(pos[u], pos[v]))
            counts[key] = counts.get(key, 0) + 1
    return [(a, b, c) for (a, b), c in counts.items()]


def _subset_bits(k: int) -> np.ndarray:
    return np.arange(1, 1 << k, dtype=np.int64)


def exact_min_conductance(graph: Graph) -> tuple[Fraction, list[int]]:
    """Minimum conductance over all proper cuts, with a minimizing side.

    A single node has conductance 1 by convention. Subsets are encoded as bit
    masks over the first ``n - 1`` nodes; the last node is always on the
    complement side, which covers every cut exactly once.
    """
    n = graph.n
    if n > MAX_ENUM_NODES:
        raise ParameterError(f"exact enumeration is limited to {MAX_ENUM_NODES} nodes")
    if n <= 1:
        return Fraction(1), []
    masks = _subset_bits(n - 1)
    bits = [(masks >> v) & 1 for v in range(n - 1)]
    vol = np.zeros_like(masks)
    for v in range(n - 1):
        vol += graph.deg[v] * bits[v]
    cut = np.zeros_like(masks)
    for a, b, c in _pair_counts(graph, list(range(n))):
        bit_b = bits[b] if b < n - 1 else 0
        cut += c * (bits[a] ^ bit_b)
    total = graph.total_volume()
    low = np.minimum(vol, total - vol)
    ratio = np.where(low > 0, cut / np.maximum(low, 1), 0.0)
    best = int(np.argmin(ratio))
    side = [v for v in range(n - 1) if (int(masks[best]) >> v) & 1]
    value = Fraction(0) if low[best] == 0 else Fraction(int(cut[best]), int(low[best]))
    return value, side


def graph_conductance(graph: Graph) -> Fraction:
    return exact_min_conductance(graph)[0]


def nearly_expander_witness(
    graph: Graph, nodes: Iterable[int], phi: Fraction
) -> list[int] | None:
    """A set violating the nearly-expander condition, or None if there is none.

    The condition asks every nonempty ``S`` inside ``nodes`` with at most half
    the volume of ``nodes`` to have ``|E(S, V - S)| >= phi * vol(S)``, where the
    boundary is counted in the whole graph.
    """
    nodes = sorted(set(nodes))
    k = len(nodes)
    if k > MAX_ENUM_NODES:
        raise ParameterError(f"exact enumeration is limited to {MAX_ENUM_NODES} nodes")
    if k == 0:
        return None
    p, q = phi.numerator, phi.denominator
    masks = _subset_bits(k)
    bits = [(masks >> i) & 1 for i in range(k)]
    vol = np.zeros_like(masks)
    outward = np.zeros_like(masks)
    for i, v in enumerate(nodes):
        vol += graph.deg[v] * bits[i]
        outward += len(graph.adj[v]) * bits[i]
    for a, b, c in _pair_counts(graph, nodes):
        outward -= 2 * c * (bits[a] & bits[b])
    vol_a = graph.vol(nodes)
    bad = (2 * vol <= vol_a) & (q * outward < p * vol)
    hits = np.flatnonzero(bad)
    if hits.size == 0:
        return None
    mask = int(masks[hits[0]])
    return [v for i, v in enumerate(nodes) if (mask >> i) & 1]


def exact_nearly_expander(graph: Graph, nodes: Iterable[int], phi: Fraction) -> bool:
    return nearly_expander_witness(graph, nodes, phi) is None


def is_exact_expander(graph: Graph, phi: Fraction) -> bool:
    return graph_conductance(graph) >= phi


# --- flow feasibility -------------------------------------------------------


@dataclass
class FlowNetwork:
    """Directed network with paired residual arcs (arc ``i ^ 1`` is the reverse)."""

    size: int
    head: list[int] = field(default_factory=list)
    cap: list[int] = field(default_factory=list)
    out: list[list[int]] = field(default_factory=list)

    def __post_init__(self):
        self.out = [[] for _ in range(self.size)]

    def add_arc(self, a: int, b: int, forward: int, backward: int = 0) -> None:
        self.out[a].append(len(self.head))
        self.head.append(b)
        self.cap.append(forward)
        self.out[b].append(len(self.head))
        self.head.append(a)
        self.cap.append(backward)


def augmented_network(
    graph: Graph,
    source: Sequence[int],
    sink: Sequence[int],
    capacity: int,
    alive: Sequence[bool] | None = None,
) -> tuple[FlowNetwork, int, int]:
    """Super source to every node with its source mass, every node to a super sink
    with its sink capacity, and each live edge in both directions."""
    n = graph.n
    alive = alive if alive is not None else [True] * n
    s, t = n, n + 1
    net = FlowNetwork(n + 2)
    for v in range(n):
        if not alive[v]:
            continue
        if source[v]:
            net.add_arc(s, v, source[v])
        if sink[v]:
            net.add_arc(v, t, sink[v])
    for u, v in graph.edges:
        if u != v and alive[u] and alive[v]:
            net.add_arc(u, v, capacity, capacity)
    return net, s, t


def edmonds_karp(net: FlowNetwork, s: int, t: int) -> tuple[int, list[int]]:
    """Max-flow value and the residual-reachable side of a minimum cut."""
    cap = list(net.cap)
    head = net.head
    value = 0
    while True:
        parent = [-1] * net.size
        parent[s] = -2
        queue = deque([s])
        while queue and parent[t] == -1:
            a = queue.popleft()
            for arc in net.out[a]:
                b = head[arc]
                if cap[arc] > 0 and parent[b] == -1:
                    parent[b] = arc
                    queue.append(b)
        if parent[t] == -1:
            reach = [v for v in range(net.size) if parent[v] != -1]
            return value, reach
        bottleneck = None
        b = t
        while b != s:
            arc = parent[b]
            bottleneck = cap[arc] if bottleneck is None else min(bottleneck, cap[arc])
            b = head[arc ^ 1]
        b = t
        while b != s:
            arc = parent[b]
            cap[arc] -= bottleneck
            cap[arc ^ 1] += bottleneck
            b = head[arc ^ 1]
        value += bottleneck


def fifo_push_relabel(net: FlowNetwork, s: int, t: int) -> int:
    """Plain FIFO push-relabel max-flow with unbounded labels."""
    size = net.size
    cap = list(net.cap)
    head = net.head
    height = [0] * size
    excess = [0] * size
    height[s] = size
    active: deque[int] = deque()
    for arc in net.out[s]:
        amount = cap[arc]
        if amount:
            b = head[arc]
            cap[arc] -= amount
            cap[arc ^ 1] += amount
            excess[b] += amount
            if b != t and excess[b] == amount:
                active.append(b)
    while active:
        a = active.popleft()
        while excess[a] > 0:
            pushed = False
            for arc in net.out[a]:
                b = head[arc]
                if cap[arc] > 0 and height[a] == height[b] + 1:
                    amount = min(excess[a], cap[arc])
                    cap[arc] -= amount
                    cap[arc ^ 1] += amount
                    excess[a] -= amount
                    excess[b] += amount
                    if b not in (s, t) and excess[b] == amount:
                        active.append(b)
                    pushed = True
                    if excess[a] == 0:
                        break
            if not pushed:
                height[a] = 1 + min(height[head[arc]] for arc in net.out[a] if cap[arc] > 0)
    return excess[t]


@dataclass
class FeasibilityReport:
    feasible: bool
    routed: int
    demand: int
    blocked: list[int]


def exact_flow_feasible(
    graph: Graph,
    source: Sequence[int],
    sink: Sequence[int],
    capacity: int,
    alive: Sequence[bool] | None = None,
) -> FeasibilityReport:
    """Whether all source mass can be routed; ``blocked`` is the source side of a
    minimum cut restricted to graph nodes (empty when feasible)."""
    net, s, t = augmented_network(graph, source, sink, capacity, alive)
    alive = alive if alive is not None else [True] * graph.n
    demand = sum(source[v] for v in range(graph.n) if alive[v])
    value, reach = edmonds_karp(net, s, t)
    blocked = [] if value == demand else [v for v in reach if v < graph.n]
    return FeasibilityReport(value == demand, value, demand, blocked)


def flow_feasible_second_opinion(
    graph: Graph,
    source: Sequence[int],
    sink: Sequence[int],
    capacity: int,
    alive: Sequence[bool] | None = None,
) -> bool:
    net, s, t = augmented_network(graph, source, sink, capacity, alive)
    alive = alive if alive is not None else [True] * graph.n
    demand = sum(source[v] for v in range(graph.n) if alive[v])
    return fifo_push_relabel(net, s, t) == demand


def slow_trim(graph: Graph, nodes: Iterable[int], phi: Fraction) -> tuple[list[int], int]:
    """Trimming with exact max-flow rounds; returns the kept set and the round count."""
    p, q = phi.numerator, phi.denominator
    keep = set(nodes)
    rounds = 0
    while keep:
        rounds += 1
        sub = graph.induce_with_loops(keep)
        local = sorted(keep)
        boundary = graph.boundary_counts(keep)
        source = [2 * q * boundary.get(v, 0) for v in local]
        sink = [p * d for d in sub.deg]
        report = exact_flow_feasible(sub, source, sink, 2 * q)
        if report.feasible:
            break
        keep -= {local[i] for i in report.blocked}
    return sorted(keep), rounds


# --- dense flow vectors -----------------------------------------------------


def dense_flow_matrix(matchings: Iterable[Iterable[tuple[int, int]]], m: int) -> np.ndarray:
    """Start from the identity and, per matching, replace both rows of each pair
    by their average."""
    flow = np.eye(m)
    for matching in matchings:
        pairs = np.asarray(list(matching), dtype=np.int64).reshape(-1, 2)
        if pairs.size:
            avg = (flow[pairs[:, 0]] + flow[pairs[:, 1]]) / 2
            flow[pairs[:, 0]] = avg
            flow[pairs[:, 1]] = avg
    return flow


def potential(flow: np.ndarray, rows: Sequence[int]) -> float:
    """Sum over the given rows of the squared distance to their mean row."""
    sub = flow[np.asarray(rows, dtype=np.int64)]
    if sub.shape[0] == 0:
        return 0.0
    return float(((sub - sub.mean(axis=0)) ** 2).sum())
