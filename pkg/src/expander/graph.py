"""Undirected multigraphs with self-loops, conductance and the cut plumbing.

Nodes are local indices ``0..n-1``. Each graph also carries ``labels``, the
ids its nodes had in the graph it was derived from, and ``edge_labels`` for
edges, so sets can be mapped back after taking induced subgraphs.

A self-loop contributes 1 to the degree of its node, so the volume of the
whole graph is ``2 * (non-loop edges) + loops``.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components as _scipy_components

from .errors import ParameterError

Edge = tuple[int, int]


def parse_phi(value: str | float | Fraction) -> Fraction:
    """Return a conductance target as an exact rational in (0, 1).

    Accepts ``"p/q"`` strings, decimals and Fractions. Decimals are snapped to
    the nearest rational with denominator at most 10**6.
    """
    try:
        if isinstance(value, Fraction):
            phi = value
        elif isinstance(value, str) and "/" in value:
            phi = Fraction(value.strip())
        else:
            phi = Fraction(str(value)).limit_denominator(10**6)
    except (ValueError, ZeroDivisionError) as exc:
        raise ParameterError(f"cannot read phi from {value!r}") from exc
    if not 0 < phi < 1:
        raise ParameterError(f"phi must lie in (0, 1), got {phi}")
    return phi


class Graph:
    """Immutable undirected multigraph.

    ``adj[v]`` lists the non-loop incidences of ``v`` as
    ``(neighbor, edge_id, sign)`` where ``sign`` is +1 when ``v`` is the first
    endpoint of the edge. Flow on edge ``e = (a, b)`` is stored as the flow from
    ``a`` to ``b``; ``sign`` converts it to the flow leaving ``v``.
    """

    __slots__ = ("n", "edges", "labels", "edge_labels", "adj", "loops", "deg", "_index")

    def __init__(
        self,
        n: int,
        edges: Iterable[Edge],
        labels: Iterable[int] | None = None,
        edge_labels: Iterable[int] | None = None,
    ):
        self.n = n
        self.edges: tuple[Edge, ...] = tuple((int(u), int(v)) for u, v in edges)
        self.labels = tuple(range(n)) if labels is None else tuple(labels)
        self.edge_labels = (
            tuple(range(len(self.edges))) if edge_labels is None else tuple(edge_labels)
        )
        if len(self.labels) != n or len(self.edge_labels) != len(self.edges):
            raise ParameterError("label arrays do not match graph size")
        adj: list[list[tuple[int, int, int]]] = [[] for _ in range(n)]
        loops = [0] * n
        for e, (u, v) in enumerate(self.edges):
            if not (0 <= u < n and 0 <= v < n):
                raise ParameterError(f"edge {e} = ({u}, {v}) has an endpoint outside 0..{n - 1}")
            if u == v:
                loops[u] += 1
            else:
                adj[u].append((v, e, 1))
                adj[v].append((u, e, -1))
        self.adj = adj
        self.loops = loops
        self.deg = [len(adj[v]) + loops[v] for v in range(n)]
        self._index: dict[int, int] | None = None

    @classmethod
    def from_edges(cls, edges: Iterable[Edge], n: int | None = None) -> Graph:
        edges = list(edges)
        if n is None:
            n = 1 + max((max(u, v) for u, v in edges), default=-1)
        return cls(n, edges)

    @property
    def m(self) -> int:
        return len(self.edges)

    @property
    def loop_count(self) -> int:
        return sum(self.loops)

    def __repr__(self) -> str:
        return f"Graph(n={self.n}, m={self.m}, loops={self.loop_count})"

    def index_of(self, label: int) -> int:
        if self._index is None:
            self._index = {lab: i for i, lab in enumerate(self.labels)}
        return self._index[label]

    def to_labels(self, nodes: Iterable[int]) -> list[int]:
        return sorted(self.labels[v] for v in nodes)

    def total_volume(self) -> int:
        return sum(self.deg)

    def vol(self, nodes: Iterable[int]) -> int:
        deg = self.deg
        return sum(deg[v] for v in nodes)

    def cut_size(self, nodes: Iterable[int]) -> int:
        """Number of edges with exactly one endpoint in ``nodes``."""
        inside = self._mask(nodes)
        return sum(1 for u, v in self.edges if inside[u] != inside[v])

    def boundary_counts(self, nodes: Iterable[int]) -> dict[int, int]:
        """Per node of ``nodes``, the number of incident edges leaving the set."""
        inside = self._mask(nodes)
        counts: dict[int, int] = {}
        for v in range(self.n):
            if inside[v]:
                c = sum(1 for u, _, _ in self.adj[v] if not inside[u])
                if c:
                    counts[v] = c
        return counts

    def induce_with_loops(self, nodes: Iterable[int]) -> Graph:
        """Induced subgraph where each boundary edge becomes a loop at its inside end.

        Node degrees are unchanged. Node ``i`` of the result is the ``i``-th
        smallest member of ``nodes``; labels and edge labels are carried over.
        """
        keep = sorted(set(nodes))
        local = {v: i for i, v in enumerate(keep)}
        edges = []
        edge_labels = []
        for e, (u, v) in enumerate(self.edges):
            iu, iv = local.get(u), local.get(v)
            if iu is None and iv is None:
                continue
            if iu is None:
                iu = iv
            elif iv is None:
                iv = iu
            edges.append((iu, iv))
            edge_labels.append(self.edge_labels[e])
        return Graph(len(keep), edges, [self.labels[v] for v in keep], edge_labels)

    def without_edges(self, edge_ids: Iterable[int]) -> Graph:
        """Copy with the given edges removed; node set and labels are kept."""
        drop = set(edge_ids)
        kept = [e for e in range(self.m) if e not in drop]
        return Graph(
            self.n,
            [self.edges[e] for e in kept],
            self.labels,
            [self.edge_labels[e] for e in kept],
        )

    def subdivision(self) -> Subdivision:
        """Put a split node on every edge; a loop becomes two parallel edges."""
        n = self.n
        edges = []
        for e, (u, v) in enumerate(self.edges):
            edges.append((u, n + e))
            edges.append((v, n + e))
        return Subdivision(Graph(n + self.m, edges), self)

    def _mask(self, nodes: Iterable[int]) -> list[bool]:
        inside = [False] * self.n
        for v in nodes:
            inside[v] = True
        return inside


@dataclass(frozen=True)
class Subdivision:
    """The subdivision graph together with the map back to its base graph.

    Regular nodes keep their index; the split node of edge ``e`` is ``n + e``.
    """

    graph: Graph
    base: Graph

    def split_node(self, e: int) -> int:
        return self.base.n + e

    def edge_of(self, x: int) -> int:
        return x - self.base.n

    def is_split(self, x: int) -> bool:
        return x >= self.base.n

    def project(self, nodes: Iterable[int]) -> list[int]:
        n = self.base.n
        return sorted(v for v in nodes if v < n)

    def normalize(self, nodes: Iterable[int]) -> set[int]:
        """Add every split node whose edge has both endpoints in the set."""
        out = set(nodes)
        n = self.base.n
        for e, (u, v) in enumerate(self.base.edges):
            if u in out and v in out:
                out.add(n + e)
        return out


def conductance(graph: Graph, nodes: Iterable[int]) -> Fraction:
    """Exact conductance of a proper nonempty node set.

    A side of volume zero gives conductance 0: such a side is detached from
    the rest of the graph.
    """
    nodes = set(nodes)
    if not nodes or len(nodes) >= graph.n or not all(0 <= v < graph.n for v in nodes):
        raise ParameterError("conductance needs a proper nonempty subset of the nodes")
    vol_s = graph.vol(nodes)
    low = min(vol_s, graph.total_volume() - vol_s)
    if low == 0:
        return Fraction(0)
    return Fraction(graph.cut_size(nodes), low)


def connected_components(graph: Graph) -> list[list[int]]:
    """Connected components as sorted node lists, ordered by smallest node."""
    if graph.n == 0:
        return []
    rows = [u for u, v in graph.edges if u != v]
    cols = [v for u, v in graph.edges if u != v]
    mat = coo_matrix((np.ones(len(rows)), (rows, cols)), shape=(graph.n, graph.n))
    _, comp = _scipy_components(mat, directed=False)
    groups: dict[int, list[int]] = {}
    for v, c in enumerate(comp.tolist()):
        groups.setdefault(c, []).append(v)
    return sorted(groups.values(), key=lambda g: g[0])


def read_edge_list(lines: Iterable[str]) -> Graph:
    """Parse ``u v`` lines (0-based ids, ``#`` comments, ``u u`` for a loop)."""
    edges = []
    for lineno, raw in enumerate(lines, 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 2:
            raise ParameterError(f"line {lineno}: expected two node ids, got {raw.strip()!r}")
        try:
            u, v = int(parts[0]), int(parts[1])
        except ValueError as exc:
            raise ParameterError(f"line {lineno}: node ids must be integers") from exc
        if u < 0 or v < 0:
            raise ParameterError(f"line {lineno}: node ids must be non-negative")
        edges.append((u, v))
    return Graph.from_edges(edges)


def format_edge_list(graph: Graph) -> str:
    return "".join(f"{graph.labels[u]} {graph.labels[v]}\n" for u, v in graph.edges)
