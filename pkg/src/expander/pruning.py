"""Expander pruning: keep a large expander alive under a stream of edge deletions.

Each deletion adds ``4q`` units of mass at both endpoints that are still
kept, then the shared warm-started flow is rerun on the original graph until
the kept set is routable again. Nodes cut off on the way join the pruned set
``P``; it only ever grows.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .errors import BudgetExceeded, ParameterError
from .graph import Graph
from .trimming import DynamicFlow


@dataclass
class PruneStep:
    """What one deletion did, with the running pruned-set statistics."""

    index: int
    edge: int
    newly_pruned: list[int]
    pruned_volume: int
    pruned_boundary: int
    created: int


class ExpanderPruner:
    """Maintains the pruned set for a ``phi`` expander under edge deletions.

    At most ``floor(phi * m / 10)`` deletions are accepted. After ``i``
    deletions the pruned set has volume at most ``8 i / phi``, at most ``4 i``
    edges leaving it, and the rest of the graph with the deleted edges
    removed stays a ``phi / 6`` expander.
    """

    def __init__(self, graph: Graph, phi: Fraction, *, debug: bool = False):
        self.graph = graph
        self.phi = phi
        self.debug = debug
        p, q = phi.numerator, phi.denominator
        self.budget = (p * graph.m) // (10 * q)
        self.engine = DynamicFlow(graph, phi)
        self.deleted: list[int] = []
        self._deleted_set: set[int] = set()
        self.pruned: set[int] = set()
        self.steps: list[PruneStep] = []
        self._pairs: dict[tuple[int, int], list[int]] = {}
        for e, (u, v) in enumerate(graph.edges):
            self._pairs.setdefault((min(u, v), max(u, v)), []).append(e)

    @property
    def created(self) -> int:
        return self.engine.created

    @property
    def work(self) -> int:
        return self.engine.work

    def kept(self) -> list[int]:
        return self.engine.live_nodes()

    def delete_edge(self, u: int, v: int) -> list[int]:
        """Delete one remaining copy of edge ``{u, v}``; return newly pruned nodes."""
        for e in self._pairs.get((min(u, v), max(u, v)), []):
            if e not in self._deleted_set:
                return self.delete_edge_id(e)
        raise ParameterError(f"no remaining edge between {u} and {v}")

    def delete_edge_id(self, e: int) -> list[int]:
        if not 0 <= e < self.graph.m:
            raise ParameterError(f"unknown edge id {e}")
        if e in self._deleted_set:
            raise ParameterError(f"edge {e} was already deleted")
        if len(self.deleted) + 1 > self.budget:
            raise BudgetExceeded(f"deletion budget of {self.budget} edges is used up")
        self.deleted.append(e)
        self._deleted_set.add(e)
        q = self.phi.denominator
        a, b = self.graph.edges[e]
        for x in {a, b}:
            self.engine.add_mass(x, 4 * q)
        newly = sorted(self.engine.run(debug=self.debug))
        self.pruned.update(newly)
        step = PruneStep(
            index=len(self.deleted),
            edge=e,
            newly_pruned=newly,
            pruned_volume=self.graph.vol(self.pruned),
            pruned_boundary=self.current_graph().cut_size(self.pruned),
            created=self.engine.created,
        )
        self.steps.append(step)
        return newly

    def current_graph(self) -> Graph:
        """The original graph minus the deleted edges (same node ids)."""
        return self.graph.without_edges(self._deleted_set)
