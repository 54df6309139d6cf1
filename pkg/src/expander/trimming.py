"""Trimming: shrink a nearly expander until its induced subgraph with loops is
an expander, using warm-started Unit-Flow rounds.

:class:`DynamicFlow` is the shared engine. It keeps one flow state on a fixed
graph, lets callers inject mass, and after each level cut removes the cut,
drops the flow on its edges and turns every severed edge into a fresh source.
Pruning reuses it unchanged.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable

from .errors import ParameterError, TrimFailure
from .graph import Graph
from .unitflow import FlowInstance, PreflowState, unit_flow

log = logging.getLogger(__name__)


def trimming_height(edge_count: int, phi: Fraction) -> int:
    """Label bound ``ceil(40 ln(2m) / phi)`` used by trimming and pruning."""
    return max(1, math.ceil(40 * math.log(2 * max(edge_count, 1)) / phi))


@dataclass
class RoundRecord:
    """One level cut: its nodes, label, volume and the mass it moved."""

    cut: list[int]
    level: int
    volume: int
    crossing: int
    created: int
    destroyed: int


class DynamicFlow:
    """Warm-started flow with sinks ``p * deg``, capacities ``2q`` on a shrinking node set."""

    def __init__(self, graph: Graph, phi: Fraction, height: int | None = None):
        self.graph = graph
        self.phi = phi
        p, q = phi.numerator, phi.denominator
        self.instance = FlowInstance(
            graph,
            source=[0] * graph.n,
            sink=[p * d for d in graph.deg],
            capacity=2 * q,
            height=height if height is not None else trimming_height(graph.m, phi),
        )
        self.state = PreflowState(self.instance)
        self.created = 0
        self.destroyed = 0
        self.rounds: list[RoundRecord] = []
        self.live_edges = graph.m

    @property
    def height(self) -> int:
        return self.instance.height

    @property
    def alive(self) -> list[bool]:
        return self.state.alive

    @property
    def work(self) -> int:
        return self.state.work

    def add_mass(self, v: int, amount: int) -> None:
        if self.state.alive[v] and amount:
            self.state.add_source(self.instance, v, amount)
            self.created += amount

    def run(self, *, debug: bool = False) -> list[int]:
        """Route, cutting off level cuts until the live mass is routable.

        Returns every node removed during this call, in removal order.
        """
        removed: list[int] = []
        while True:
            result = unit_flow(self.instance, self.state, debug=debug)
            if result.feasible:
                return removed
            self.advance_round(result.cut, result.level, result.crossing)
            removed.extend(result.cut)

    def advance_round(self, cut: Iterable[int], level: int = 0, crossing: int = 0) -> RoundRecord:
        """Remove ``cut`` and add a source of ``2q`` at each severed edge.

        Mass carried by the dropped flow is lost, so a severed edge ``(v, u)``
        with ``v`` in the cut leaves ``u`` with ``2q - f(v, u)`` new units.
        """
        cut = sorted(set(cut))
        in_cut = set(cut)
        graph = self.graph
        inst, st = self.instance, self.state
        cap = inst.capacity
        alive, mass, flow = st.alive, st.mass, st.flow
        destroyed = sum(mass[v] for v in cut)
        for v in cut:
            alive[v] = False
            st.source_total -= inst.source[v]
            st.level[st.label[v]].discard(v)
        created = 0
        volume = 0
        for v in cut:
            volume += graph.deg[v]
            self.live_edges -= graph.loops[v]
            for u, e, sign in graph.adj[v]:
                if alive[u]:
                    sent = sign * flow[e]
                    flow[e] = 0
                    mass[u] -= sent
                    inst.source[u] += cap
                    st.source_total += cap
                    mass[u] += cap
                    created += cap - sent
                    st.activate(inst, u)
                else:
                    flow[e] = 0
                    if u not in in_cut or u > v:
                        self.live_edges -= 1
        self.created += created
        self.destroyed += destroyed
        record = RoundRecord(cut, level, volume, crossing, created, destroyed)
        self.rounds.append(record)
        log.debug("level cut of %d nodes at label %d, created %d", len(cut), level, created)
        return record

    def live_nodes(self) -> list[int]:
        return self.state.live_nodes()


@dataclass
class TrimResult:
    """Kept set (in the caller's node ids) plus the accounting of the run."""

    kept: list[int]
    removed: list[int]
    initial_mass: int
    created: int
    destroyed: int
    height: int
    work: int
    rounds: list[RoundRecord] = field(default_factory=list)
    boundary_before: int = 0
    boundary_after: int = 0
    volume_before: int = 0
    volume_after: int = 0


def trim(graph: Graph, nodes: Iterable[int], phi: Fraction, *, debug: bool = False) -> TrimResult:
    """Return ``A' ⊆ A`` whose induced subgraph with loops has conductance at
    least ``phi / 6``.

    Requires ``|E(A, V - A)| <= phi * vol(A) / 10``. Raises :class:`TrimFailure`
    when the run shows that ``A`` was not a nearly ``phi`` expander.
    """
    p, q = phi.numerator, phi.denominator
    nodes = sorted(set(nodes))
    if not nodes:
        raise ParameterError("cannot trim an empty set")
    boundary = graph.boundary_counts(nodes)
    crossing = sum(boundary.values())
    volume = graph.vol(nodes)
    if 10 * q * crossing > p * volume:
        raise ParameterError(
            f"{crossing} boundary edges exceed phi * vol(A) / 10 = {phi * volume / 10}"
        )
    sub = graph.induce_with_loops(nodes)
    engine = DynamicFlow(sub, phi)
    # total live source mass must stay within 3/2 * p * m(G{A_t})
    engine.instance.mass_limit = (3 * p * sub.m) // 2
    for i, v in enumerate(nodes):
        engine.add_mass(i, 2 * q * boundary.get(v, 0))
    initial = engine.created

    removed_local: list[int] = []
    removed_volume = 0
    while True:
        try:
            result = unit_flow(engine.instance, engine.state, debug=debug)
        except ParameterError as exc:
            raise TrimFailure(f"mass hypothesis broken: {exc}", _ids(nodes, removed_local)) from exc
        if result.feasible:
            break
        record = engine.advance_round(result.cut, result.level, result.crossing)
        removed_local.extend(record.cut)
        removed_volume += record.volume
        if len(removed_local) == len(nodes):
            raise TrimFailure("every node was trimmed", _ids(nodes, removed_local))
        if p * removed_volume > 4 * q * crossing:
            raise TrimFailure("trimmed volume exceeds 4 |E(A, V - A)| / phi", _ids(nodes, removed_local))
        engine.instance.mass_limit = (3 * p * engine.live_edges) // 2

    kept = [nodes[i] for i in engine.live_nodes()]
    after = graph.cut_size(kept)
    kept_volume = graph.vol(kept)
    if p * kept_volume < p * volume - 4 * q * crossing or after > 2 * crossing:
        raise TrimFailure("postcondition failed", _ids(nodes, removed_local))
    return TrimResult(
        kept=kept,
        removed=_ids(nodes, removed_local),
        initial_mass=initial,
        created=engine.created,
        destroyed=engine.destroyed,
        height=engine.height,
        work=engine.work,
        rounds=engine.rounds,
        boundary_before=crossing,
        boundary_after=after,
        volume_before=volume,
        volume_after=kept_volume,
    )


def _ids(nodes: list[int], local: Iterable[int]) -> list[int]:
    return sorted(nodes[i] for i in local)
