"""Recursive expander decomposition driven by cut-matching and trimming.

Each piece is a graph ``G{S}`` carrying the original node labels. A piece is
split into connected components first. Small components are settled by exact
enumeration; larger ones run cut-matching and then either become a cluster,
split along the balanced cut, or have their large side trimmed into a
cluster while the rest recurses.
"""

from __future__ import annotations

import logging
import math
import threading
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .cutmatching import BALANCED, EXPANDER, CutMatchConfig, cut_match
from .errors import ParameterError, TrimFailure
from .graph import Graph, connected_components
from .oracle import MAX_ENUM_NODES, exact_min_conductance
from .trimming import trim

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class DecompositionConfig:
    """``exact_edges``: components with at most this many non-loop edges (and at
    most 20 nodes) are decomposed by exact enumeration. ``certify_nodes``:
    clusters up to this size get their conductance measured exactly.
    ``c_charge`` scales the inter-cluster edge allowance and ``c_b`` the
    per-level volume-drop diagnostic."""

    exact_edges: int = 16
    workers: int = 1
    certify_nodes: int = 14
    c_charge: float = 32.0
    c_b: float = 1.0
    cut_match: CutMatchConfig = field(default_factory=CutMatchConfig)


@dataclass
class Cluster:
    nodes: list[int]
    certificate: str
    conductance: Fraction | None = None

    def to_json(self) -> dict:
        value = self.conductance
        return {
            "nodes": self.nodes,
            "certificate": self.certificate,
            "conductance": None if value is None else f"{value.numerator}/{value.denominator}",
        }


@dataclass
class DecompositionResult:
    clusters: list[Cluster]
    inter_cluster_edges: int
    depth: int
    stats: dict[str, int] = field(default_factory=dict)
    level_volumes: list[int] = field(default_factory=list)

    def partition(self) -> list[list[int]]:
        return [c.nodes for c in self.clusters]

    def to_json(self, detail: bool = False) -> dict:
        out = {
            "clusters": self.partition(),
            "inter_cluster_edges": self.inter_cluster_edges,
        }
        if detail:
            out["certificates"] = [c.to_json() for c in self.clusters]
            out["depth"] = self.depth
            out["stats"] = dict(self.stats)
            out["level_volumes"] = list(self.level_volumes)
        return out


class _Run:
    def __init__(self, phi: Fraction, config: DecompositionConfig):
        self.phi = phi
        self.config = config
        self.stats = {
            "exact": 0,
            "cut_match_calls": 0,
            "case_expander": 0,
            "case_balanced": 0,
            "case_near_expander": 0,
            "trim_calls": 0,
            "trim_fallbacks": 0,
            "cut_match_work": 0,
            "trim_work": 0,
        }
        self.max_depth = 0
        self.level_volume: dict[int, int] = {}
        self.lock = threading.Lock()

    def count(self, key: str, amount: int = 1) -> None:
        with self.lock:
            self.stats[key] += amount

    def piece(self, graph: Graph, seeds: np.random.SeedSequence, depth: int) -> list[Cluster]:
        """Decompose a graph whose node labels are original ids."""
        with self.lock:
            self.max_depth = max(self.max_depth, depth)
        comps = connected_components(graph)
        children = seeds.spawn(len(comps))
        out: list[Cluster] = []
        for comp, seed in zip(comps, children):
            sub = graph if len(comps) == 1 else graph.induce_with_loops(comp)
            out.extend(self.component(sub, seed, depth))
        return out

    def component(self, graph: Graph, seed: np.random.SeedSequence, depth: int) -> list[Cluster]:
        volume = graph.total_volume()
        with self.lock:
            self.level_volume[depth] = max(self.level_volume.get(depth, 0), volume)
        if graph.n == 1:
            return [Cluster(list(graph.labels), "singleton", Fraction(1))]
        non_loop = graph.m - graph.loop_count
        if non_loop <= self.config.exact_edges and graph.n <= MAX_ENUM_NODES:
            return self.exact(graph, depth)

        self.count("cut_match_calls")
        cm_seed, left_seed, right_seed = seed.spawn(3)
        result = cut_match(graph, self.phi, cm_seed, self.config.cut_match)
        self.count(f"case_{result.case}")
        self.count("cut_match_work", result.work)
        if result.case == EXPANDER:
            return [self.cluster(graph, list(range(graph.n)), "cut_matching")]
        if result.case == BALANCED:
            return self.split(graph, result.kept, result.removed, left_seed, right_seed, depth)

        self.count("trim_calls")
        try:
            trimmed = trim(graph, result.kept, self.phi)
        except (TrimFailure, ParameterError) as exc:
            log.info("trimming fell back to a split: %s", exc)
            self.count("trim_fallbacks")
            return self.split(graph, result.kept, result.removed, left_seed, right_seed, depth)
        self.count("trim_work", trimmed.work)
        kept = set(trimmed.kept)
        rest = [v for v in range(graph.n) if v not in kept]
        clusters = [self.cluster(graph, trimmed.kept, "trimming")]
        return clusters + self.piece(graph.induce_with_loops(rest), right_seed, depth + 1)

    def split(self, graph, left, right, left_seed, right_seed, depth) -> list[Cluster]:
        return self.piece(graph.induce_with_loops(left), left_seed, depth + 1) + self.piece(
            graph.induce_with_loops(right), right_seed, depth + 1
        )

    def cluster(self, graph: Graph, local: list[int], certificate: str) -> Cluster:
        value = None
        if len(local) <= self.config.certify_nodes:
            sub = graph if len(local) == graph.n else graph.induce_with_loops(local)
            value = exact_min_conductance(sub)[0]
        return Cluster(sorted(graph.to_labels(local)), certificate, value)

    def exact(self, graph: Graph, depth: int) -> list[Cluster]:
        """Split along exact minimum-conductance cuts until every part reaches phi."""
        self.count("exact")
        comps = connected_components(graph)
        if len(comps) > 1:
            return [c for comp in comps for c in self.exact(graph.induce_with_loops(comp), depth)]
        if graph.n == 1:
            return [Cluster(list(graph.labels), "singleton", Fraction(1))]
        value, side = exact_min_conductance(graph)
        if value >= self.phi:
            return [Cluster(sorted(graph.labels), "exact", value)]
        inside = set(side)
        rest = [v for v in range(graph.n) if v not in inside]
        return self.exact(graph.induce_with_loops(side), depth + 1) + self.exact(
            graph.induce_with_loops(rest), depth + 1
        )


def decompose(
    graph: Graph,
    phi: Fraction,
    seed: int = 0,
    config: DecompositionConfig = DecompositionConfig(),
) -> DecompositionResult:
    """Partition the nodes into clusters whose induced subgraphs with loops have
    conductance at least ``phi / 6`` (exactly ``phi`` for enumerated pieces)."""
    if not 0 < phi < 1:
        raise ParameterError("phi must lie in (0, 1)")
    run = _Run(phi, config)
    root = np.random.SeedSequence(seed)
    comps = connected_components(graph)
    seeds = root.spawn(max(len(comps), 1))
    subs = [graph if len(comps) == 1 else graph.induce_with_loops(c) for c in comps]
    if config.workers > 1 and len(subs) > 1:
        with ThreadPoolExecutor(config.workers) as pool:
            parts = list(pool.map(lambda job: run.component(*job, 0), zip(subs, seeds)))
    else:
        parts = [run.component(sub, s, 0) for sub, s in zip(subs, seeds)]
    clusters = sorted((c for part in parts for c in part), key=lambda c: c.nodes[0])
    owner = {}
    for i, c in enumerate(clusters):
        for v in c.nodes:
            owner[v] = i
    labels = graph.labels
    crossing = sum(1 for u, v in graph.edges if owner[labels[u]] != owner[labels[v]])
    log.info("decomposition: %d clusters, %d inter-cluster edges", len(clusters), crossing)
    levels = [run.level_volume[d] for d in sorted(run.level_volume)]
    run.stats["volume_drop_misses"] = volume_drop_misses(levels, graph.m, config.c_b)
    return DecompositionResult(clusters, crossing, run.max_depth, run.stats, levels)


def volume_drop_misses(levels: list[int], m: int, c_b: float = 1.0) -> int:
    """Count levels whose largest component did not shrink by the factor
    ``1 - 1 / (c_b * log2(m)^2)``. Diagnostic only: each miss is logged."""
    factor = 1 - 1 / (c_b * max(math.log2(max(m, 2)), 1.0) ** 2)
    misses = 0
    for depth in range(1, len(levels)):
        log.debug("depth %d: largest component volume %d", depth, levels[depth])
        if levels[depth] > factor * levels[depth - 1]:
            misses += 1
            log.info("depth %d: volume %d did not drop below %.1f", depth, levels[depth], factor * levels[depth - 1])
    return misses


def charge_bound(m: int, phi: Fraction, constant: float = 32.0) -> float:
    """``constant * phi * m * log2(m)^3``, the inter-cluster edge allowance."""
    if m < 2:
        return 0.0
    return constant * float(phi) * m * math.log2(m) ** 3


def charge_audit(result: DecompositionResult, graph: Graph, phi: Fraction, constant: float = 32.0) -> dict:
    """Recount inter-cluster edges and compare them with the allowance."""
    owner = {v: i for i, c in enumerate(result.clusters) for v in c.nodes}
    labels = graph.labels
    crossing = sum(1 for u, v in graph.edges if owner[labels[u]] != owner[labels[v]])
    m = graph.m
    scale = float(phi) * m * math.log2(m) ** 3 if m >= 2 else 0.0
    return {
        "inter_cluster_edges": crossing,
        "reported": result.inter_cluster_edges,
        "bound": charge_bound(m, phi, constant),
        "within_bound": crossing <= charge_bound(m, phi, constant),
        "realized_constant": crossing / scale if scale else 0.0,
    }
