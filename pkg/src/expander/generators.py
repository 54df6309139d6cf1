"""Standard graph families used by tests and the ``generate`` command."""

from __future__ import annotations

from itertools import combinations

import numpy as np

from .errors import ParameterError
from .graph import Graph


def clique(k: int) -> Graph:
    return Graph(k, combinations(range(k), 2))


def barbell(k: int) -> Graph:
    """Two k-cliques joined by a single edge between node k-1 and node k."""
    edges = list(combinations(range(k), 2))
    edges += [(u + k, v + k) for u, v in combinations(range(k), 2)]
    edges.append((k - 1, k))
    return Graph(2 * k, edges)


def cycle(n: int) -> Graph:
    if n < 3:
        raise ParameterError("a cycle needs at least 3 nodes")
    return Graph(n, [(i, (i + 1) % n) for i in range(n)])


def path(n: int) -> Graph:
    return Graph(n, [(i, i + 1) for i in range(n - 1)])


def hypercube(d: int) -> Graph:
    n = 1 << d
    return Graph(n, [(v, v ^ (1 << b)) for v in range(n) for b in range(d) if v < v ^ (1 << b)])


def gnm(n: int, m: int, seed: int = 0) -> Graph:
    """Uniform simple graph with n nodes and m edges."""
    pairs = list(combinations(range(n), 2))
    if m > len(pairs):
        raise ParameterError(f"G({n}, m) has at most {len(pairs)} edges")
    rng = np.random.default_rng(seed)
    chosen = sorted(rng.choice(len(pairs), size=m, replace=False).tolist())
    return Graph(n, [pairs[i] for i in chosen])


FAMILIES = {
    "clique": (clique, ["k"]),
    "barbell": (barbell, ["k"]),
    "cycle": (cycle, ["n"]),
    "path": (path, ["n"]),
    "hypercube": (hypercube, ["d"]),
    "gnm": (gnm, ["n", "m"]),
}
