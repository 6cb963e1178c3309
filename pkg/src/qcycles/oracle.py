"""Ground truth: the universal cycle validator and brute-force spectrum
enumeration on small explicit instances.

The validator is the one non-negotiable check every builder output must
pass: even length >= 4, distinct vertices, hypercube adjacency, every edge
present in the sample, vertex classes allowed.  The enumerator answers
"does a cycle of length L exist" exactly, by depth-first path extension
with two prunings: bipartite parity of the remaining budget, and
BFS-reachability of the start vertex within the remaining budget.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import Optional, Sequence

from .cube import Edge, adjacent, weight
from .errors import CapacityError
from .sampling import EdgeSource, ExplicitInstance

VERTEX_CEILING = 1 << 12


@dataclass(frozen=True)
class SpectrumSet:
    lengths: frozenset[int]
    exhaustive: bool

    def sorted(self) -> list[int]:
        return sorted(self.lengths)


def validate_cycle(
    source: EdgeSource,
    vertices: Sequence[int],
    allowed: Optional[frozenset] = None,
) -> tuple[bool, Optional[str]]:
    """True plus None, or False plus a first-violation diagnostic."""
    n = len(vertices)
    if n < 4:
        return False, f"length {n} below 4"
    if n % 2:
        return False, f"odd length {n}"
    if len(set(vertices)) != n:
        return False, "repeated vertex"
    for i, v in enumerate(vertices):
        if v >> source.d:
            return False, f"vertex at position {i} outside Q^{source.d}"
        if not source.vertex_allowed(v, allowed):
            return False, f"vertex at position {i} not in an allowed class"
    for i in range(n):
        u, v = vertices[i], vertices[(i + 1) % n]
        if not adjacent(u, v):
            return False, f"vertices at positions {i},{(i + 1) % n} not adjacent"
        if not source.edge_present(Edge.between(u, v)):
            return False, f"edge at position {i} absent from the sample"
    return True, None


class _Instance:
    """Adjacency view of an explicit instance, for the enumerator."""

    def __init__(self, inst: ExplicitInstance):
        self.d = inst.d
        if 1 << inst.d > VERTEX_CEILING:
            raise CapacityError(
                f"instance on 2^{inst.d} vertices above oracle ceiling"
            )
        self.adj: dict[int, list[int]] = {}
        for e in inst.edges:
            u, v = e.endpoints()
            self.adj.setdefault(u, []).append(v)
            self.adj.setdefault(v, []).append(u)
        for v in self.adj:
            self.adj[v].sort()

    def bfs_from(self, s: int) -> dict[int, int]:
        dist = {s: 0}
        q = deque([s])
        while q:
            v = q.popleft()
            for w in self.adj.get(v, ()):
                if w not in dist:
                    dist[w] = dist[v] + 1
                    q.append(w)
        return dist


def _as_instance(graph) -> _Instance:
    if isinstance(graph, _Instance):
        return graph
    if isinstance(graph, ExplicitInstance):
        return _Instance(graph)
    raise TypeError("oracle operations take an ExplicitInstance")


def cycle_of_length_exists(graph, length: int) -> bool:
    """Exact existence of a cycle with `length` edges."""
    if length % 2 or length < 4:
        return False  # bipartite host: no odd or degenerate cycles
    inst = _as_instance(graph)
    for start in sorted(inst.adj):
        dist = inst.bfs_from(start)
        if _dfs_cycle(inst, start, dist, length):
            return True
    return False


def _dfs_cycle(inst: _Instance, start: int, dist_to_start: dict, length: int) -> bool:
    # Paths may only visit vertices > start (each cycle is found once, at
    # its minimal vertex); parity and reachability prune the rest.
    target_parity = length % 2  # == 0
    visited = {start}
    adj = inst.adj

    def rec(v: int, steps: int) -> bool:
        remaining = length - steps
        if remaining == 0:
            return v == start
        d = dist_to_start.get(v)
        if d is None or d > remaining:
            return False
        if (weight(v) - weight(start)) % 2 != remaining % 2:
            return False
        for w in adj.get(v, ()):
            if w == start:
                if remaining == 1:
                    return True
                continue
            if w < start or w in visited:
                continue
            visited.add(w)
            if rec(w, steps + 1):
                return True
            visited.discard(w)
        return False

    return rec(start, 0)


def full_spectrum(graph) -> SpectrumSet:
    """The exact set of cycle lengths present in the instance."""
    inst = _as_instance(graph)
    nverts = len(inst.adj)
    found = set()
    for length in range(4, nverts + 1, 2):
        if cycle_of_length_exists(inst, length):
            found.add(length)
    return SpectrumSet(lengths=frozenset(found), exhaustive=True)
