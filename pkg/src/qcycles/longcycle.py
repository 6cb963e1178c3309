"""Heuristic long-cycle search on a percolated scope.

Greedy path extension with endpoint rotations and restarts, the classic
recipe for long cycles in sparse random graphs.  This is a best-effort
search with a work budget - no optimality or success guarantee - but every
returned cycle is a genuine cycle of the percolated graph.  On the full
cube (p = 1, no vertex restriction) the reflected-code Hamiltonian cycle
is returned directly.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .cube import Subcube, gray_cycle
from .graphs import ScopeGraph
from .sampling import PercolationSample


@dataclass
class LongCycleResult:
    vertices: Optional[list[int]]  # global vertex ids in cyclic order
    best_length: int
    accepted: bool


def find_long_cycle(
    source,
    scope: Optional[Subcube],
    allowed: Optional[frozenset],
    min_fraction: float,
    rng: random.Random,
    restarts: int = 6,
    rotation_budget: Optional[int] = None,
    graph: Optional[ScopeGraph] = None,
) -> LongCycleResult:
    """Search for a cycle of length >= min_fraction * retained-vertex-count.

    On failure, best_length reports the longest cycle encountered.
    """
    scope = scope or Subcube.full(source.d)
    if (
        isinstance(source, PercolationSample)
        and source.p >= 1.0
        and source.vertex_model is None
        and scope.dimension >= 2
    ):
        verts = gray_cycle(scope)
        return LongCycleResult(verts, len(verts), True)

    g = graph or ScopeGraph(source, scope, allowed)
    retained = g.retained_count
    target = max(4, int(np.ceil(min_fraction * retained)))
    labels = g.component_labels()
    members = np.nonzero(labels == 0)[0]
    if len(members) < max(4, target):
        return LongCycleResult(None, 0, False)
    return _rotation_search(g, members, target, rng, restarts, rotation_budget)


_OPEN = -1
_BURNED = -2  # visited dead end, excluded for the rest of the attempt


def _rotation_search(
    g: ScopeGraph,
    members: np.ndarray,
    target: int,
    rng: random.Random,
    restarts: int,
    rotation_budget: Optional[int],
) -> LongCycleResult:
    n_comp = len(members)
    indptr, indices = g.adj.indptr, g.adj.indices
    adj = [list(map(int, indices[indptr[i] : indptr[i + 1]])) for i in range(g.n)]
    budget = rotation_budget if rotation_budget is not None else 400 + n_comp // 2
    burn_budget = max(64, n_comp // 2)

    best_cycle: Optional[list[int]] = None
    best_len = 0
    pos = np.full(g.n, _OPEN, dtype=np.int64)

    def open_degree(w: int) -> int:
        return sum(1 for x in adj[w] if pos[x] == _OPEN)

    for _attempt in range(max(1, restarts)):
        start = int(members[rng.randrange(n_comp)])
        path = [start]
        pos[:] = _OPEN
        pos[start] = 0
        rotations = 0
        burns = 0
        tried: set[tuple[int, int]] = set()

        while True:
            # extend with a random open neighbor, avoiding obvious dead ends
            while True:
                end = path[-1]
                cand = [w for w in adj[end] if pos[w] == _OPEN]
                if not cand:
                    break
                good = [w for w in cand if open_degree(w) > 0]
                w = (good or cand)[rng.randrange(len(good or cand))]
                pos[w] = len(path)
                path.append(w)

            end = path[-1]
            close_at = None
            for w in adj[end]:
                j = int(pos[w])
                if j >= 0 and len(path) - j >= 4 and (close_at is None or j < close_at):
                    close_at = j
            if close_at is not None:
                clen = len(path) - close_at
                if clen > best_len:
                    best_len = clen
                    best_cycle = path[close_at:]
                if clen >= target:
                    verts = [g.global_of(i) for i in best_cycle]
                    return LongCycleResult(verts, best_len, True)

            if rotations >= budget:
                break
            pick = None
            pick_score = -1
            for w in adj[end]:
                j = int(pos[w])
                if j < 0 or j + 1 >= len(path) - 1:
                    continue
                new_end = path[j + 1]
                if (end, new_end) in tried:
                    continue
                score = open_degree(new_end)
                if score > pick_score:
                    pick, pick_score = j, score
            if pick is None or pick_score == 0:
                # stuck on a pendant: burn the end and back up one step
                if len(path) > 1 and burns < burn_budget:
                    pos[path[-1]] = _BURNED
                    path.pop()
                    burns += 1
                    continue
                if pick is None:
                    break
            new_end = path[pick + 1]
            tried.add((end, new_end))
            tail = path[pick + 1 :]
            tail.reverse()
            path[pick + 1 :] = tail
            for idx in range(pick + 1, len(path)):
                pos[path[idx]] = idx
            rotations += 1

    if best_cycle is not None and best_len >= target:
        return LongCycleResult([g.global_of(i) for i in best_cycle], best_len, True)
    return LongCycleResult(None, best_len, False)
