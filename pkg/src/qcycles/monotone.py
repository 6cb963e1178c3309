"""Monotone paths in oriented subcubes.

A monotone path visits at most one vertex per layer; it is maximal when its
edge count equals the host dimension, i.e. it runs from the root to the
root's antipode within the subcube.  Two searches are provided: the random
greedy walk (take the first present edge into the next layer, per a fixed
coordinate order) and an exhaustive depth-first existence search.  The
greedy walk admits an exact success probability, prod_{j=1..D} (1-(1-p)^j),
which the Monte Carlo harness checks against; the closed-form lower bound
(pD/2e)^D is also provided for the regime p <= 1/D.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

from .cube import Edge, OrientedSubcube, mask_coords
from .errors import CapacityError, DomainError
from .sampling import EdgeSource

EXHAUSTIVE_DIM_CEILING = 20


@dataclass(frozen=True)
class MonotonePath:
    host: OrientedSubcube
    vertices: tuple[int, ...]

    @property
    def length(self) -> int:
        return len(self.vertices) - 1

    @property
    def is_maximal(self) -> bool:
        return self.length == self.host.dimension

    def check(self) -> None:
        layers = [self.host.layer_of(v) for v in self.vertices]
        for a, b in zip(layers, layers[1:]):
            if b != a + 1:
                raise AssertionError("layers must increase by exactly 1")
        for a, b in zip(self.vertices, self.vertices[1:]):
            if (a ^ b).bit_count() != 1:
                raise AssertionError("consecutive vertices must be adjacent")


def greedy_monotone_path(
    source: EdgeSource,
    host: OrientedSubcube,
    tie_order: Optional[Sequence[int]] = None,
    allowed: Optional[frozenset] = None,
) -> Optional[MonotonePath]:
    """Walk from the root, taking the first present edge (per tie_order)
    towards the next layer; absent when some layer has no present edge out.

    Each edge's state is read at most once per run.  Deterministic given
    (source, host, tie_order).
    """
    order = list(tie_order) if tie_order is not None else host.cube.free_coords()
    v = host.root
    if not source.vertex_allowed(v, allowed):
        return None
    path = [v]
    root = host.root
    for _ in range(host.dimension):
        nxt = None
        for c in order:
            bit = 1 << (c - 1)
            if not host.cube.free_mask & bit:
                continue
            if (v ^ root) & bit:
                continue  # already flipped: moving back down
            w = v ^ bit
            if not source.vertex_allowed(w, allowed):
                continue
            base = v & ~bit
            if source.edge_present(Edge(base, c)):
                nxt = w
                break
        if nxt is None:
            return None
        v = nxt
        path.append(v)
    return MonotonePath(host, tuple(path))


def exists_maximal_monotone_path(
    source: EdgeSource,
    host: OrientedSubcube,
    allowed: Optional[frozenset] = None,
    ceiling: int = EXHAUSTIVE_DIM_CEILING,
) -> Optional[MonotonePath]:
    """Exhaustive search for a root-to-antipode path over present
    layer-increasing edges.  Dominates the greedy walk: whenever the greedy
    walk succeeds, this returns a path too.
    """
    dim = host.dimension
    if dim > ceiling:
        raise CapacityError(f"dimension {dim} above exhaustive ceiling {ceiling}")
    root = host.root
    free = host.cube.free_mask
    if not source.vertex_allowed(root, allowed):
        return None
    target = root ^ free
    dead: set[int] = set()
    path = [root]

    def dfs(v: int) -> bool:
        if v == target:
            return True
        same = ~(v ^ root) & free
        for c in mask_coords(same):
            bit = 1 << (c - 1)
            w = v ^ bit
            if w in dead:
                continue
            if not source.vertex_allowed(w, allowed):
                dead.add(w)
                continue
            if not source.edge_present(Edge(v & ~bit, c)):
                continue
            path.append(w)
            if dfs(w):
                return True
            path.pop()
            dead.add(w)
        return False

    if dfs(root):
        return MonotonePath(host, tuple(path))
    return None


def greedy_success_probability_exact(dim: int, p: float) -> float:
    """Probability that the greedy walk reaches the top layer:
    prod_{j=1..dim} (1 - (1-p)^j); 1 for dim == 0."""
    if dim < 0:
        raise DomainError("dimension must be >= 0")
    if not 0.0 <= p <= 1.0:
        raise DomainError("p must be in [0, 1]")
    out = 1.0
    q = 1.0 - p
    for j in range(1, dim + 1):
        out *= 1.0 - q**j
    return out


def short_path_lower_bound(dim: int, p: float) -> float:
    """Closed-form lower bound (p*dim / 2e)^dim on the probability that a
    maximal monotone path exists; asserted only for p <= 1/dim."""
    if dim < 1:
        raise DomainError("dimension must be >= 1")
    if not 0.0 <= p <= 1.0 / dim:
        raise DomainError(f"bound requires p in [0, 1/{dim}]")
    return (p * dim / (2.0 * math.e)) ** dim



def greedy_success_count(seed0: int, n_samples: int, dim: int, p: float) -> int:
    """Monte Carlo count of greedy-walk successes over seeds seed0..seed0+n-1,
    each on a fresh dim-dimensional sample rooted at the all-zero vertex.

    Vectorized across seeds; per (seed, edge) states identical to the scalar
    walk, so counts match running greedy_monotone_path per seed.
    """
    import numpy as np

    from .sampling import edge_uniforms_bulk_seeds

    seeds = np.arange(seed0, seed0 + n_samples, dtype=np.uint64)
    v = np.zeros(n_samples, dtype=np.uint64)
    alive = np.ones(n_samples, dtype=bool)
    for _layer in range(dim):
        advanced = np.zeros(n_samples, dtype=bool)
        for c in range(1, dim + 1):
            bit = np.uint64(1 << (c - 1))
            need = alive & ~advanced & ((v & bit) == 0)
            if not need.any():
                continue
            idx = np.nonzero(need)[0]
            u = edge_uniforms_bulk_seeds(
                seeds[idx], v[idx], np.full(len(idx), c, dtype=np.uint64)
            )
            hit = idx[u < p]
            v[hit] |= bit
            advanced[hit] = True
        alive &= advanced
        if not alive.any():
            break
    return int(alive.sum())
