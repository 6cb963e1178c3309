"""Connected-component analytics on percolated (sub)cubes.

A ScopeGraph materializes one percolated induced subgraph - a subcube
scope, an optional vertex-class restriction - as a CSR adjacency over
local vertex indices (the packed free coordinates).  Hashed samples are
expanded with vectorized numpy hashing; explicit fixture instances take a
plain loop.  Components, BFS shortest paths, diameter estimates and
vertex-expansion ratios all run on top of it.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
from scipy import sparse
from scipy.sparse import csgraph

from .cube import Edge, Subcube
from .errors import CapacityError, MembershipError
from .sampling import (
    EdgeSource,
    PercolationSample,
    edge_uniforms_bulk,
    vertex_uniforms_bulk,
)

SCOPE_DIM_CEILING = 22
EXACT_DIAMETER_CEILING = 1 << 20


@dataclass(frozen=True)
class DiameterEstimate:
    value: int
    method: str  # "exact" or "double_sweep" (a lower bound)


@dataclass
class ComponentSummary:
    """Sizes are descending over retained vertices; giant_index is set iff
    the largest component clears the threshold fraction of retained."""

    sizes: list[int]
    retained: int
    threshold: float
    giant_index: Optional[int]
    giant_fraction: float
    second_size: int
    diameter: Optional[DiameterEstimate] = None

    def to_json(self) -> dict:
        return {
            "sizes": self.sizes[:32],
            "component_count": len(self.sizes),
            "retained": self.retained,
            "threshold": self.threshold,
            "giant_index": self.giant_index,
            "giant_fraction": self.giant_fraction,
            "second_size": self.second_size,
            "diameter": None
            if self.diameter is None
            else {"value": self.diameter.value, "method": self.diameter.method},
        }


def _scatter_bulk(local: np.ndarray, free_coords: Sequence[int]) -> np.ndarray:
    """Vectorized scatter of packed local indices into global vertex masks."""
    out = np.zeros_like(local)
    for j, c in enumerate(free_coords):
        out |= ((local >> np.uint64(j)) & np.uint64(1)) << np.uint64(c - 1)
    return out


class ScopeGraph:
    """Percolated induced subgraph of one subcube scope."""

    def __init__(
        self,
        source: EdgeSource,
        scope: Optional[Subcube] = None,
        allowed: Optional[frozenset] = None,
    ):
        scope = scope or Subcube.full(source.d)
        if scope.dimension > SCOPE_DIM_CEILING:
            raise CapacityError(
                f"scope dimension {scope.dimension} above ceiling {SCOPE_DIM_CEILING}"
            )
        self.source = source
        self.scope = scope
        self.allowed = allowed
        self.n = scope.size
        self._free = scope.free_coords()
        if isinstance(source, PercolationSample):
            self._build_bulk(source)
        else:
            self._build_generic(source)
        self._labels: Optional[np.ndarray] = None
        self._component_sizes: Optional[np.ndarray] = None

    # -- construction -------------------------------------------------

    def _build_bulk(self, sample: PercolationSample) -> None:
        local = np.arange(self.n, dtype=np.uint64)
        glob = _scatter_bulk(local, self._free) | np.uint64(self.scope.base)
        self.global_ids = glob
        if sample.vertex_model is None:
            retained = np.ones(self.n, dtype=bool)
        else:
            u = vertex_uniforms_bulk(sample.seed, glob)
            retained = self._classify_bulk(sample, u)
        self.retained = retained
        rows = []
        cols = []
        for j, c in enumerate(self._free):
            bit = np.uint64(1 << (c - 1))
            lo = (glob & bit) == 0
            bases = glob[lo]
            pres = edge_uniforms_bulk(sample.seed, bases, c) < sample.p
            src = local[lo][pres]
            dst = src | np.uint64(1 << j)
            ok = retained[src.astype(np.int64)] & retained[dst.astype(np.int64)]
            rows.append(src[ok])
            cols.append(dst[ok])
        src = np.concatenate(rows).astype(np.int64) if rows else np.empty(0, np.int64)
        dst = np.concatenate(cols).astype(np.int64) if cols else np.empty(0, np.int64)
        self._finish_csr(src, dst)

    def _classify_bulk(self, sample: PercolationSample, u: np.ndarray) -> np.ndarray:
        from .sampling import KeepModel, TriPartition, VertexClass

        model = sample.vertex_model
        if isinstance(model, KeepModel):
            return u < model.q
        assert isinstance(model, TriPartition)
        if self.allowed is None:
            return np.ones(self.n, dtype=bool)
        retained = np.zeros(self.n, dtype=bool)
        if VertexClass.HOST in self.allowed:
            retained |= u < model.q_host
        if VertexClass.BRIDGE in self.allowed:
            retained |= (u >= model.q_host) & (u < model.q_host + model.q_bridge)
        if VertexClass.DETOUR in self.allowed:
            retained |= u >= model.q_host + model.q_bridge
        return retained

    def _build_generic(self, source: EdgeSource) -> None:
        local = np.arange(self.n, dtype=np.uint64)
        glob = _scatter_bulk(local, self._free) | np.uint64(self.scope.base)
        self.global_ids = glob
        retained = np.array(
            [source.vertex_allowed(int(g), self.allowed) for g in glob], dtype=bool
        )
        self.retained = retained
        src = []
        dst = []
        for j, c in enumerate(self._free):
            bit = 1 << (c - 1)
            for i in range(self.n):
                g = int(glob[i])
                if g & bit or not retained[i]:
                    continue
                k = i | (1 << j)
                if retained[k] and source.edge_present(Edge(g, c)):
                    src.append(i)
                    dst.append(k)
        self._finish_csr(np.array(src, np.int64), np.array(dst, np.int64))

    def _finish_csr(self, src: np.ndarray, dst: np.ndarray) -> None:
        data = np.ones(2 * len(src), dtype=np.int8)
        r = np.concatenate([src, dst])
        c = np.concatenate([dst, src])
        self.adj = sparse.csr_matrix(
            (data, (r, c)), shape=(self.n, self.n), dtype=np.int8
        )
        self.adj.sort_indices()  # deterministic neighbor order
        self.edge_count = int(len(src))

    # -- local/global mapping ------------------------------------------

    def local_of(self, v: int) -> int:
        return self.scope.local_index(v)

    def global_of(self, i: int) -> int:
        return int(self.global_ids[i])

    def neighbors_local(self, i: int) -> np.ndarray:
        return self.adj.indices[self.adj.indptr[i] : self.adj.indptr[i + 1]]

    @property
    def retained_count(self) -> int:
        return int(self.retained.sum())

    # -- components -----------------------------------------------------

    def component_labels(self) -> np.ndarray:
        """Label per local vertex; unretained vertices get label -1."""
        if self._labels is None:
            ncomp, raw = csgraph.connected_components(self.adj, directed=False)
            raw = raw.astype(np.int64)
            kept = raw[self.retained]
            out = np.full(self.n, -1, dtype=np.int64)
            if kept.size:
                # renumber retained labels by descending component size
                ids, counts = np.unique(kept, return_counts=True)
                order = np.argsort(-counts, kind="stable")
                lookup = np.full(ncomp, -1, dtype=np.int64)
                lookup[ids[order]] = np.arange(len(ids))
                out[self.retained] = lookup[kept]
                self._component_sizes = counts[order]
            else:
                self._component_sizes = np.empty(0, dtype=np.int64)
            self._labels = out
        return self._labels

    def summary(self, giant_threshold: float = 0.05) -> ComponentSummary:
        self.component_labels()
        sizes = [int(s) for s in self._component_sizes]
        retained = self.retained_count
        largest = sizes[0] if sizes else 0
        second = sizes[1] if len(sizes) > 1 else 0
        giant = 0 if retained and largest >= giant_threshold * retained else None
        return ComponentSummary(
            sizes=sizes,
            retained=retained,
            threshold=giant_threshold,
            giant_index=giant,
            giant_fraction=largest / retained if retained else 0.0,
            second_size=second,
        )

    def component_members(self, label: int) -> np.ndarray:
        return np.nonzero(self.component_labels() == label)[0]

    # -- traversal -------------------------------------------------------

    def bfs_distances(self, start_local: int) -> np.ndarray:
        dist = np.full(self.n, -1, dtype=np.int64)
        dist[start_local] = 0
        frontier = [start_local]
        indptr, indices = self.adj.indptr, self.adj.indices
        level = 0
        while frontier:
            level += 1
            nxt = []
            for v in frontier:
                for w in indices[indptr[v] : indptr[v + 1]]:
                    if dist[w] < 0:
                        dist[w] = level
                        nxt.append(int(w))
            frontier = nxt
        return dist

    def shortest_path_local(self, a: int, b: int) -> Optional[list[int]]:
        if a == b:
            return [a]
        prev = np.full(self.n, -1, dtype=np.int64)
        seen = np.zeros(self.n, dtype=bool)
        seen[a] = True
        frontier = [a]
        indptr, indices = self.adj.indptr, self.adj.indices
        while frontier:
            nxt = []
            for v in frontier:
                for w in indices[indptr[v] : indptr[v + 1]]:
                    if not seen[w]:
                        seen[w] = True
                        prev[w] = v
                        if w == b:
                            path = [int(w)]
                            while path[-1] != a:
                                path.append(int(prev[path[-1]]))
                            path.reverse()
                            return path
                        nxt.append(int(w))
            frontier = nxt
        return None

    def double_sweep(self, start_local: int) -> int:
        """Two BFS sweeps; a lower bound on the component's diameter."""
        d1 = self.bfs_distances(start_local)
        far = int(np.argmax(d1))
        d2 = self.bfs_distances(far)
        return int(d2.max())

    def exact_diameter(self, members: np.ndarray) -> int:
        if len(members) > EXACT_DIAMETER_CEILING:
            raise CapacityError("component too large for exact diameter")
        best = 0
        for v in members:
            dist = self.bfs_distances(int(v))
            best = max(best, int(dist[members].max()))
        return best

    def diameter(self, label: int, mode: str = "double_sweep") -> DiameterEstimate:
        members = self.component_members(label)
        if len(members) == 0:
            raise MembershipError(f"no component labelled {label}")
        if mode == "exact":
            return DiameterEstimate(self.exact_diameter(members), "exact")
        if mode == "double_sweep":
            return DiameterEstimate(self.double_sweep(int(members[0])), "double_sweep")
        raise ValueError(f"unknown diameter mode {mode!r}")

    # -- expansion --------------------------------------------------------

    def is_connected_set(self, locals_: Sequence[int]) -> bool:
        s = set(int(x) for x in locals_)
        if not s:
            return False
        start = next(iter(s))
        seen = {start}
        stack = [start]
        indptr, indices = self.adj.indptr, self.adj.indices
        while stack:
            v = stack.pop()
            for w in indices[indptr[v] : indptr[v + 1]]:
                w = int(w)
                if w in s and w not in seen:
                    seen.add(w)
                    stack.append(w)
        return len(seen) == len(s)

    def external_neighborhood(self, locals_: Sequence[int]) -> set[int]:
        s = set(int(x) for x in locals_)
        out: set[int] = set()
        indptr, indices = self.adj.indptr, self.adj.indices
        for v in s:
            for w in indices[indptr[v] : indptr[v + 1]]:
                w = int(w)
                if w not in s:
                    out.add(w)
        return out

    def grow_connected_set(self, rng, target_size: int) -> Optional[list[int]]:
        """Randomized BFS from a uniform retained vertex, stopped at the
        target size; None when the whole component is smaller."""
        retained_idx = np.nonzero(self.retained)[0]
        if len(retained_idx) == 0:
            return None
        start = int(retained_idx[rng.randrange(len(retained_idx))])
        seen = {start}
        frontier = [start]
        order = [start]
        indptr, indices = self.adj.indptr, self.adj.indices
        while frontier and len(order) < target_size:
            v = frontier.pop(rng.randrange(len(frontier)))
            nbrs = [int(w) for w in indices[indptr[v] : indptr[v + 1]]]
            rng.shuffle(nbrs)
            for w in nbrs:
                if w not in seen:
                    seen.add(w)
                    frontier.append(w)
                    order.append(w)
                    if len(order) >= target_size:
                        break
        if len(order) < target_size:
            return None
        return order


# ---------------------------------------------------------------------------
# module-level convenience wrappers


def components(
    source: EdgeSource,
    scope: Optional[Subcube] = None,
    allowed: Optional[frozenset] = None,
    giant_threshold: float = 0.05,
) -> tuple[ComponentSummary, ScopeGraph]:
    g = ScopeGraph(source, scope, allowed)
    return g.summary(giant_threshold), g


@dataclass(frozen=True)
class GiantInfo:
    label: int
    size: int
    gap_ratio: float  # largest/second; inf sentinel when second == 0


def giant_component(
    summary: ComponentSummary, threshold: Optional[float] = None
) -> Optional[GiantInfo]:
    thr = summary.threshold if threshold is None else threshold
    if not summary.sizes:
        return None
    largest = summary.sizes[0]
    if summary.retained == 0 or largest < thr * summary.retained:
        return None
    second = summary.second_size
    ratio = float("inf") if second == 0 else largest / second
    return GiantInfo(label=0, size=largest, gap_ratio=ratio)


def shortest_path(
    source: EdgeSource,
    scope: Optional[Subcube],
    allowed: Optional[frozenset],
    u: int,
    v: int,
) -> Optional[list[int]]:
    """BFS shortest path between retained vertices, as global vertex ids."""
    g = ScopeGraph(source, scope, allowed)
    a, b = g.local_of(u), g.local_of(v)
    if not (g.retained[a] and g.retained[b]):
        raise MembershipError("endpoint not retained in scope")
    path = g.shortest_path_local(a, b)
    if path is None:
        return None
    return [g.global_of(i) for i in path]


def expansion_ratio(
    source: EdgeSource,
    scope: Optional[Subcube],
    allowed: Optional[frozenset],
    vertex_set: Sequence[int],
) -> float:
    """|N(S)| / |S| for a connected vertex set S, with N(S) the external
    neighborhood in the percolated induced graph."""
    if not vertex_set:
        raise ValueError("S must be non-empty")
    g = ScopeGraph(source, scope, allowed)
    locals_ = [g.local_of(v) for v in vertex_set]
    for i in locals_:
        if not g.retained[i]:
            raise MembershipError("S contains an unretained vertex")
    if not g.is_connected_set(locals_):
        raise MembershipError("S must be connected in the percolated graph")
    return len(g.external_neighborhood(locals_)) / len(locals_)
