"""Seed-deterministic percolation samples.

Edge and vertex states are pure functions of (seed, element id), realized
by a counter-based keyed hash, so querying in any order - or never - gives
the same sample, and the whole object stays immutable.  One uniform value
per edge couples all retention probabilities: the edge is present at
probability p exactly when its value is below p, so edge sets are nested
in p for a fixed seed.

The hash is fixed for bit-exact reproducibility of published seeds:

    mix(x):  x ^= x >> 30;  x *= 0xBF58476D1CE4E5B9   (mod 2^64)
             x ^= x >> 27;  x *= 0x94D049BB133111EB   (mod 2^64)
             x ^= x >> 31
    value(seed, tag, key) = mix(mix(seed ^ tag) + key * 0x9E3779B97F4A7C15)
    uniform = value / 2^64

Edge keys pack the canonical edge id as (base << 6) | coord; vertex keys
are the vertex mask.  Edges and vertices use distinct domain tags, i.e.
independent hash streams.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import IntEnum
from typing import Iterable, Optional, Protocol, Union

import numpy as np

from .cube import Edge, Subcube, check_dim
from .errors import MembershipError

_M64 = (1 << 64) - 1
_GAMMA = 0x9E3779B97F4A7C15
_EDGE_TAG = 0x45444745AA17C3B5  # "EDGE" prefixed constant
_VERTEX_TAG = 0x564552541D8F0E63  # "VERT" prefixed constant

TWO64 = 2.0**64


def mix64(x: int) -> int:
    x &= _M64
    x ^= x >> 30
    x = (x * 0xBF58476D1CE4E5B9) & _M64
    x ^= x >> 27
    x = (x * 0x94D049BB133111EB) & _M64
    x ^= x >> 31
    return x


def stream_value(seed: int, tag: int, key: int) -> int:
    return mix64(mix64(seed ^ tag) + key * _GAMMA)


def edge_key(e: Edge) -> int:
    return (e.base << 6) | e.coord


def derive_seed(*parts: Union[int, str]) -> int:
    """Fold arbitrary labels into a child seed (for internal tie-breaking
    randomness; never used for edge/vertex states)."""
    h = 0x5EED5EED5EED5EED
    for p in parts:
        if isinstance(p, str):
            for b in p.encode():
                h = mix64(h ^ b)
        else:
            h = mix64(h ^ (p & _M64))
    return h


# ---------------------------------------------------------------------------
# numpy bulk path: identical formula on uint64 arrays


_NP_M1 = np.uint64(0xBF58476D1CE4E5B9)
_NP_M2 = np.uint64(0x94D049BB133111EB)
_NP_GAMMA = np.uint64(_GAMMA)


def _np_mix64(x: np.ndarray) -> np.ndarray:
    x = x.astype(np.uint64, copy=True)
    x ^= x >> np.uint64(30)
    x *= _NP_M1
    x ^= x >> np.uint64(27)
    x *= _NP_M2
    x ^= x >> np.uint64(31)
    return x


def stream_values_bulk(seed: int, tag: int, keys: np.ndarray) -> np.ndarray:
    """uint64 hash values for many keys at once; matches stream_value."""
    seeded = np.uint64(mix64(seed ^ tag))
    with np.errstate(over="ignore"):
        x = keys.astype(np.uint64) * _NP_GAMMA
        x += seeded
        return _np_mix64(x)


def stream_values_bulk_seeds(
    seeds: np.ndarray, tag: int, keys: np.ndarray
) -> np.ndarray:
    """Like stream_values_bulk but with one (seed, key) pair per element."""
    with np.errstate(over="ignore"):
        seeded = _np_mix64(seeds.astype(np.uint64) ^ np.uint64(tag))
        x = keys.astype(np.uint64) * _NP_GAMMA
        x += seeded
        return _np_mix64(x)


def edge_uniforms_bulk_seeds(
    seeds: np.ndarray, bases: np.ndarray, coords: np.ndarray
) -> np.ndarray:
    keys = (bases.astype(np.uint64) << np.uint64(6)) | coords.astype(np.uint64)
    return stream_values_bulk_seeds(seeds, _EDGE_TAG, keys) / TWO64


def edge_uniforms_bulk(seed: int, bases: np.ndarray, coord: int) -> np.ndarray:
    keys = (bases.astype(np.uint64) << np.uint64(6)) | np.uint64(coord)
    return stream_values_bulk(seed, _EDGE_TAG, keys) / TWO64


def vertex_uniforms_bulk(seed: int, verts: np.ndarray) -> np.ndarray:
    return stream_values_bulk(seed, _VERTEX_TAG, verts) / TWO64


# ---------------------------------------------------------------------------
# vertex models


class VertexClass(IntEnum):
    """Tri-partition roles: HOST carries the backbone cycle, BRIDGE supplies
    the connector component, DETOUR supplies 4-cycle padding vertices."""

    HOST = 1
    BRIDGE = 2
    DETOUR = 3


@dataclass(frozen=True)
class KeepModel:
    """Retain each vertex independently with probability q (kept vertices
    report class HOST, removed ones report None)."""

    q: float

    def classify(self, u: float) -> Optional[VertexClass]:
        return VertexClass.HOST if u < self.q else None

    def to_json(self):
        return {"keep": self.q}


@dataclass(frozen=True)
class TriPartition:
    """Assign each vertex independently to one of three classes."""

    q_host: float
    q_bridge: float
    q_detour: float

    def __post_init__(self) -> None:
        if abs(self.q_host + self.q_bridge + self.q_detour - 1.0) > 1e-9:
            raise ValueError("tri-partition probabilities must sum to 1")

    @classmethod
    def for_epsilon(cls, epsilon: float) -> "TriPartition":
        delta = delta_for_epsilon(epsilon)
        return cls(1.0 - delta / 2.0, delta / 4.0, delta / 4.0)

    def classify(self, u: float) -> VertexClass:
        if u < self.q_host:
            return VertexClass.HOST
        if u < self.q_host + self.q_bridge:
            return VertexClass.BRIDGE
        return VertexClass.DETOUR

    def to_json(self):
        return {"tri": [self.q_host, self.q_bridge, self.q_detour]}


VertexModel = Union[KeepModel, TriPartition]


def delta_for_epsilon(epsilon: float) -> float:
    """The partition parameter with (1 - delta)(1 - delta/2) = 1 - epsilon.

    Closed form of the quadratic, checked to 1e-12.
    """
    if not 0.0 <= epsilon <= 1.0:
        raise ValueError("epsilon must be in [0, 1]")
    delta = (3.0 - math.sqrt(9.0 - 8.0 * epsilon)) / 2.0
    assert abs((1.0 - delta) * (1.0 - delta / 2.0) - (1.0 - epsilon)) < 1e-12
    return delta


# ---------------------------------------------------------------------------
# samples


class EdgeSource(Protocol):
    """Anything the graph algorithms can percolate over: a hashed sample or
    an explicit fixture instance."""

    d: int

    def edge_present(self, e: Edge) -> bool: ...

    def vertex_allowed(self, v: int, allowed: Optional[frozenset]) -> bool: ...


@dataclass(frozen=True)
class PercolationSample:
    """Bond percolation on Q^d at probability p, optionally combined with a
    vertex model, all determined by the seed."""

    seed: int
    d: int
    p: float
    vertex_model: Optional[VertexModel] = None

    def __post_init__(self) -> None:
        check_dim(self.d)
        if not 0.0 <= self.p <= 1.0:
            raise ValueError("p must be in [0, 1]")

    def _check_edge(self, e: Edge) -> None:
        limit = 1 << self.d
        if e.coord > self.d or e.base >= limit:
            raise MembershipError(f"edge {e} is not an edge of Q^{self.d}")

    def edge_coupling_value(self, e: Edge) -> float:
        self._check_edge(e)
        return stream_value(self.seed, _EDGE_TAG, edge_key(e)) / TWO64

    def edge_present(self, e: Edge) -> bool:
        return self.edge_coupling_value(e) < self.p

    def edge_present_fast(self, base: int, coord: int) -> bool:
        """Hot-path presence check without constructing an Edge."""
        return (
            stream_value(self.seed, _EDGE_TAG, (base << 6) | coord) / TWO64
            < self.p
        )

    def vertex_class(self, v: int) -> Optional[VertexClass]:
        if self.vertex_model is None:
            raise ValueError("sample has no vertex model")
        u = stream_value(self.seed, _VERTEX_TAG, v) / TWO64
        return self.vertex_model.classify(u)

    def vertex_allowed(self, v: int, allowed: Optional[frozenset] = None) -> bool:
        """Is v retained, and (when given) in one of the allowed classes?

        Without a vertex model every vertex is allowed.
        """
        if self.vertex_model is None:
            return True
        cls = self.vertex_class(v)
        if cls is None:
            return False
        return allowed is None or cls in allowed

    def induced_edge_present(
        self, e: Edge, allowed: Optional[frozenset] = None
    ) -> bool:
        u, v = e.endpoints()
        return (
            self.vertex_allowed(u, allowed)
            and self.vertex_allowed(v, allowed)
            and self.edge_present(e)
        )

    def with_p(self, p: float) -> "PercolationSample":
        """Same seed (hence coupled edge values) at another probability."""
        return PercolationSample(self.seed, self.d, p, self.vertex_model)

    def to_json(self) -> dict:
        model = None if self.vertex_model is None else self.vertex_model.to_json()
        return {"seed": self.seed, "d": self.d, "p": self.p, "vertex_model": model}

    @classmethod
    def from_json(cls, obj: dict) -> "PercolationSample":
        model = obj.get("vertex_model")
        parsed: Optional[VertexModel] = None
        if model is not None:
            if "keep" in model:
                parsed = KeepModel(model["keep"])
            elif "tri" in model:
                parsed = TriPartition(*model["tri"])
            else:
                raise ValueError(f"unknown vertex model {model!r}")
        return cls(obj["seed"], obj["d"], obj["p"], parsed)


class ExplicitInstance:
    """A concrete percolated instance given by an edge list; used for repo
    fixtures and oracle inputs.  Every vertex is retained.

    File format: comment lines start with '#'; the first data line is the
    dimension; each following line is one canonical edge,
    "<base-as-coordinate-string> <coord>".
    """

    def __init__(self, d: int, edges: Iterable[Edge]):
        check_dim(d)
        self.d = d
        self.edges = frozenset(edges)
        for e in self.edges:
            if e.coord > d or e.base >> d:
                raise MembershipError(f"edge {e} outside Q^{d}")

    @classmethod
    def full_cube(cls, d: int) -> "ExplicitInstance":
        edges = []
        for c in range(1, d + 1):
            bit = 1 << (c - 1)
            for v in range(1 << d):
                if not v & bit:
                    edges.append(Edge(v, c))
        return cls(d, edges)

    @classmethod
    def from_sample(
        cls,
        sample: PercolationSample,
        scope: Optional[Subcube] = None,
        allowed: Optional[frozenset] = None,
    ) -> "ExplicitInstance":
        scope = scope or Subcube.full(sample.d)
        edges = []
        for v in scope.vertices():
            if not sample.vertex_allowed(v, allowed):
                continue
            for c in scope.free_coords():
                bit = 1 << (c - 1)
                if v & bit:
                    continue
                w = v | bit
                if sample.vertex_allowed(w, allowed) and sample.edge_present(
                    Edge(v, c)
                ):
                    edges.append(Edge(v, c))
        return cls(sample.d, edges)

    def edge_present(self, e: Edge) -> bool:
        return e in self.edges

    def vertex_allowed(self, v: int, allowed: Optional[frozenset] = None) -> bool:
        return True

    def dump(self) -> str:
        from .cube import format_vertex

        lines = [str(self.d)]
        for e in sorted(self.edges, key=lambda e: (e.base, e.coord)):
            lines.append(f"{format_vertex(e.base, self.d)} {e.coord}")
        return "\n".join(lines) + "\n"

    @classmethod
    def parse(cls, text: str) -> "ExplicitInstance":
        from .cube import parse_vertex

        d = None
        edges = []
        for raw in text.splitlines():
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if d is None:
                d = int(line)
                continue
            bits, coord = line.split()
            edges.append(Edge(parse_vertex(bits), int(coord)))
        if d is None:
            raise ValueError("instance text has no dimension line")
        return cls(d, edges)
