"""Exact combinatorial model of the d-dimensional binary hypercube.

Vertices are plain ints used as bit masks: coordinate ``i`` (1-based) lives
in bit ``i - 1``.  The string form writes coordinate 1 first, so
``parse_vertex("0110")`` has coordinates (0, 1, 1, 0) and equals the mask
``0b0110``.  Two vertices are adjacent iff their masks differ in exactly
one bit.

Subcubes are described by a mask of free coordinates plus fixed values for
the rest; oriented subcubes add a root vertex that defines layers (Hamming
distance from the root over the free coordinates).  All values here are
immutable and all functions are pure.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator

from .errors import MembershipError

# Vertex ids must fit comfortably in a machine word together with a 6-bit
# coordinate tag (see sampling.edge_key); memory for exact component walks
# runs out long before this does.
MAX_DIM = 32


def check_dim(d: int) -> int:
    if not 1 <= d <= MAX_DIM:
        raise ValueError(f"dimension must be in [1, {MAX_DIM}], got {d}")
    return d


def weight(v: int) -> int:
    """Number of 1-coordinates (Hamming weight)."""
    return v.bit_count()


def hamming(u: int, v: int) -> int:
    return (u ^ v).bit_count()


def adjacent(u: int, v: int) -> bool:
    return (u ^ v).bit_count() == 1


def coord_between(u: int, v: int) -> int:
    """The single 1-based coordinate where adjacent vertices differ."""
    x = u ^ v
    if x == 0 or x & (x - 1):
        raise MembershipError(f"vertices {u:#x} and {v:#x} are not adjacent")
    return x.bit_length()


def neighbors(v: int, d: int) -> list[int]:
    """All d vertices at Hamming distance 1 from v."""
    return [v ^ (1 << i) for i in range(d)]


def parse_vertex(s: str) -> int:
    """Parse a coordinate string, first character = coordinate 1."""
    v = 0
    for i, ch in enumerate(s):
        if ch == "1":
            v |= 1 << i
        elif ch != "0":
            raise ValueError(f"bad coordinate character {ch!r} in {s!r}")
    return v


def format_vertex(v: int, d: int) -> str:
    return "".join("1" if v >> i & 1 else "0" for i in range(d))


@dataclass(frozen=True)
class Edge:
    """Canonical edge id: the endpoint with a 0 at the flipped coordinate,
    plus the 1-based coordinate index."""

    base: int
    coord: int

    def __post_init__(self) -> None:
        if self.base >> (self.coord - 1) & 1:
            raise ValueError("edge base must have a 0 at the flipped coordinate")

    @classmethod
    def between(cls, u: int, v: int) -> "Edge":
        c = coord_between(u, v)
        return cls(base=u & ~(1 << (c - 1)), coord=c)

    @property
    def top(self) -> int:
        return self.base | 1 << (self.coord - 1)

    def endpoints(self) -> tuple[int, int]:
        return self.base, self.top


def scatter_bits(packed: int, mask: int) -> int:
    """Distribute the low bits of ``packed`` into the set positions of ``mask``."""
    out = 0
    i = 0
    m = mask
    while m:
        low = m & -m
        if packed >> i & 1:
            out |= low
        m ^= low
        i += 1
    return out


def gather_bits(v: int, mask: int) -> int:
    """Inverse of scatter_bits: collect the masked bits of v into the low bits."""
    out = 0
    i = 0
    m = mask
    while m:
        low = m & -m
        if v & low:
            out |= 1 << i
        m ^= low
        i += 1
    return out


def mask_coords(mask: int) -> list[int]:
    """1-based coordinate indices present in a bit mask, ascending."""
    out = []
    i = 1
    while mask:
        if mask & 1:
            out.append(i)
        mask >>= 1
        i += 1
    return out


@dataclass(frozen=True)
class Subcube:
    """A sub-hypercube of Q^d: free coordinates vary, fixed ones take the
    values recorded in ``base`` (base is canonical: 0 on free coordinates)."""

    d: int
    free_mask: int
    base: int

    def __post_init__(self) -> None:
        check_dim(self.d)
        full = (1 << self.d) - 1
        if self.free_mask & ~full or self.base & ~full:
            raise ValueError("free_mask/base outside ambient dimension")
        if self.base & self.free_mask:
            raise ValueError("base must be zero on free coordinates")

    @classmethod
    def full(cls, d: int) -> "Subcube":
        return cls(d=d, free_mask=(1 << d) - 1, base=0)

    @property
    def dimension(self) -> int:
        return self.free_mask.bit_count()

    @property
    def size(self) -> int:
        return 1 << self.dimension

    def contains(self, v: int) -> bool:
        return v & ~self.free_mask == self.base

    def require(self, v: int) -> None:
        if not self.contains(v):
            raise MembershipError(f"vertex {v:#x} is outside the subcube")

    def vertices(self) -> Iterator[int]:
        for packed in range(self.size):
            yield self.base | scatter_bits(packed, self.free_mask)

    def local_index(self, v: int) -> int:
        """Pack a member vertex into [0, 2^dimension)."""
        self.require(v)
        return gather_bits(v, self.free_mask)

    def vertex_at(self, local: int) -> int:
        return self.base | scatter_bits(local, self.free_mask)

    def free_coords(self) -> list[int]:
        return mask_coords(self.free_mask)

    def split(self, coord: int) -> tuple["Subcube", "Subcube"]:
        """Split on a free coordinate into the two disjoint halves; matched
        vertices (flip of ``coord``) form a perfect matching between them."""
        bit = 1 << (coord - 1)
        if not self.free_mask & bit:
            raise MembershipError(f"coordinate {coord} is not free")
        rest = self.free_mask ^ bit
        return (
            Subcube(self.d, rest, self.base),
            Subcube(self.d, rest, self.base | bit),
        )

    def fix_coords(self, assignment_mask: int, values: int) -> "Subcube":
        """Fix a subset of free coordinates (given as a mask) to values."""
        if assignment_mask & ~self.free_mask:
            raise MembershipError("can only fix free coordinates")
        return Subcube(
            self.d,
            self.free_mask ^ assignment_mask,
            self.base | (values & assignment_mask),
        )


@dataclass(frozen=True)
class OrientedSubcube:
    """A subcube plus a root member; layer(v) counts free coordinates where
    v differs from the root, so the root is layer 0 and its antipode (within
    the subcube) is the unique vertex on the top layer."""

    cube: Subcube
    root: int

    def __post_init__(self) -> None:
        self.cube.require(self.root)

    @property
    def dimension(self) -> int:
        return self.cube.dimension

    @property
    def antipode(self) -> int:
        return self.root ^ self.cube.free_mask

    def layer_of(self, v: int) -> int:
        self.cube.require(v)
        return ((v ^ self.root) & self.cube.free_mask).bit_count()

    def up_coords(self, v: int) -> list[int]:
        """Free coordinates whose flip moves v one layer away from the root."""
        same = ~(v ^ self.root) & self.cube.free_mask
        return mask_coords(same)


def layer_of(s: OrientedSubcube, v: int) -> int:
    return s.layer_of(v)


def split_subcube(s: Subcube, coord: int) -> tuple[Subcube, Subcube]:
    return s.split(coord)


def subcube_through(u: int, w: int, within: Subcube) -> OrientedSubcube:
    """The unique subcube of ``within`` whose free coordinates are exactly
    those where u and w differ, rooted at u.  Its dimension is the Hamming
    distance between u and w, and w sits alone on the top layer."""
    within.require(u)
    within.require(w)
    diff = u ^ w
    return OrientedSubcube(Subcube(within.d, diff, u & ~diff), root=u)


def four_cycle_partners(u: int, v: int, d: int) -> list[tuple[int, int]]:
    """For an edge uv, the d-1 pairs (u', v') such that u, v, v', u' in this
    cyclic order trace a 4-cycle: flip any coordinate other than the edge's."""
    c = coord_between(u, v)
    out = []
    for i in range(d):
        if i != c - 1:
            bit = 1 << i
            out.append((u ^ bit, v ^ bit))
    return out


def gray_cycle(scope: Subcube) -> list[int]:
    """A Hamiltonian cycle of the subcube via the reflected binary code.
    Requires dimension >= 2 (a 2^k-cycle needs k >= 2)."""
    k = scope.dimension
    if k < 2:
        raise ValueError("need dimension >= 2 for a cycle")
    out = []
    for i in range(1 << k):
        out.append(scope.vertex_at(i ^ (i >> 1)))
    return out


def random_vertex(scope: Subcube, rng) -> int:
    return scope.vertex_at(rng.randrange(scope.size))
