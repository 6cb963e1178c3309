"""Constructive cycle builders over percolated hypercubes.

Four regimes cover the even lengths, dispatched by target:

* very_short - partition the scope into small subcubes, close a cycle out
  of two maximal monotone paths joined by a matching edge at each end.
* short - grow a seed cycle through a doubling chain of ambient subcubes;
  each stage replaces chosen cycle edges by longer detours through
  orthogonal gadget cubes, adding an exactly planned amount.
* medium - cut a long path out of a heuristic backbone cycle in one
  quadrant, bridge its endpoints through a neighbouring quadrant, then pad
  to the exact target with length-3 edge detours.
* long - on a tri-partitioned vertex set: backbone cycle among HOST
  vertices, a window-to-window shortcut through the BRIDGE giant
  component, exact padding with 4-cycle detours into DETOUR vertices.

Builders may fail (None) but never emit an invalid witness; everything
returned revalidates against the sample.  All randomness used for internal
tie-breaking derives deterministically from the sample seed.
"""

from __future__ import annotations

import hashlib
import itertools
import math
import random
import time
from dataclasses import dataclass, field
from typing import Optional, Sequence

from .cube import (
    Edge,
    OrientedSubcube,
    Subcube,
    adjacent,
    coord_between,
    four_cycle_partners,
    neighbors,
    scatter_bits,
    subcube_through,
)
from .errors import CapacityError, PlanError
from .graphs import SCOPE_DIM_CEILING, ScopeGraph
from .longcycle import LongCycleResult, find_long_cycle
from .monotone import exists_maximal_monotone_path
from .oracle import validate_cycle
from .sampling import TriPartition, VertexClass, derive_seed

VERY_SHORT = "very_short"
SHORT = "short"
MEDIUM = "medium"
LONG = "long"
REGIMES = (VERY_SHORT, SHORT, MEDIUM, LONG)


# ---------------------------------------------------------------------------
# cycles


@dataclass(frozen=True)
class Cycle:
    """A cycle as a canonicalized tuple of vertices (rotation starts at the
    smallest vertex, direction towards its smaller neighbour)."""

    d: int
    vertices: tuple[int, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "vertices", _canonical(self.vertices))

    @property
    def length(self) -> int:
        return len(self.vertices)

    def digest(self) -> str:
        h = hashlib.sha256()
        h.update(self.d.to_bytes(2, "little"))
        for v in self.vertices:
            h.update(v.to_bytes(8, "little"))
        return h.hexdigest()[:16]

    def check_basic(self) -> None:
        n = len(self.vertices)
        assert n >= 4 and n % 2 == 0, "cycle length must be even and >= 4"
        assert len(set(self.vertices)) == n, "cycle vertices must be distinct"
        for i in range(n):
            assert adjacent(self.vertices[i], self.vertices[(i + 1) % n])


def _canonical(vertices: Sequence[int]) -> tuple[int, ...]:
    verts = list(vertices)
    n = len(verts)
    i = min(range(n), key=lambda j: verts[j])
    nxt, prv = verts[(i + 1) % n], verts[(i - 1) % n]
    if prv < nxt:
        rotated = [verts[(i - j) % n] for j in range(n)]
    else:
        rotated = [verts[(i + j) % n] for j in range(n)]
    return tuple(rotated)


# ---------------------------------------------------------------------------
# configuration


def _even_floor(x: float) -> int:
    v = int(math.floor(x))
    return v if v % 2 == 0 else v - 1


@dataclass
class BuilderConfig:
    """Targets, gadget arithmetic and budgets for one dimension d.

    The asymptotic constants behind the construction assume enormous d;
    the "small-d" profile keeps their shapes with floors/caps that stay
    meaningful at desk scale, while "paper" keeps the literal expressions
    (exact plan arithmetic at large D, hopeless as build targets on a
    laptop).
    """

    d: int
    epsilon: float = 0.5
    profile: str = "small-d"
    retries: int = 16
    # short-regime chain and gadget arithmetic
    seed_dim_max: int = 12
    unit_divisor: int = 4
    unit_size_cap: int = 8
    unit_count_denom: int = 2
    crossing_budget: int = 4096
    crossing_attempts: int = 4
    # medium regime
    path_candidates: Optional[int] = None
    medium_pad_cap: Optional[int] = None
    medium_core_fraction: float = 0.35
    cell_component_min: Optional[int] = None
    # long regime
    long_window: Optional[int] = None
    bridge_component_min: Optional[int] = None
    long_core_fraction: Optional[float] = None
    # heuristic + search budgets
    heuristic_restarts: int = 6
    heuristic_rotation_budget: Optional[int] = None
    monotone_ceiling: int = 20
    giant_threshold: float = 0.05
    # regime boundaries (filled by constructors when None)
    very_short_max: Optional[int] = None
    short_max: Optional[int] = None
    medium_max: Optional[int] = None
    long_max: Optional[int] = None
    delta: float = field(init=False, default=0.0)

    def __post_init__(self) -> None:
        from .sampling import delta_for_epsilon

        object.__setattr__(self, "delta", delta_for_epsilon(self.epsilon))
        d = self.d
        if self.profile == "paper":
            if self.very_short_max is None:
                self.very_short_max = max(4, _even_floor(d / 5))
            if self.short_max is None:
                self.short_max = max(self.very_short_max, min(d**10, 2**d))
            if self.medium_max is None:
                self.medium_max = max(self.short_max, 2 ** max(d - 4, 2))
        else:
            if self.very_short_max is None:
                self.very_short_max = max(4, _even_floor(d))
            if self.short_max is None:
                self.short_max = max(self.very_short_max, self.short_reach())
            if self.medium_max is None:
                self.medium_max = max(self.short_max, 2 ** max(d - 4, 2))
        if self.long_max is None:
            self.long_max = max(
                self.medium_max, _even_floor((1.0 - self.epsilon) * 2**d)
            )
        if self.medium_pad_cap is None:
            self.medium_pad_cap = d * d
        if self.path_candidates is None:
            self.path_candidates = min(d * d, 64)
        if self.long_core_fraction is None:
            # serving targets up to (1-eps)2^d needs this fraction of the
            # retained HOST vertices, whose share is (1 - delta/2)
            self.long_core_fraction = min(0.95, 1.0 - self.delta)

    # -- profile constructors ------------------------------------------

    @classmethod
    def small_d(cls, d: int, epsilon: float = 0.5, **overrides) -> "BuilderConfig":
        return cls(d=d, epsilon=epsilon, profile="small-d", **overrides)

    @classmethod
    def paper(cls, d: int, epsilon: float = 0.5, **overrides) -> "BuilderConfig":
        overrides.setdefault("unit_divisor", 32)
        overrides.setdefault("unit_size_cap", 1 << 30)
        overrides.setdefault("unit_count_denom", 16)
        overrides.setdefault("crossing_attempts", 1)
        overrides.setdefault("seed_dim_max", max(16, d // 32))
        return cls(d=d, epsilon=epsilon, profile="paper", **overrides)

    # -- gadget arithmetic ----------------------------------------------

    def unit_size(self, ambient_dim: int) -> int:
        if self.profile == "paper":
            return ambient_dim // 32
        return max(1, min(ambient_dim // self.unit_divisor, self.unit_size_cap,
                          ambient_dim // 2))

    def remainder_band(self, ambient_dim: int) -> tuple[int, int]:
        if self.profile == "paper":
            return ambient_dim // 64, 3 * ambient_dim // 64
        lo = max(1, ambient_dim // 64)
        hi = min(lo + self.unit_size(ambient_dim), ambient_dim // 2)
        return lo, hi

    def unit_cap(self, cycle_edges: int) -> int:
        return max(0, cycle_edges // self.unit_count_denom)

    # -- short-regime chain ----------------------------------------------

    def stage_chain(self) -> list[int]:
        """Subcube dimensions for staged growth: seed, 2*seed, ..., <= d."""
        d = self.d
        if d < 4:
            return []
        for m in range(1, d.bit_length()):
            s = d >> m
            if s <= self.seed_dim_max:
                if s < 2:
                    return []
                return [s << j for j in range(m + 1)]
        return []

    def short_reach(self) -> int:
        """Largest target the staged scheme can plan for (arithmetic only)."""
        chain = self.stage_chain()
        if len(chain) < 2:
            return self.very_short_max or 4
        length = 2 * chain[0]
        for dim in chain[1:]:
            cycle_edges = length // 2
            k1 = self.unit_size(dim)
            lo, hi = self.remainder_band(dim)
            if k1 < 1 or lo > hi:
                continue
            tcap = min(self.unit_cap(cycle_edges), cycle_edges // 2)
            length += 2 * (tcap * k1 + hi)
        return _even_floor(length)


# ---------------------------------------------------------------------------
# gadget plans


@dataclass(frozen=True)
class GadgetPlan:
    """Decomposition of a cycle extension: the cycle grows by
    2 * (unit_count * unit_size + remainder_size) edges."""

    extension: int
    unit_size: int
    unit_count: int
    remainder_size: int

    def __post_init__(self) -> None:
        if self.extension != self.unit_count * self.unit_size + self.remainder_size:
            raise PlanError("inconsistent gadget plan")


def make_gadget_plan(
    extension: int, ambient_dim: int, cycle_edges: int, cfg: BuilderConfig
) -> GadgetPlan:
    """Pick unit_count and remainder within the configured bands, or raise
    PlanError when the extension is not representable."""
    if extension < 0:
        raise PlanError("extension must be >= 0")
    if extension == 0:
        return GadgetPlan(0, max(1, cfg.unit_size(ambient_dim)), 0, 0)
    unit = cfg.unit_size(ambient_dim)
    if unit < 1:
        raise PlanError(f"no unit gadget size for ambient dimension {ambient_dim}")
    lo, hi = cfg.remainder_band(ambient_dim)
    hi = min(hi, ambient_dim // 2)
    if lo > hi:
        raise PlanError("empty remainder band")
    tmax = min(cfg.unit_cap(cycle_edges), cycle_edges // 2, extension // unit)
    for t in range(tmax, -1, -1):
        rem = extension - t * unit
        if rem == 0 and t > 0:
            continue  # remainder must land in its band; try one fewer unit
        if lo <= rem <= hi:
            return GadgetPlan(extension, unit, t, rem)
    raise PlanError(
        f"extension {extension} not representable with unit {unit}, "
        f"band [{lo}, {hi}], cap {tmax}"
    )


# ---------------------------------------------------------------------------
# very short cycles


def build_very_short(
    sample,
    scope: Subcube,
    target: int,
    allowed: Optional[frozenset] = None,
    monotone_ceiling: int = 20,
) -> Optional[Cycle]:
    """Cycle of the exact target length out of two monotone paths and two
    matching edges, tried copy by copy over a partition of the scope."""
    _check_target(target)
    half_len = (target - 2) // 2  # monotone path length in each half
    inner_dim = half_len + 1
    if inner_dim > scope.dimension:
        raise ValueError(
            f"target {target} needs a {inner_dim}-dimensional copy inside the scope"
        )
    free = scope.free_coords()
    inner_coords = free[:inner_dim]
    outer_coords = free[inner_dim:]
    split = inner_coords[-1]
    split_bit = 1 << (split - 1)
    inner_mask = 0
    for c in inner_coords:
        inner_mask |= 1 << (c - 1)
    lower_mask = inner_mask ^ split_bit
    outer_mask = 0
    for c in outer_coords:
        outer_mask |= 1 << (c - 1)

    for assign in range(1 << len(outer_coords)):
        base = scope.base | scatter_bits(assign, outer_mask)
        root0 = base
        root1 = base | split_bit
        top0 = base | lower_mask
        if not sample.edge_present(Edge(root0, split)):
            continue
        if not sample.edge_present(Edge(top0, split)):
            continue
        h0 = OrientedSubcube(Subcube(scope.d, lower_mask, root0), root0)
        p0 = exists_maximal_monotone_path(sample, h0, allowed, monotone_ceiling)
        if p0 is None:
            continue
        h1 = OrientedSubcube(Subcube(scope.d, lower_mask, root1), root1)
        p1 = exists_maximal_monotone_path(sample, h1, allowed, monotone_ceiling)
        if p1 is None:
            continue
        verts = list(p0.vertices) + list(reversed(p1.vertices))
        return Cycle(scope.d, tuple(verts))
    return None


def _check_target(target: int) -> None:
    if target < 4 or target % 2:
        raise ValueError(f"cycle targets must be even and >= 4, got {target}")


# ---------------------------------------------------------------------------
# the inductive extension step


@dataclass
class _Gadget:
    edge_pos: int  # index i: the cycle edge (verts[i], verts[i+1 mod n])
    replacement: list[int]  # full path between the edge endpoints


def extend_cycle(
    sample,
    half: Subcube,
    cycle: Cycle,
    target: int,
    ambient: Subcube,
    cfg: BuilderConfig,
    rng: Optional[random.Random] = None,
    allowed: Optional[frozenset] = None,
) -> Optional[Cycle]:
    """Grow a cycle living in the lower half of the ambient subcube to the
    exact target length by splicing gadget detours through the upper
    coordinates.  Gadget cubes are pairwise disjoint (asserted)."""
    _check_target(target)
    if target < cycle.length:
        raise ValueError("target below current length")
    D = ambient.dimension
    free = ambient.free_coords()
    if 2 * half.dimension != D or half.free_coords() != free[: D // 2]:
        raise ValueError("half must fix the upper half of the ambient coordinates")
    if half.base != ambient.base:
        raise ValueError("half and ambient must agree on fixed coordinates")
    if target == cycle.length:
        return cycle

    upper_coords = free[D // 2 :]
    upper_mask = 0
    for c in upper_coords:
        upper_mask |= 1 << (c - 1)

    extension = (target - cycle.length) // 2
    n = cycle.length
    cycle_edges = n // 2
    plan = make_gadget_plan(extension, D, cycle_edges, cfg)
    verts = list(cycle.vertices)
    for v in verts:
        half.require(v)
    rng = rng or random.Random(derive_seed(sample.seed, "extend", target, D))

    for attempt in range(cfg.retries):
        offset = attempt % 2
        order = list(range(cycle_edges))
        if attempt:
            rng.shuffle(order)
        first, second = order[: cycle_edges // 2], order[cycle_edges // 2 :]
        gadgets: list[_Gadget] = []
        ok = True
        for i in first:
            if len(gadgets) == plan.unit_count:
                break
            g = _try_gadget(
                sample, verts, (2 * i + offset) % n, plan.unit_size,
                upper_coords, upper_mask, cfg, allowed,
            )
            if g is not None:
                gadgets.append(g)
        if len(gadgets) < plan.unit_count:
            continue
        if plan.remainder_size > 0:
            rem = None
            for i in second:
                rem = _try_gadget(
                    sample, verts, (2 * i + offset) % n, plan.remainder_size,
                    upper_coords, upper_mask, cfg, allowed,
                )
                if rem is not None:
                    break
            if rem is None:
                continue
            gadgets.append(rem)
        _assert_disjoint_gadgets(gadgets, verts)
        out: list[int] = []
        repl = {g.edge_pos: g.replacement for g in gadgets}
        for j in range(n):
            out.append(verts[j])
            r = repl.get(j)
            if r is not None:
                out.extend(r[1:-1])
        result = Cycle(ambient.d, tuple(out))
        assert result.length == target
        return result
    return None


def _try_gadget(
    sample,
    verts: list[int],
    pos: int,
    size: int,
    upper_coords: list[int],
    upper_mask: int,
    cfg: BuilderConfig,
    allowed: Optional[frozenset],
) -> Optional[_Gadget]:
    """Build one detour of 2*size+1 edges replacing the cycle edge at pos:
    monotone path out to the size-th layer above one endpoint, a crossing
    edge, and a monotone path back down to the other endpoint."""
    if size > len(upper_coords):
        return None
    n = len(verts)
    u, u2 = verts[pos], verts[(pos + 1) % n]
    c = coord_between(u, u2)
    cbit = 1 << (c - 1)
    r_u = Subcube(sample.d, upper_mask, u)
    r_u2 = Subcube(sample.d, upper_mask, u2)
    # present crossing edges in lexicographic layer order; the paper profile
    # commits to the first one, small-d may try a few
    scanned = 0
    attempts = 0
    for comb in itertools.combinations(upper_coords, size):
        scanned += 1
        if scanned > cfg.crossing_budget or attempts >= cfg.crossing_attempts:
            break
        m = 0
        for cc in comb:
            m |= 1 << (cc - 1)
        w = u ^ m
        w2 = w ^ cbit
        if not sample.edge_present_fast(w & ~cbit, c):
            continue
        if not (
            sample.vertex_allowed(w, allowed)
            and sample.vertex_allowed(w2, allowed)
        ):
            continue
        attempts += 1
        p0 = exists_maximal_monotone_path(
            sample, subcube_through(u, w, r_u), allowed, cfg.monotone_ceiling
        )
        if p0 is None:
            continue
        p1 = exists_maximal_monotone_path(
            sample, subcube_through(u2, w2, r_u2), allowed, cfg.monotone_ceiling
        )
        if p1 is None:
            continue
        replacement = list(p0.vertices) + list(reversed(p1.vertices))
        return _Gadget(edge_pos=pos, replacement=replacement)
    return None


def _assert_disjoint_gadgets(gadgets: list[_Gadget], verts: list[int]) -> None:
    on_cycle = set(verts)
    seen: set[int] = set()
    for g in gadgets:
        interior = set(g.replacement[1:-1])
        assert not interior & on_cycle, "gadget interior touches the cycle"
        assert not interior & seen, "gadget cubes must be pairwise disjoint"
        seen |= interior


# ---------------------------------------------------------------------------
# short cycles: staged growth


def plan_stage_increments(
    target: int, chain: list[int], cfg: BuilderConfig
) -> Optional[tuple[int, list[int]]]:
    """Choose a seed length and per-stage extensions summing to the target,
    deferring growth to the widest stages.  None when out of reach."""
    max_seed = 2 * chain[0]
    for seed_len in range(4, min(max_seed, target) + 1, 2):
        incs = _assign_increments(seed_len, target, chain, cfg)
        if incs is not None:
            return seed_len, incs
    return None


def _stage_caps(chain: list[int], cfg: BuilderConfig, length: int, j: int) -> int:
    """Largest extension plannable at stage j when entering at `length`."""
    dim = chain[j]
    cycle_edges = length // 2
    unit = cfg.unit_size(dim)
    lo, hi = cfg.remainder_band(dim)
    hi = min(hi, dim // 2)
    if unit < 1 or lo > hi:
        return 0
    tcap = min(cfg.unit_cap(cycle_edges), cycle_edges // 2)
    return tcap * unit + hi


def _assign_increments(
    seed_len: int, target: int, chain: list[int], cfg: BuilderConfig
) -> Optional[list[int]]:
    deficit = (target - seed_len) // 2
    if deficit < 0:
        return None
    m = len(chain) - 1

    def future_max(j: int, length: int) -> int:
        total = 0
        cur = length
        for i in range(j, m + 1):
            cap = _stage_caps(chain, cfg, cur, i)
            total += cap
            cur += 2 * cap
        return total

    incs: list[int] = []
    cur = seed_len
    rem = deficit
    for j in range(1, m + 1):
        dim = chain[j]
        lo, _hi = cfg.remainder_band(dim)
        cap = _stage_caps(chain, cfg, cur, j)
        chosen = None
        for k in itertools.chain((0,), range(max(1, lo), cap + 1)):
            if k > rem:
                break
            if rem - k <= future_max(j + 1, cur + 2 * k):
                try:
                    if k:
                        make_gadget_plan(k, dim, cur // 2, cfg)
                    chosen = k
                    break
                except PlanError:
                    continue
        if chosen is None:
            return None
        incs.append(chosen)
        rem -= chosen
        cur += 2 * chosen
    if rem != 0:
        return None
    return incs


def build_short(
    sample,
    target: int,
    cfg: BuilderConfig,
    rng: Optional[random.Random] = None,
    allowed: Optional[frozenset] = None,
) -> Optional[Cycle]:
    """Seed a cycle in the smallest chain subcube, then extend through the
    doubling chain to the exact target."""
    _check_target(target)
    chain = cfg.stage_chain()
    if len(chain) < 2:
        return None
    rng = rng or random.Random(derive_seed(sample.seed, "short", target))
    planned = plan_stage_increments(target, chain, cfg)
    attempts = 0
    while planned is not None and attempts < cfg.retries:
        seed_len, incs = planned
        attempts += 1
        scope0 = Subcube(sample.d, (1 << chain[0]) - 1, 0)
        cyc = None
        if seed_len - 2 <= 2 * (chain[0] - 1):
            cyc = build_very_short(sample, scope0, seed_len, allowed,
                                   cfg.monotone_ceiling)
        if cyc is not None:
            failed = False
            for j, inc in enumerate(incs, start=1):
                if inc == 0:
                    continue
                half = Subcube(sample.d, (1 << chain[j - 1]) - 1, 0)
                ambient = Subcube(sample.d, (1 << chain[j]) - 1, 0)
                cyc = extend_cycle(
                    sample, half, cyc, cyc.length + 2 * inc, ambient, cfg,
                    rng, allowed,
                )
                if cyc is None:
                    failed = True
                    break
            if not failed:
                return cyc
        # try the next viable seed length
        nxt = None
        for seed_try in range(seed_len + 2, min(2 * chain[0], target) + 1, 2):
            incs2 = _assign_increments(seed_try, target, chain, cfg)
            if incs2 is not None:
                nxt = (seed_try, incs2)
                break
        planned = nxt
    return None


# ---------------------------------------------------------------------------
# medium cycles: quadrant backbone + bridge + length-3 detours


def _quadrants(d: int) -> tuple[Subcube, Subcube, Subcube]:
    """Quadrants of Q^d by the first two coordinates: (0,0), (1,0), (0,1)."""
    free = ((1 << d) - 1) & ~0b11
    return (
        Subcube(d, free, 0b00),
        Subcube(d, free, 0b01),  # coordinate 1 set
        Subcube(d, free, 0b10),  # coordinate 2 set
    )


def _cell_of(v: int, d: int) -> int:
    """Middle-coordinate key identifying the d/2-dimensional cell of a
    quadrant vertex (cells: fix coords 3..d-floor(d/2), vary the rest)."""
    cell_dim = d // 2
    mid_lo, mid_hi = 3, d - cell_dim  # 1-based inclusive band of fixed coords
    mask = 0
    for c in range(mid_lo, mid_hi + 1):
        mask |= 1 << (c - 1)
    return v & mask


def select_candidate_paths(
    cycle: Cycle,
    path_len: int,
    count: int,
    d: int,
) -> list[list[int]]:
    """Subpaths of the cycle with the exact edge count whose endpoint cells
    are pairwise disjoint across paths (greedy sweep, skipping conflicts)."""
    verts = cycle.vertices
    n = len(verts)
    if path_len < 1 or path_len > n - 1:
        raise CapacityError(f"no subpath of length {path_len} in a {n}-cycle")
    used: set[int] = set()
    out: list[list[int]] = []
    for pos in range(n):
        if len(out) == count:
            return out
        a = verts[pos]
        b = verts[(pos + path_len) % n]
        ca, cb = _cell_of(a, d), _cell_of(b, d)
        if ca in used or cb in used:
            continue
        out.append([verts[(pos + j) % n] for j in range(path_len + 1)])
        used.add(ca)
        used.add(cb)
    if len(out) < count:
        raise CapacityError(
            f"only {len(out)} of {count} cell-disjoint paths available"
        )
    return out


class BuildContext:
    """Per-sample cache of the heavy shared structures (quadrant graphs,
    backbone cycles, cell components)."""

    def __init__(self, sample, cfg: BuilderConfig):
        self.sample = sample
        self.cfg = cfg
        self._cache: dict = {}

    def _rng(self, label: str) -> random.Random:
        return random.Random(derive_seed(self.sample.seed, "ctx", label))

    def quadrant_graph(self, quadrant: Subcube) -> ScopeGraph:
        key = ("qgraph", quadrant.base)
        if key not in self._cache:
            self._cache[key] = ScopeGraph(self.sample, quadrant, None)
        return self._cache[key]

    def quadrant_cycle(self, quadrant: Subcube) -> LongCycleResult:
        key = ("qcycle", quadrant.base)
        if key not in self._cache:
            g = self.quadrant_graph(quadrant)
            self._cache[key] = find_long_cycle(
                self.sample,
                quadrant,
                None,
                self.cfg.medium_core_fraction,
                self._rng(f"quadrant-{quadrant.base}"),
                restarts=self.cfg.heuristic_restarts,
                rotation_budget=self.cfg.heuristic_rotation_budget,
                graph=g,
            )
        return self._cache[key]

    def cell_graph(self, cell: Subcube) -> ScopeGraph:
        key = ("cell", cell.base)
        if key not in self._cache:
            self._cache[key] = ScopeGraph(self.sample, cell, None)
        return self._cache[key]

    def class_graph(self, cls: VertexClass) -> ScopeGraph:
        key = ("class", int(cls))
        if key not in self._cache:
            self._cache[key] = ScopeGraph(
                self.sample, Subcube.full(self.sample.d), frozenset({cls})
            )
        return self._cache[key]

    def host_cycle(self) -> LongCycleResult:
        key = ("host_cycle",)
        if key not in self._cache:
            g = self.class_graph(VertexClass.HOST)
            self._cache[key] = find_long_cycle(
                self.sample,
                Subcube.full(self.sample.d),
                frozenset({VertexClass.HOST}),
                self.cfg.long_core_fraction,
                self._rng("host"),
                restarts=self.cfg.heuristic_restarts,
                rotation_budget=self.cfg.heuristic_rotation_budget,
                graph=g,
            )
        return self._cache[key]


def build_medium(
    sample,
    target: int,
    cfg: BuilderConfig,
    ctx: Optional[BuildContext] = None,
    rng: Optional[random.Random] = None,
) -> Optional[Cycle]:
    """Backbone path in quadrant (0,0), bridged through quadrant (1,0),
    padded with length-3 detours whose middle edge lies in quadrant (0,1)."""
    _check_target(target)
    d = sample.d
    if d < 5 or d - 2 > SCOPE_DIM_CEILING:
        return None
    ctx = ctx or BuildContext(sample, cfg)
    q00, q10, q01 = _quadrants(d)
    backbone = ctx.quadrant_cycle(q00)
    if backbone.vertices is None:
        return None
    core = Cycle(d, tuple(backbone.vertices))
    pad_hi = min(cfg.medium_pad_cap, target - 2)
    pad_lo = max(1, target - (core.length - 1))
    if pad_lo > pad_hi:
        return None
    cell_dim = d // 2
    cell_min = (
        cfg.cell_component_min
        if cfg.cell_component_min is not None
        else max(2, (1 << cell_dim) // d)
    )
    n_cells = 1 << max(0, (d - cell_dim) - 2)
    count = max(1, min(cfg.path_candidates, n_cells // 2))
    q10_graph = ctx.quadrant_graph(q10)

    step = max(2, (pad_hi - pad_lo) // 5)
    pads = sorted({pad_lo, pad_hi, *range(pad_lo, pad_hi, step)}, reverse=True)
    for pad in pads:
        path_len = target - pad
        candidates = None
        want = count
        while want >= 1:
            try:
                candidates = select_candidate_paths(core, path_len, want, d)
                break
            except CapacityError:
                want //= 2
        if candidates is None:
            continue
        result = _bridge_and_pad(
            sample, d, target, candidates, q10_graph, cell_min, ctx
        )
        if result is not None:
            return result
    return None


def _bridge_and_pad(
    sample,
    d: int,
    target: int,
    candidates: list[list[int]],
    q10_graph: ScopeGraph,
    cell_min: int,
    ctx: BuildContext,
) -> Optional[Cycle]:
    bit1 = 0b01
    bit2 = 0b10
    for arc in candidates:
        u, v = arc[0], arc[-1]
        u2, v2 = u | bit1, v | bit1
        if not sample.edge_present(Edge(u, 1)):
            continue
        if not sample.edge_present(Edge(v, 1)):
            continue
        # both far endpoints must sit in a large component of their cell
        if not _cell_component_ok(sample, d, u2, cell_min, ctx):
            continue
        if not _cell_component_ok(sample, d, v2, cell_min, ctx):
            continue
        a = q10_graph.local_of(v2)
        b = q10_graph.local_of(u2)
        bridge = q10_graph.shortest_path_local(a, b)
        if bridge is None:
            continue
        bridge_verts = [q10_graph.global_of(i) for i in bridge]
        deficit = target - (len(arc) - 1) - 2 - (len(bridge_verts) - 1)
        if deficit < 0 or deficit % 2:
            continue
        detours = _collect_edge_detours(sample, arc, bit2, deficit // 2)
        if detours is None:
            continue
        out: list[int] = []
        for j, x in enumerate(arc):
            out.append(x)
            extra = detours.get(j)
            if extra is not None:
                out.extend(extra)
        out.extend(bridge_verts)
        cyc = Cycle(d, tuple(out))
        assert cyc.length == target
        return cyc
    return None


def _cell_component_ok(
    sample, d: int, vertex: int, cell_min: int, ctx: BuildContext
) -> bool:
    cell_dim = d // 2
    free = 0
    for c in range(d - cell_dim + 1, d + 1):
        free |= 1 << (c - 1)
    cell = Subcube(d, free, vertex & ~free)
    g = ctx.cell_graph(cell)
    labels = g.component_labels()
    lab = labels[g.local_of(vertex)]
    if lab < 0:
        return False
    return int(g._component_sizes[lab]) >= cell_min


def _collect_edge_detours(
    sample, arc: list[int], flip_bit: int, needed: int
) -> Optional[dict[int, list[int]]]:
    """Replace disjoint arc edges (x, y) by x, x^flip, y^flip, y; the middle
    edge lies in the quadrant reached by flip_bit.  Returns {edge_start_index:
    [interior vertices]} or None when not enough detours are present."""
    if needed == 0:
        return {}
    out: dict[int, list[int]] = {}
    j = 0
    while j < len(arc) - 1 and len(out) < needed:
        x, y = arc[j], arc[j + 1]
        x2, y2 = x | flip_bit, y | flip_bit
        if (
            sample.edge_present(Edge.between(x, x2))
            and sample.edge_present(Edge.between(y, y2))
            and sample.edge_present(Edge.between(x2, y2))
        ):
            out[j] = [x2, y2]
            j += 2  # keep chosen edges vertex-disjoint
        else:
            j += 1
    if len(out) < needed:
        return None
    return out


# ---------------------------------------------------------------------------
# long cycles: tri-partition construction


def build_long(
    sample,
    target: int,
    cfg: BuilderConfig,
    ctx: Optional[BuildContext] = None,
) -> Optional[Cycle]:
    """Backbone cycle among HOST vertices, shortcut through the BRIDGE
    giant, exact padding with 4-cycle detours into DETOUR vertices."""
    _check_target(target)
    if not isinstance(sample.vertex_model, TriPartition):
        raise ValueError("the long regime requires a tri-partition vertex model")
    d = sample.d
    if d > SCOPE_DIM_CEILING:
        return None
    ctx = ctx or BuildContext(sample, cfg)
    backbone = ctx.host_cycle()
    if backbone.vertices is None or backbone.best_length < target:
        return None
    core = Cycle(d, tuple(backbone.vertices))
    if core.length < target:
        return None
    base_window = cfg.long_window or max(2 * d, (1 << d) // max(1, d**3))
    window_cap = max(1, (target - 2) // 3)

    bridge_graph = ctx.class_graph(VertexClass.BRIDGE)
    labels = bridge_graph.component_labels()
    sizes = bridge_graph._component_sizes
    bridge_min = (
        cfg.bridge_component_min
        if cfg.bridge_component_min is not None
        else max(4, (1 << d) // (d * d * 4))
    )
    if sizes is None or len(sizes) == 0 or int(sizes[0]) < bridge_min:
        return None

    verts = core.vertices
    cand1: list = []
    cand2: list = []
    window = min(base_window, window_cap)
    while True:
        if target - window <= core.length:
            cand1 = _window_links(sample, bridge_graph, labels, verts, 0, window, d)
            cand2 = _window_links(
                sample, bridge_graph, labels, verts,
                target - 2 * window, target - window, d,
            )
            if cand1 and cand2:
                break
        if window >= window_cap:
            return None
        window = min(2 * window, window_cap)  # a wider window catches a link

    bfs_cache: dict[int, tuple] = {}
    viable = []
    for pos1, u1, w1 in cand1:
        a = bridge_graph.local_of(w1)
        if a not in bfs_cache:
            bfs_cache[a] = _bfs_with_parents(bridge_graph, a)
        dist, _ = bfs_cache[a]
        for pos2, u2, w2 in cand2:
            b = bridge_graph.local_of(w2)
            if dist[b] < 0:
                continue
            clen = (pos2 - pos1) + 2 + int(dist[b])
            deficit = target - clen
            if deficit < 0 or deficit % 2:
                continue
            if deficit // 2 > (pos2 - pos1) // 2:
                continue
            viable.append((deficit, pos1, pos2, a, b))
    viable.sort(key=lambda t: t[0])

    for deficit, pos1, pos2, a, b in viable[:8]:
        dist, parent = bfs_cache[a]
        chain = [b]
        while chain[-1] != a:
            chain.append(int(parent[chain[-1]]))
        bridge_path = [bridge_graph.global_of(i) for i in chain]  # w2 .. w1

        arc = list(verts[pos1 : pos2 + 1])
        detours = _collect_class_detours(sample, arc, deficit // 2, d)
        if detours is None:
            continue
        out: list[int] = []
        for j, x in enumerate(arc):
            out.append(x)
            extra = detours.get(j)
            if extra is not None:
                out.extend(extra)
        out.extend(bridge_path)
        cyc = Cycle(d, tuple(out))
        assert cyc.length == target
        return cyc
    return None


def _window_links(
    sample,
    bridge_graph: ScopeGraph,
    labels,
    verts: tuple[int, ...],
    lo: int,
    hi: int,
    d: int,
    cap: int = 16,
) -> list[tuple[int, int, int]]:
    """Present edges from cycle positions [lo, hi) into the BRIDGE giant."""
    out = []
    for pos in range(max(0, lo), min(hi, len(verts))):
        v = verts[pos]
        for w in neighbors(v, d):
            if sample.vertex_class(w) != VertexClass.BRIDGE:
                continue
            i = bridge_graph.local_of(w)
            if labels[i] != 0:
                continue
            if sample.edge_present(Edge.between(v, w)):
                out.append((pos, v, w))
                if len(out) >= cap:
                    return out
                break  # one link per position is enough
    return out


def _bfs_with_parents(g: ScopeGraph, start: int):
    import numpy as np

    dist = np.full(g.n, -1, dtype=np.int64)
    parent = np.full(g.n, -1, dtype=np.int64)
    dist[start] = 0
    frontier = [start]
    indptr, indices = g.adj.indptr, g.adj.indices
    while frontier:
        nxt = []
        for v in frontier:
            for w in indices[indptr[v] : indptr[v + 1]]:
                if dist[w] < 0:
                    dist[w] = dist[v] + 1
                    parent[w] = v
                    nxt.append(int(w))
        frontier = nxt
    return dist, parent


def _collect_class_detours(
    sample, arc: list[int], needed: int, d: int
) -> Optional[dict[int, list[int]]]:
    """4-cycle detours from disjoint arc edges into DETOUR-class vertices."""
    if needed == 0:
        return {}
    out: dict[int, list[int]] = {}
    used: set[int] = set()
    j = 0
    while j < len(arc) - 1 and len(out) < needed:
        x, y = arc[j], arc[j + 1]
        hit = False
        for x2, y2 in four_cycle_partners(x, y, d):
            if x2 in used or y2 in used:
                continue
            if sample.vertex_class(x2) != VertexClass.DETOUR:
                continue
            if sample.vertex_class(y2) != VertexClass.DETOUR:
                continue
            if not sample.edge_present(Edge.between(x, x2)):
                continue
            if not sample.edge_present(Edge.between(x2, y2)):
                continue
            if not sample.edge_present(Edge.between(y2, y)):
                continue
            out[j] = [x2, y2]
            used.add(x2)
            used.add(y2)
            hit = True
            break
        j += 2 if hit else 1
    if len(out) < needed:
        return None
    return out


# ---------------------------------------------------------------------------
# dispatcher and spectrum reports


@dataclass
class SpectrumEntry:
    length: int
    found: bool
    strategy: Optional[str]
    witness_digest: Optional[str]
    millis: float

    def to_json(self, include_timing: bool = False) -> dict:
        obj = {
            "length": self.length,
            "found": self.found,
            "strategy": self.strategy,
            "witness_digest": self.witness_digest,
        }
        if include_timing:
            obj["millis"] = round(self.millis, 3)
        return obj


@dataclass
class SpectrumReport:
    sample: dict
    entries: list[SpectrumEntry]

    def to_json(self, include_timing: bool = False) -> dict:
        return {
            "schema": 1,
            "seed": self.sample["seed"],
            "d": self.sample["d"],
            "p": self.sample["p"],
            "model": self.sample["vertex_model"],
            "entries": [e.to_json(include_timing) for e in self.entries],
        }

    @property
    def found_lengths(self) -> list[int]:
        return [e.length for e in self.entries if e.found]


def regime_of(target: int, cfg: BuilderConfig) -> str:
    if target <= cfg.very_short_max:
        return VERY_SHORT
    if target <= cfg.short_max:
        return SHORT
    if target <= cfg.medium_max:
        return MEDIUM
    return LONG


_FALLBACKS = {
    VERY_SHORT: (VERY_SHORT, SHORT),
    SHORT: (SHORT, VERY_SHORT, MEDIUM),
    MEDIUM: (MEDIUM, SHORT, LONG),
    LONG: (LONG, MEDIUM),
}


class SpectrumBuilder:
    """Dispatches each target length to its regime builder (with adjacent
    regimes as fallback) and revalidates every witness."""

    def __init__(self, sample, cfg: Optional[BuilderConfig] = None):
        self.sample = sample
        self.cfg = cfg or BuilderConfig.small_d(sample.d)
        self.ctx = BuildContext(sample, self.cfg)

    def _attempt(self, strategy: str, target: int) -> Optional[Cycle]:
        sample, cfg, d = self.sample, self.cfg, self.sample.d
        if strategy == VERY_SHORT:
            if (target - 2) // 2 + 1 > d:
                return None
            return build_very_short(
                sample, Subcube.full(d), target,
                monotone_ceiling=cfg.monotone_ceiling,
            )
        if strategy == SHORT:
            return build_short(sample, target, cfg)
        if strategy == MEDIUM:
            return build_medium(sample, target, cfg, self.ctx)
        if strategy == LONG:
            if not isinstance(sample.vertex_model, TriPartition):
                return None
            if target > cfg.long_max:
                return None
            return build_long(sample, target, cfg, self.ctx)
        raise ValueError(f"unknown strategy {strategy!r}")

    def build(self, target: int) -> tuple[Optional[Cycle], Optional[str]]:
        _check_target(target)
        if target > 1 << self.sample.d:
            return None, None
        for strategy in _FALLBACKS[regime_of(target, self.cfg)]:
            cyc = self._attempt(strategy, target)
            if cyc is not None:
                ok, diag = validate_cycle(self.sample, cyc.vertices)
                if not ok:
                    raise AssertionError(
                        f"builder {strategy} produced an invalid witness: {diag}"
                    )
                if cyc.length != target:
                    raise AssertionError(
                        f"builder {strategy} returned length {cyc.length}, "
                        f"wanted {target}"
                    )
                return cyc, strategy
        return None, None

    def spectrum(
        self,
        lengths: Sequence[int],
        witness_sink: Optional[dict] = None,
    ) -> SpectrumReport:
        entries = []
        for target in lengths:
            t0 = time.perf_counter()
            cyc, strategy = self.build(target)
            ms = (time.perf_counter() - t0) * 1e3
            if cyc is not None and witness_sink is not None:
                witness_sink[target] = cyc.vertices
            entries.append(
                SpectrumEntry(
                    length=target,
                    found=cyc is not None,
                    strategy=strategy,
                    witness_digest=None if cyc is None else cyc.digest(),
                    millis=ms,
                )
            )
        return SpectrumReport(sample=self.sample.to_json(), entries=entries)


def build_spectrum(
    sample, lengths: Sequence[int], cfg: Optional[BuilderConfig] = None
) -> SpectrumReport:
    return SpectrumBuilder(sample, cfg).spectrum(lengths)
