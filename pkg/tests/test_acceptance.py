"""Acceptance suite: one test per criterion, one printed PASS/FAIL line each.

Run with `pytest tests/test_acceptance.py -s` to see the lines as they
complete.  Thresholds marked "frozen" were fixed from pilot runs and are
not tuned at test time.  The whole suite stays well inside the per-
criterion runtime budgets on a laptop-class machine.
"""

import itertools
import math
import random
import time

from qcycles.builder import (
    BuilderConfig,
    SpectrumBuilder,
    build_very_short,
    extend_cycle,
    make_gadget_plan,
)
from qcycles.cube import Subcube
from qcycles.errors import PlanError
from qcycles.experiments import GiantManifest, SpectrumManifest, run_giant, run_spectrum
from qcycles.graphs import ScopeGraph, components, giant_component
from qcycles.monotone import (
    greedy_monotone_path,
    greedy_success_count,
    greedy_success_probability_exact,
    short_path_lower_bound,
)
from qcycles.oracle import full_spectrum, validate_cycle
from qcycles.sampling import (
    ExplicitInstance,
    PercolationSample,
    TriPartition,
    derive_seed,
)

# frozen from a pilot run (observed minimum 3.04 over 1000 sets)
EXPANSION_A_EMP = 2.5


def _report(criterion: int, ok: bool, detail: str, elapsed: float, budget: float):
    status = "PASS" if ok else "FAIL"
    print(f"ACCEPTANCE {criterion:2d} {status}: {detail} [{elapsed:.1f}s]")
    assert ok, f"criterion {criterion}: {detail}"
    assert elapsed < budget, f"criterion {criterion} over budget: {elapsed:.1f}s"


def test_c01_monotone_exactness():
    t0 = time.time()
    n = 200_000
    cells = ((2, 0.5), (3, 1 / 3), (4, 0.25))
    devs = []
    ok = True
    for dim, p in cells:
        exact = greedy_success_probability_exact(dim, p)
        freq = greedy_success_count(0, n, dim, p) / n
        sigma = math.sqrt(exact * (1 - exact) / n)
        devs.append(abs(freq - exact) / sigma)
        ok &= abs(freq - exact) <= 3 * sigma
    assert greedy_success_probability_exact(2, 0.5) == 0.375
    assert abs(greedy_success_probability_exact(3, 1 / 3) - 95 / 729) < 1e-15
    # D = 2 verified independently over all 16 edge configurations
    from qcycles.cube import Edge, OrientedSubcube

    host = OrientedSubcube(Subcube.full(2), 0)
    edges = [Edge(0b00, 1), Edge(0b00, 2), Edge(0b01, 2), Edge(0b10, 1)]
    mass = 0
    for keep in itertools.product((False, True), repeat=4):
        inst = ExplicitInstance(2, [e for e, k in zip(edges, keep) if k])
        mass += greedy_monotone_path(inst, host) is not None
    ok &= mass / 16 == 0.375
    _report(1, ok, f"MC deviations {['%.2f' % d for d in devs]} sigma; "
            f"brute-force mass {mass}/16", time.time() - t0, 10.0)


def test_c02_bound_ordering():
    t0 = time.time()
    ok = True
    checked = 0
    for dim in range(1, 11):
        for k in range(1, 21):
            rho = 0.05 * k
            if rho > 1.0 / dim:
                break
            ok &= short_path_lower_bound(dim, rho) <= (
                greedy_success_probability_exact(dim, rho) + 1e-15
            )
            checked += 1
    _report(2, ok and checked >= 10, f"{checked} (dim, p) pairs ordered",
            time.time() - t0, 1.0)


def test_c03_soundness_sweep():
    t0 = time.time()
    invocations = 0
    invalid = 0

    def run_block(d, p, seeds, lengths, tri=False):
        nonlocal invocations, invalid
        model = TriPartition.for_epsilon(0.5) if tri else None
        for seed in seeds:
            sample = PercolationSample(seed, d, p, vertex_model=model)
            sink = {}
            SpectrumBuilder(sample).spectrum(lengths, witness_sink=sink)
            invocations += len(lengths)
            for verts in sink.values():
                good, _ = validate_cycle(sample, verts)
                invalid += not good

    for d in (8, 10, 12, 14, 16, 18, 20):
        cfg = BuilderConfig.small_d(d)
        vs = cfg.very_short_max
        lengths = sorted(
            {4, 6, 8, 10, 12, max(4, vs - 2), vs, vs + 2, vs + 6, vs + 10}
        )
        for p in (0.3, 0.5, 0.8):
            run_block(d, p, range(56), lengths)
    for d in (10, 12, 14):
        for p in (0.5, 0.8):
            run_block(d, p, range(8), [5 * d, 8 * d])
    run_block(12, 0.8, range(8), [512, 1024], tri=True)
    run_block(12, 1.0, range(4), [700, 1600], tri=True)

    _report(3, invalid == 0 and invocations >= 10_000,
            f"{invocations} builder invocations, {invalid} invalid witnesses",
            time.time() - t0, 300.0)


def test_c04_oracle_agreement():
    t0 = time.time()
    assert full_spectrum(ExplicitInstance.full_cube(3)).sorted() == [4, 6, 8]
    assert full_spectrum(ExplicitInstance.full_cube(4)).sorted() == list(
        range(4, 17, 2)
    )
    violations = 0
    runs = 0
    for d in (3, 4):
        lengths = list(range(4, (1 << d) + 1, 2))
        for p in (0.4, 0.7, 1.0):
            for seed in range(200):
                sample = PercolationSample(seed, d, p)
                report = SpectrumBuilder(sample).spectrum(lengths)
                truth = full_spectrum(ExplicitInstance.from_sample(sample)).lengths
                violations += sum(
                    1 for e in report.entries if e.found and e.length not in truth
                )
                runs += 1
    _report(4, violations == 0 and runs == 1200,
            f"{runs} samples, {violations} spectrum violations",
            time.time() - t0, 120.0)


def test_c05_coupling_monotonicity():
    t0 = time.time()
    found = 0
    failed = 0
    for seed in range(100):
        sample = PercolationSample(seed, 12, 0.4)
        sink = {}
        SpectrumBuilder(sample).spectrum([4, 6, 8, 10], witness_sink=sink)
        richer = sample.with_p(0.6)
        for verts in sink.values():
            ok, _ = validate_cycle(richer, verts)
            found += 1
            failed += not ok
    _report(5, failed == 0 and found >= 100,
            f"{found} witnesses revalidated at p=0.6, {failed} failures",
            time.time() - t0, 60.0)


def test_c06_very_short_coverage():
    t0 = time.time()
    scope = Subcube.full(20)
    rates = {}
    for target in (4, 6, 8, 10, 12):
        hits = 0
        for seed in range(100):
            sample = PercolationSample(seed, 20, 0.5)
            cyc = build_very_short(sample, scope, target)
            if cyc is not None:
                good, _ = validate_cycle(sample, cyc.vertices)
                hits += good
        rates[target] = hits
    ok = all(h >= 95 for h in rates.values())
    _report(6, ok, f"per-length successes /100: {rates}", time.time() - t0, 180.0)


def test_c07_giant_component_gap():
    t0 = time.time()
    d = 14
    passes = 0
    for seed in range(50):
        sample = PercolationSample(seed, d, 4 / 14)
        summary, _ = components(sample, giant_threshold=0.05)
        info = giant_component(summary)
        if info is not None and info.size >= 0.05 * (1 << d) and info.gap_ratio >= d:
            passes += 1
    _report(7, passes >= 45, f"giant with gap in {passes}/50 runs",
            time.time() - t0, 120.0)


def test_c08_expansion_floor():
    t0 = time.time()
    d = 14
    ratios = []
    for seed in range(10):
        sample = PercolationSample(seed, d, 6 / 14)
        graph = ScopeGraph(sample, Subcube.full(d), None)
        rng = random.Random(derive_seed(seed, "expansion-sets"))
        made = 0
        while made < 100:
            size = rng.randrange(d, d * d + 1)
            grown = graph.grow_connected_set(rng, size)
            if grown is None:
                continue
            ratios.append(len(graph.external_neighborhood(grown)) / len(grown))
            made += 1
    low = min(ratios)
    _report(8, len(ratios) == 1000 and low >= EXPANSION_A_EMP,
            f"min expansion ratio {low:.3f} >= frozen {EXPANSION_A_EMP}",
            time.time() - t0, 120.0)


def test_c09_determinism():
    t0 = time.time()
    spec = SpectrumManifest(d=12, p=0.4, seeds=[0, 1, 2], lengths=[4, 8, 12, 20])
    a = run_spectrum(spec)
    b = run_spectrum(spec)
    giant = GiantManifest(d=12, p=0.3, seeds=[0, 1])
    g1 = run_giant(giant)
    g2 = run_giant(giant)
    ok = (
        a.csv == b.csv
        and a.data_bytes() == b.data_bytes()
        and g1.csv == g2.csv
        and g1.data_bytes() == g2.data_bytes()
    )
    _report(9, ok, "manifest reruns byte-identical (spectrum, giant)",
            time.time() - t0, 30.0)


def test_c10_gadget_arithmetic():
    t0 = time.time()
    rng = random.Random(2024)
    planned = errored = 0
    ok = True
    for _ in range(10_000):
        ambient = rng.randrange(4, 64)
        cycle_edges = rng.randrange(2, 300)
        if rng.random() < 0.5:
            extension = rng.randrange(0, ambient * cycle_edges // 4 + 2)
        else:
            extension = rng.randrange(0, 2 * ambient * cycle_edges)
        cfg = BuilderConfig.small_d(max(4, ambient))
        lo, hi = cfg.remainder_band(ambient)
        hi = min(hi, ambient // 2)
        try:
            plan = make_gadget_plan(extension, ambient, cycle_edges, cfg)
        except PlanError:
            errored += 1
            continue
        planned += 1
        ok &= plan.unit_count * plan.unit_size + plan.remainder_size == extension
        if extension:
            ok &= lo <= plan.remainder_size <= hi
        ok &= plan.unit_count <= min(cfg.unit_cap(cycle_edges), cycle_edges // 2)

    # extend_cycle at p = 1 lands exactly on target, every time
    exact = 0
    trials = 0
    for d in (8, 12):
        cfg = BuilderConfig.small_d(d)
        sample = PercolationSample(7, d, 1.0)
        half = Subcube(d, (1 << (d // 2)) - 1, 0)
        ambient_cube = Subcube.full(d)
        seed_cycle = build_very_short(sample, half, d - 2)
        unit = cfg.unit_size(d)
        _, hi = cfg.remainder_band(d)
        cap = min(cfg.unit_cap((d - 2) // 2), (d - 2) // 4) * unit + min(hi, d // 2)
        for target in range(d, d - 2 + 2 * cap + 1, 2):
            out = extend_cycle(sample, half, seed_cycle, target, ambient_cube, cfg)
            trials += 1
            exact += out is not None and out.length == target
    ok &= exact == trials
    _report(10, ok and planned > 300 and errored > 0,
            f"{planned} plans checked, {errored} plan errors raised, "
            f"{exact}/{trials} exact extensions", time.time() - t0, 30.0)
