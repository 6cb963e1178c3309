"""Experiment manifests and runners.

A manifest fully determines a run: rerunning it reproduces the CSV/JSON
outputs byte for byte (timing goes to logging, never into data).  These
runners back both the HTTP service and the command-line client.
"""

from __future__ import annotations

import csv
import io
import json
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from typing import Literal, Optional, Union

from pydantic import BaseModel, Field, model_validator

from .builder import BuilderConfig, SpectrumBuilder
from .cube import Subcube, format_vertex
from .errors import DomainError
from .graphs import ScopeGraph, giant_component
from .monotone import (
    greedy_success_count,
    greedy_success_probability_exact,
    short_path_lower_bound,
)
from .oracle import full_spectrum
from .sampling import (
    ExplicitInstance,
    KeepModel,
    PercolationSample,
    TriPartition,
    derive_seed,
)

log = logging.getLogger("qcycles")


def chernoff_bound(n: int, p: float, a: float) -> float:
    """Two-sided tail bound 2*exp(-a^2 / (3 n p)) for Bin(n, p) deviations;
    valid for a in [0, n*p]."""
    mean = n * p
    if not 0 <= a <= mean:
        raise DomainError(f"deviation a must be in [0, {mean}]")
    if mean == 0:
        raise DomainError("n * p must be positive")
    return 2.0 * math.exp(-(a * a) / (3.0 * mean))


class ExperimentResult(BaseModel):
    command: str
    csv: str
    data: dict

    def data_bytes(self) -> bytes:
        return json.dumps(self.data, sort_keys=True, indent=1).encode() + b"\n"


def _csv_text(header: list[str], rows: list[list]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([repr(x) if isinstance(x, float) else x for x in row])
    return buf.getvalue()


def _resolve_p(d: int, p: Optional[float], c: Optional[float]) -> float:
    if (p is None) == (c is None):
        raise ValueError("give exactly one of p or c (p = c/d)")
    return p if p is not None else c / d


# ---------------------------------------------------------------------------
# monotone-prob


class MonotoneCell(BaseModel):
    dim: int = Field(ge=0, le=30)
    p: float = Field(ge=0.0, le=1.0)


class MonotoneManifest(BaseModel):
    command: Literal["monotone-prob"] = "monotone-prob"
    cells: list[MonotoneCell]
    samples: int = Field(default=10000, ge=1)
    seed0: int = 0
    jobs: int = 1


def run_monotone(m: MonotoneManifest) -> ExperimentResult:
    rows = []
    cells_json = []
    for cell in m.cells:
        successes = greedy_success_count(m.seed0, m.samples, cell.dim, cell.p)
        freq = successes / m.samples
        exact = greedy_success_probability_exact(cell.dim, cell.p)
        if cell.dim >= 1 and cell.p <= 1.0 / cell.dim:
            lower = short_path_lower_bound(cell.dim, cell.p)
        else:
            lower = None
        se = math.sqrt(max(exact * (1.0 - exact), 1e-300) / m.samples)
        within = abs(freq - exact) <= 3.0 * se
        rows.append(
            [cell.dim, cell.p, m.samples, m.seed0, successes, freq, exact,
             "" if lower is None else lower, se, int(within)]
        )
        cells_json.append(
            {
                "dim": cell.dim,
                "p": cell.p,
                "samples": m.samples,
                "seed0": m.seed0,
                "successes": successes,
                "frequency": freq,
                "exact": exact,
                "lower_bound": lower,
                "std_err": se,
                "within_3sigma": within,
            }
        )
    csv_text = _csv_text(
        ["dim", "p", "samples", "seed0", "successes", "frequency", "exact",
         "lower_bound", "std_err", "within_3sigma"],
        rows,
    )
    data = {"schema": 1, "command": m.command, "cells": cells_json}
    return ExperimentResult(command=m.command, csv=csv_text, data=data)


# ---------------------------------------------------------------------------
# spectrum


class SpectrumManifest(BaseModel):
    command: Literal["spectrum"] = "spectrum"
    d: int = Field(ge=2, le=30)
    p: Optional[float] = Field(default=None, ge=0.0, le=1.0)
    c: Optional[float] = Field(default=None, ge=0.0)
    seeds: list[int]
    lengths: list[int]
    epsilon: float = 0.5
    profile: Literal["small-d", "paper"] = "small-d"
    tri_partition: bool = False
    include_witnesses: bool = False
    jobs: int = 1

    @model_validator(mode="after")
    def _check(self) -> "SpectrumManifest":
        _resolve_p(self.d, self.p, self.c)
        for length in self.lengths:
            if length % 2 or length < 4:
                raise ValueError(f"length {length} is not an even target >= 4")
        return self


def _spectrum_one(args: tuple) -> dict:
    m_json, seed = args
    m = SpectrumManifest(**m_json)
    p = _resolve_p(m.d, m.p, m.c)
    model = TriPartition.for_epsilon(m.epsilon) if m.tri_partition else None
    sample = PercolationSample(seed=seed, d=m.d, p=p, vertex_model=model)
    if m.profile == "paper":
        cfg = BuilderConfig.paper(m.d, m.epsilon)
    else:
        cfg = BuilderConfig.small_d(m.d, m.epsilon)
    builder = SpectrumBuilder(sample, cfg)
    sink: Optional[dict] = {} if m.include_witnesses else None
    report = builder.spectrum(m.lengths, witness_sink=sink)
    out = report.to_json()
    log.info(
        "spectrum seed=%d d=%d p=%.6g found %d/%d (%.1f ms total)",
        seed, m.d, p, len(report.found_lengths), len(m.lengths),
        sum(e.millis for e in report.entries),
    )
    if sink is not None:
        out["witnesses"] = {
            str(target): [format_vertex(v, m.d) for v in verts]
            for target, verts in sink.items()
        }
    return out


def run_spectrum(m: SpectrumManifest) -> ExperimentResult:
    tasks = [(m.model_dump(), seed) for seed in m.seeds]
    if m.jobs > 1:
        with ProcessPoolExecutor(max_workers=m.jobs) as pool:
            runs = list(pool.map(_spectrum_one, tasks))
    else:
        runs = [_spectrum_one(t) for t in tasks]
    per_length = []
    for i, length in enumerate(m.lengths):
        found = sum(1 for r in runs if r["entries"][i]["found"])
        per_length.append(
            {"length": length, "found_runs": found, "runs": len(runs),
             "rate": found / len(runs) if runs else 0.0}
        )
    coverage = (
        sum(row["rate"] for row in per_length) / len(per_length)
        if per_length
        else 0.0
    )
    csv_rows = []
    for r in runs:
        for e in r["entries"]:
            csv_rows.append(
                [r["seed"], r["d"], r["p"], e["length"], int(e["found"]),
                 e["strategy"] or "", e["witness_digest"] or ""]
            )
    csv_text = _csv_text(
        ["seed", "d", "p", "length", "found", "strategy", "witness_digest"],
        csv_rows,
    )
    data = {
        "schema": 1,
        "command": m.command,
        "coverage": coverage,
        "per_length": per_length,
        "runs": runs,
    }
    return ExperimentResult(command=m.command, csv=csv_text, data=data)


# ---------------------------------------------------------------------------
# giant components


class GiantManifest(BaseModel):
    command: Literal["giant"] = "giant"
    d: int = Field(ge=2, le=30)
    p: Optional[float] = Field(default=None, ge=0.0, le=1.0)
    c: Optional[float] = Field(default=None, ge=0.0)
    seeds: list[int]
    threshold: float = 0.05
    keep_q: Optional[float] = Field(default=None, gt=0.0, le=1.0)
    with_diameter: bool = False
    jobs: int = 1

    @model_validator(mode="after")
    def _check(self) -> "GiantManifest":
        _resolve_p(self.d, self.p, self.c)
        return self


def _giant_one(args: tuple) -> dict:
    m_json, seed = args
    m = GiantManifest(**m_json)
    p = _resolve_p(m.d, m.p, m.c)
    model = None if m.keep_q is None else KeepModel(m.keep_q)
    sample = PercolationSample(seed=seed, d=m.d, p=p, vertex_model=model)
    g = ScopeGraph(sample, Subcube.full(m.d), None)
    summary = g.summary(m.threshold)
    if m.with_diameter and summary.sizes:
        summary.diameter = g.diameter(0, "double_sweep")
    giant = giant_component(summary)
    row = {
        "seed": seed,
        "d": m.d,
        "p": p,
        "retained": summary.retained,
        "largest": summary.sizes[0] if summary.sizes else 0,
        "second": summary.second_size,
        "fraction": summary.giant_fraction,
        "gap_ratio": None if giant is None or math.isinf(giant.gap_ratio)
        else giant.gap_ratio,
        "giant_present": giant is not None,
        "summary": summary.to_json(),
    }
    if m.with_diameter and summary.diameter is not None:
        row["diameter_lb"] = summary.diameter.value
    return row


def run_giant(m: GiantManifest) -> ExperimentResult:
    tasks = [(m.model_dump(), seed) for seed in m.seeds]
    if m.jobs > 1:
        with ProcessPoolExecutor(max_workers=m.jobs) as pool:
            rows = list(pool.map(_giant_one, tasks))
    else:
        rows = [_giant_one(t) for t in tasks]
    header = ["seed", "d", "p", "retained", "largest", "second", "fraction",
              "gap_ratio", "giant_present"]
    if m.with_diameter:
        header.append("diameter_lb")
    csv_rows = []
    for r in rows:
        row = [r["seed"], r["d"], r["p"], r["retained"], r["largest"],
               r["second"], r["fraction"],
               "" if r["gap_ratio"] is None else r["gap_ratio"],
               int(r["giant_present"])]
        if m.with_diameter:
            row.append(r.get("diameter_lb", ""))
        csv_rows.append(row)
    data = {
        "schema": 1,
        "command": m.command,
        "rows": rows,
        "present_count": sum(1 for r in rows if r["giant_present"]),
    }
    return ExperimentResult(
        command=m.command, csv=_csv_text(header, csv_rows), data=data
    )


# ---------------------------------------------------------------------------
# expansion


class ExpansionManifest(BaseModel):
    command: Literal["expansion"] = "expansion"
    d: int = Field(ge=2, le=30)
    p: Optional[float] = Field(default=None, ge=0.0, le=1.0)
    c: Optional[float] = Field(default=None, ge=0.0)
    seeds: list[int]
    sets_per_seed: int = Field(default=100, ge=1)
    size_min: Optional[int] = None
    size_max: Optional[int] = None
    jobs: int = 1

    @model_validator(mode="after")
    def _check(self) -> "ExpansionManifest":
        _resolve_p(self.d, self.p, self.c)
        return self


def _expansion_one(args: tuple) -> list[dict]:
    import random

    m_json, seed = args
    m = ExpansionManifest(**m_json)
    p = _resolve_p(m.d, m.p, m.c)
    lo = m.size_min if m.size_min is not None else m.d
    hi = m.size_max if m.size_max is not None else m.d * m.d
    sample = PercolationSample(seed=seed, d=m.d, p=p)
    g = ScopeGraph(sample, Subcube.full(m.d), None)
    rng = random.Random(derive_seed(seed, "expansion-sets"))
    rows = []
    made = 0
    attempts = 0
    while made < m.sets_per_seed and attempts < 50 * m.sets_per_seed:
        attempts += 1
        size = rng.randrange(lo, hi + 1)
        grown = g.grow_connected_set(rng, size)
        if grown is None:
            continue
        ratio = len(g.external_neighborhood(grown)) / len(grown)
        rows.append({"seed": seed, "set_index": made, "size": len(grown),
                     "ratio": ratio})
        made += 1
    return rows


def run_expansion(m: ExpansionManifest) -> ExperimentResult:
    tasks = [(m.model_dump(), seed) for seed in m.seeds]
    if m.jobs > 1:
        with ProcessPoolExecutor(max_workers=m.jobs) as pool:
            chunks = list(pool.map(_expansion_one, tasks))
    else:
        chunks = [_expansion_one(t) for t in tasks]
    rows = [r for chunk in chunks for r in chunk]
    min_ratio = min((r["ratio"] for r in rows), default=None)
    csv_rows = [[r["seed"], r["set_index"], r["size"], r["ratio"]] for r in rows]
    data = {
        "schema": 1,
        "command": m.command,
        "set_count": len(rows),
        "min_ratio": min_ratio,
        "rows": rows,
    }
    return ExperimentResult(
        command=m.command,
        csv=_csv_text(["seed", "set_index", "size", "ratio"], csv_rows),
        data=data,
    )


# ---------------------------------------------------------------------------
# oracle


class OracleManifest(BaseModel):
    command: Literal["oracle"] = "oracle"
    builtin: Optional[Literal["q2", "q3", "q4"]] = None
    instance_text: Optional[str] = None
    d: Optional[int] = None
    p: Optional[float] = None
    seed: Optional[int] = None

    @model_validator(mode="after")
    def _check(self) -> "OracleManifest":
        given = sum(
            1
            for x in (self.builtin, self.instance_text, self.seed)
            if x is not None
        )
        if given != 1:
            raise ValueError(
                "give exactly one source: builtin, instance_text, or (d, p, seed)"
            )
        if self.seed is not None and (self.d is None or self.p is None):
            raise ValueError("sampled instances need d and p")
        return self


def run_oracle(m: OracleManifest) -> ExperimentResult:
    if m.builtin is not None:
        inst = ExplicitInstance.full_cube(int(m.builtin[1]))
        source = m.builtin
    elif m.instance_text is not None:
        inst = ExplicitInstance.parse(m.instance_text)
        source = "text"
    else:
        sample = PercolationSample(seed=m.seed, d=m.d, p=m.p)
        inst = ExplicitInstance.from_sample(sample)
        source = f"sample(seed={m.seed}, d={m.d}, p={m.p})"
    spectrum = full_spectrum(inst)
    lengths = spectrum.sorted()
    data = {
        "schema": 1,
        "command": m.command,
        "source": source,
        "d": inst.d,
        "edge_count": len(inst.edges),
        "lengths": lengths,
        "exhaustive": spectrum.exhaustive,
    }
    return ExperimentResult(
        command=m.command,
        csv=_csv_text(["source", "length"], [[source, x] for x in lengths]),
        data=data,
    )


# ---------------------------------------------------------------------------
# chernoff


class ChernoffManifest(BaseModel):
    command: Literal["chernoff"] = "chernoff"
    n: int = Field(ge=1)
    p: float = Field(ge=0.0, le=1.0)
    a: float = Field(ge=0.0)


def run_chernoff(m: ChernoffManifest) -> ExperimentResult:
    bound = chernoff_bound(m.n, m.p, m.a)
    data = {"schema": 1, "command": m.command, "n": m.n, "p": m.p, "a": m.a,
            "bound": bound}
    return ExperimentResult(
        command=m.command,
        csv=_csv_text(["n", "p", "a", "bound"], [[m.n, m.p, m.a, bound]]),
        data=data,
    )


Manifest = Union[
    MonotoneManifest,
    SpectrumManifest,
    GiantManifest,
    ExpansionManifest,
    OracleManifest,
    ChernoffManifest,
]

RUNNERS = {
    "monotone-prob": (MonotoneManifest, run_monotone),
    "spectrum": (SpectrumManifest, run_spectrum),
    "giant": (GiantManifest, run_giant),
    "expansion": (ExpansionManifest, run_expansion),
    "oracle": (OracleManifest, run_oracle),
    "chernoff": (ChernoffManifest, run_chernoff),
}


def run_manifest(obj: dict) -> ExperimentResult:
    command = obj.get("command")
    if command not in RUNNERS:
        raise ValueError(f"unknown command {command!r}")
    cls, fn = RUNNERS[command]
    return fn(cls(**obj))
