"""HTTP service wrapping the experiment runners.

One POST endpoint per experiment command; the request body is the
manifest, the response carries the deterministic CSV text and JSON data.
The CLI is a thin client of this app (in-process by default).
"""

from __future__ import annotations

from fastapi import FastAPI, HTTPException
from pydantic import BaseModel

from . import __version__
from .errors import CapacityError, DomainError
from .experiments import (
    ChernoffManifest,
    ExpansionManifest,
    ExperimentResult,
    GiantManifest,
    MonotoneManifest,
    OracleManifest,
    SpectrumManifest,
    run_chernoff,
    run_expansion,
    run_giant,
    run_monotone,
    run_oracle,
    run_spectrum,
)


class HealthResponse(BaseModel):
    status: str = "ok"
    version: str = __version__


app = FastAPI(title="qcycles", version=__version__)


@app.get("/v1/health", response_model=HealthResponse)
def health() -> HealthResponse:
    return HealthResponse()


def _guarded(fn, manifest) -> ExperimentResult:
    try:
        return fn(manifest)
    except (DomainError, ValueError) as exc:
        raise HTTPException(status_code=422, detail=str(exc))
    except CapacityError as exc:
        raise HTTPException(status_code=413, detail=str(exc))


@app.post("/v1/monotone", response_model=ExperimentResult)
def monotone(manifest: MonotoneManifest) -> ExperimentResult:
    return _guarded(run_monotone, manifest)


@app.post("/v1/spectrum", response_model=ExperimentResult)
def spectrum(manifest: SpectrumManifest) -> ExperimentResult:
    return _guarded(run_spectrum, manifest)


@app.post("/v1/giant", response_model=ExperimentResult)
def giant(manifest: GiantManifest) -> ExperimentResult:
    return _guarded(run_giant, manifest)


@app.post("/v1/expansion", response_model=ExperimentResult)
def expansion(manifest: ExpansionManifest) -> ExperimentResult:
    return _guarded(run_expansion, manifest)


@app.post("/v1/oracle", response_model=ExperimentResult)
def oracle(manifest: OracleManifest) -> ExperimentResult:
    return _guarded(run_oracle, manifest)


@app.post("/v1/chernoff", response_model=ExperimentResult)
def chernoff(manifest: ChernoffManifest) -> ExperimentResult:
    return _guarded(run_chernoff, manifest)
