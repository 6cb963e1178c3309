import json
import math

import pytest
from fastapi.testclient import TestClient

from qcycles.cli import main, parse_lengths, parse_seeds
from qcycles.experiments import (
    ExpansionManifest,
    GiantManifest,
    MonotoneManifest,
    OracleManifest,
    SpectrumManifest,
    chernoff_bound,
    run_expansion,
    run_giant,
    run_monotone,
    run_oracle,
    run_spectrum,
)
from qcycles.errors import DomainError
from qcycles.service import app

client = TestClient(app)


# ---------------------------------------------------------------------------
# chernoff utility


def test_chernoff_values():
    assert chernoff_bound(100, 0.5, 0) == 2.0
    assert chernoff_bound(100, 0.5, 15) == pytest.approx(2 * math.exp(-1.5))
    assert chernoff_bound(100, 0.5, 50) == pytest.approx(2 * math.exp(-50 / 3))
    with pytest.raises(DomainError):
        chernoff_bound(100, 0.5, 51)
    with pytest.raises(DomainError):
        chernoff_bound(100, 0.5, -1)


# ---------------------------------------------------------------------------
# runners


def test_run_monotone_grid():
    m = MonotoneManifest(
        cells=[{"dim": 2, "p": 0.5}, {"dim": 1, "p": 0.3}], samples=20000
    )
    res = run_monotone(m)
    lines = res.csv.strip().splitlines()
    assert lines[0].startswith("dim,p,samples")
    assert len(lines) == 3
    cells = res.data["cells"]
    assert all(c["within_3sigma"] for c in cells)
    assert cells[1]["exact"] == pytest.approx(0.3)
    # lower bound column never exceeds the exact column
    for c in cells:
        if c["lower_bound"] is not None:
            assert c["lower_bound"] <= c["exact"]


def test_run_spectrum_trivial_p():
    m = SpectrumManifest(d=8, p=1.0, seeds=[0, 1], lengths=[4, 8, 16])
    res = run_spectrum(m)
    assert res.data["coverage"] == 1.0
    m0 = SpectrumManifest(d=8, p=0.0, seeds=[0, 1], lengths=[4, 8, 16])
    assert run_spectrum(m0).data["coverage"] == 0.0


def test_run_spectrum_with_witnesses():
    m = SpectrumManifest(
        d=8, p=1.0, seeds=[3], lengths=[4, 10], include_witnesses=True
    )
    res = run_spectrum(m)
    wit = res.data["runs"][0]["witnesses"]
    assert set(wit) == {"4", "10"}
    assert len(wit["10"]) == 10
    assert all(len(bits) == 8 for bits in wit["10"])


def test_run_spectrum_c_alias():
    m = SpectrumManifest(d=8, c=8.0, seeds=[0], lengths=[4])
    res = run_spectrum(m)
    assert res.data["runs"][0]["p"] == 1.0
    with pytest.raises(ValueError):
        SpectrumManifest(d=8, p=0.5, c=4.0, seeds=[0], lengths=[4])
    with pytest.raises(ValueError):
        SpectrumManifest(d=8, p=0.5, seeds=[0], lengths=[5])


def test_run_giant():
    m = GiantManifest(d=8, p=1.0, seeds=[0, 1, 2])
    res = run_giant(m)
    assert res.data["present_count"] == 3
    for row in res.data["rows"]:
        assert row["fraction"] == 1.0 and row["largest"] == 256
    m0 = GiantManifest(d=8, p=0.0, seeds=[0], threshold=0.01)
    assert run_giant(m0).data["present_count"] == 0


def test_run_expansion():
    m = ExpansionManifest(d=8, p=1.0, seeds=[0], sets_per_seed=20,
                          size_min=4, size_max=16)
    res = run_expansion(m)
    assert res.data["set_count"] == 20
    assert res.data["min_ratio"] > 0


def test_run_oracle_builtin():
    res = run_oracle(OracleManifest(builtin="q3"))
    assert res.data["lengths"] == [4, 6, 8]
    res4 = run_oracle(OracleManifest(builtin="q4"))
    assert res4.data["lengths"] == list(range(4, 17, 2))


def test_run_oracle_sampled_and_text():
    res = run_oracle(OracleManifest(d=3, p=1.0, seed=5))
    assert res.data["lengths"] == [4, 6, 8]
    text = "2\n00 1\n00 2\n01 1\n10 2\n"
    res2 = run_oracle(OracleManifest(instance_text=text))
    assert res2.data["lengths"] == [4]
    with pytest.raises(ValueError):
        OracleManifest(builtin="q3", seed=1, d=3, p=0.5)


def test_determinism_byte_identical():
    m = SpectrumManifest(d=10, p=0.5, seeds=[0, 1, 2], lengths=[4, 8, 14, 30])
    a, b = run_spectrum(m), run_spectrum(m)
    assert a.csv == b.csv
    assert a.data_bytes() == b.data_bytes()
    g = GiantManifest(d=10, p=0.4, seeds=[5, 6])
    assert run_giant(g).data_bytes() == run_giant(g).data_bytes()


def test_jobs_worker_pool_matches_serial():
    m1 = SpectrumManifest(d=8, p=0.6, seeds=[0, 1, 2, 3], lengths=[4, 8], jobs=1)
    m2 = SpectrumManifest(d=8, p=0.6, seeds=[0, 1, 2, 3], lengths=[4, 8], jobs=2)
    assert run_spectrum(m1).data_bytes() == run_spectrum(m2).data_bytes()


# ---------------------------------------------------------------------------
# service endpoints


def test_health():
    resp = client.get("/v1/health")
    assert resp.status_code == 200
    assert resp.json()["status"] == "ok"


def test_endpoint_monotone():
    resp = client.post(
        "/v1/monotone",
        json={"command": "monotone-prob", "cells": [{"dim": 2, "p": 0.5}],
              "samples": 5000},
    )
    assert resp.status_code == 200
    body = resp.json()
    assert body["command"] == "monotone-prob"
    assert body["data"]["schema"] == 1
    assert body["csv"].startswith("dim,")


def test_endpoint_validation_errors():
    resp = client.post(
        "/v1/spectrum",
        json={"command": "spectrum", "d": 8, "p": 0.5, "seeds": [0],
              "lengths": [5]},
    )
    assert resp.status_code == 422
    resp = client.post("/v1/chernoff",
                       json={"command": "chernoff", "n": 10, "p": 0.5, "a": 9})
    assert resp.status_code == 422


def test_endpoint_oracle_and_chernoff():
    resp = client.post("/v1/oracle", json={"command": "oracle", "builtin": "q3"})
    assert resp.status_code == 200
    assert resp.json()["data"]["lengths"] == [4, 6, 8]
    resp = client.post("/v1/chernoff",
                       json={"command": "chernoff", "n": 100, "p": 0.5, "a": 15})
    assert resp.status_code == 200
    assert resp.json()["data"]["bound"] == pytest.approx(2 * math.exp(-1.5))


# ---------------------------------------------------------------------------
# CLI


def test_parse_helpers():
    assert parse_seeds("0:5") == [0, 1, 2, 3, 4]
    assert parse_seeds("3,9,1") == [3, 9, 1]
    assert parse_lengths("4:10") == [4, 6, 8, 10]
    assert parse_lengths("4:16:4") == [4, 8, 12, 16]
    assert parse_lengths("4,8,20") == [4, 8, 20]
    with pytest.raises(ValueError):
        parse_lengths("4:10:3")


def test_cli_oracle(tmp_path, capsys):
    rc = main(["oracle", "--builtin", "q3", "--out", str(tmp_path)])
    assert rc == 0
    assert "spectrum [4, 6, 8]" in capsys.readouterr().out
    data = json.loads((tmp_path / "oracle.json").read_text())
    assert data["lengths"] == [4, 6, 8]
    assert (tmp_path / "oracle.csv").read_text().splitlines()[0] == "source,length"


def test_cli_spectrum_with_witness_sidecar(tmp_path):
    rc = main([
        "spectrum", "--d", "8", "--p", "1.0", "--seeds", "0:2",
        "--lengths", "4:8", "--witnesses", "--out", str(tmp_path),
    ])
    assert rc == 0
    data = json.loads((tmp_path / "spectrum.json").read_text())
    assert data["coverage"] == 1.0
    sidecar = json.loads((tmp_path / "spectrum_witnesses.json").read_text())
    assert set(sidecar) == {"0", "1"}
    for run in data["runs"]:
        assert "witnesses" not in run


def test_cli_rerun_byte_identical(tmp_path):
    argv = ["spectrum", "--d", "10", "--c", "5.0", "--seeds", "0:3",
            "--lengths", "4:12"]
    main(argv + ["--out", str(tmp_path / "a")])
    main(argv + ["--out", str(tmp_path / "b")])
    for name in ("spectrum.csv", "spectrum.json"):
        assert (tmp_path / "a" / name).read_bytes() == (
            tmp_path / "b" / name
        ).read_bytes()


def test_cli_giant_and_expansion(tmp_path):
    rc = main(["giant", "--d", "8", "--p", "1.0", "--seeds", "0:2",
               "--out", str(tmp_path)])
    assert rc == 0
    rows = (tmp_path / "giant.csv").read_text().splitlines()
    assert rows[0].startswith("seed,d,p,retained,largest")
    assert len(rows) == 3
    rc = main(["expansion", "--d", "8", "--p", "0.9", "--seeds", "0:1",
               "--sets", "5", "--out", str(tmp_path)])
    assert rc == 0
    data = json.loads((tmp_path / "expansion.json").read_text())
    assert data["set_count"] == 5


def test_cli_spectrum_paper_profile(tmp_path):
    rc = main(["spectrum", "--d", "8", "--p", "1.0", "--seeds", "0:1",
               "--lengths", "4,6", "--profile", "paper", "--out", str(tmp_path)])
    assert rc == 0
    data = json.loads((tmp_path / "spectrum.json").read_text())
    assert data["coverage"] == 1.0
    header, *rows = (tmp_path / "spectrum.csv").read_text().splitlines()
    assert header == "seed,d,p,length,found,strategy,witness_digest"
    assert all(row.split(",")[0] == "0" for row in rows)  # seed on every row


def test_cli_monotone_defaults(tmp_path):
    rc = main(["monotone-prob", "--cells", "2:0.5", "--samples", "5000",
               "--out", str(tmp_path)])
    assert rc == 0
    header, row = (tmp_path / "monotone_prob.csv").read_text().splitlines()
    assert row.split(",")[-1] == "1"  # within 3 sigma


def test_cli_oracle_fixture_file(tmp_path):
    import pathlib

    fixture = pathlib.Path(__file__).parent / "fixtures" / "q3_full.edges"
    rc = main(["oracle", "--instance", str(fixture), "--out", str(tmp_path)])
    assert rc == 0
    data = json.loads((tmp_path / "oracle.json").read_text())
    assert data["lengths"] == [4, 6, 8]


def test_run_expansion_singletons_at_p1():
    m = ExpansionManifest(d=8, p=1.0, seeds=[0], sets_per_seed=10,
                          size_min=1, size_max=1)
    res = run_expansion(m)
    assert res.data["min_ratio"] == 8.0  # ratio of a singleton is its degree


def test_run_giant_jobs_matches_serial():
    m1 = GiantManifest(d=9, p=0.4, seeds=[0, 1, 2], jobs=1)
    m2 = GiantManifest(d=9, p=0.4, seeds=[0, 1, 2], jobs=2)
    assert run_giant(m1).data_bytes() == run_giant(m2).data_bytes()
