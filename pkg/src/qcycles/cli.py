"""Command-line client for the experiment service.

Each subcommand assembles a manifest and POSTs it to the service - by
default the in-process app (no socket), or a remote instance via
--server.  Data outputs (CSV + JSON) are written under --out and are
byte-stable across reruns of the same manifest; timing and progress go to
stderr via logging.
"""

from __future__ import annotations

import argparse
import asyncio
import json
import logging
import sys
from pathlib import Path

import httpx

log = logging.getLogger("qcycles")

ENDPOINTS = {
    "monotone-prob": "/v1/monotone",
    "spectrum": "/v1/spectrum",
    "giant": "/v1/giant",
    "expansion": "/v1/expansion",
    "oracle": "/v1/oracle",
    "chernoff": "/v1/chernoff",
}


def parse_seeds(text: str) -> list[int]:
    """Seed lists: "0:50" (half-open range) or "1,5,9"."""
    if ":" in text:
        lo, hi = text.split(":")
        return list(range(int(lo), int(hi)))
    return [int(x) for x in text.split(",") if x]


def parse_lengths(text: str) -> list[int]:
    """Length sets: "4:40" or "4:40:4" (inclusive band of even lengths) or
    an explicit comma list."""
    if ":" in text:
        parts = [int(x) for x in text.split(":")]
        lo, hi = parts[0], parts[1]
        step = parts[2] if len(parts) > 2 else 2
        if step % 2:
            raise ValueError("length step must be even")
        return list(range(lo, hi + 1, step))
    return [int(x) for x in text.split(",") if x]


def post_manifest(command: str, manifest: dict, server: str | None) -> dict:
    path = ENDPOINTS[command]
    if server:
        with httpx.Client(base_url=server, timeout=None) as client:
            resp = client.post(path, json=manifest)
    else:
        from .service import app

        async def _call() -> httpx.Response:
            transport = httpx.ASGITransport(app=app)
            async with httpx.AsyncClient(
                transport=transport, base_url="http://qcycles.local", timeout=None
            ) as client:
                return await client.post(path, json=manifest)

        resp = asyncio.run(_call())
    if resp.status_code != 200:
        raise SystemExit(f"{command} failed [{resp.status_code}]: {resp.text}")
    return resp.json()


def write_outputs(out_dir: Path, command: str, payload: dict) -> None:
    out_dir.mkdir(parents=True, exist_ok=True)
    stem = command.replace("-", "_")
    data = payload["data"]
    witnesses = {}
    for run in data.get("runs", []):
        if isinstance(run, dict) and "witnesses" in run:
            witnesses[str(run.get("seed"))] = run.pop("witnesses")
    (out_dir / f"{stem}.csv").write_text(payload["csv"])
    (out_dir / f"{stem}.json").write_bytes(
        json.dumps(data, sort_keys=True, indent=1).encode() + b"\n"
    )
    if witnesses:
        (out_dir / f"{stem}_witnesses.json").write_bytes(
            json.dumps(witnesses, sort_keys=True, indent=1).encode() + b"\n"
        )
    log.info("wrote %s/%s.{csv,json}", out_dir, stem)


def _add_common(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--out", default="out", help="output directory")
    sub.add_argument("--server", default=None,
                     help="base URL of a running service (default: in-process)")
    sub.add_argument("--jobs", type=int, default=1, help="worker pool size")


def _add_grid(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--d", type=int, required=True, help="cube dimension")
    group = sub.add_mutually_exclusive_group(required=True)
    group.add_argument("--p", type=float, help="edge retention probability")
    group.add_argument("--c", type=float, help="mean degree target (p = c/d)")
    sub.add_argument("--seeds", type=parse_seeds, required=True,
                     help='seed range "0:50" or list "1,2,7"')


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="qcycles",
        description="Cycle-spectrum experiments on percolated hypercubes",
    )
    ap.add_argument("-v", "--verbose", action="store_true")
    sp = ap.add_subparsers(dest="command", required=True)

    mono = sp.add_parser("monotone-prob",
                         help="greedy monotone-path Monte Carlo vs exact formula")
    mono.add_argument("--cells", required=True,
                      help='grid cells "dim:p,dim:p", e.g. "2:0.5,3:0.3333"')
    mono.add_argument("--samples", type=int, default=100000)
    mono.add_argument("--seed0", type=int, default=0)
    _add_common(mono)

    spec = sp.add_parser("spectrum", help="per-length builder success rates")
    _add_grid(spec)
    spec.add_argument("--lengths", type=parse_lengths, required=True,
                      help='band "4:40[:step]" or list "4,6,8"')
    spec.add_argument("--epsilon", type=float, default=0.5)
    spec.add_argument("--profile", choices=["small-d", "paper"],
                      default="small-d")
    spec.add_argument("--tri", action="store_true",
                      help="attach the tri-partition vertex model")
    spec.add_argument("--witnesses", action="store_true",
                      help="dump witness cycles to a sidecar file")
    _add_common(spec)

    giant = sp.add_parser("giant", help="component structure per seed")
    _add_grid(giant)
    giant.add_argument("--threshold", type=float, default=0.05)
    giant.add_argument("--keep-q", type=float, default=None,
                       help="vertex retention probability (mixed model)")
    giant.add_argument("--diameter", action="store_true",
                       help="include a double-sweep diameter lower bound")
    _add_common(giant)

    exp = sp.add_parser("expansion", help="sampled connected-set expansion ratios")
    _add_grid(exp)
    exp.add_argument("--sets", type=int, default=100, help="sets per seed")
    exp.add_argument("--size-min", type=int, default=None)
    exp.add_argument("--size-max", type=int, default=None)
    _add_common(exp)

    orc = sp.add_parser("oracle", help="exact cycle spectrum of an instance")
    src = orc.add_mutually_exclusive_group(required=True)
    src.add_argument("--builtin", choices=["q2", "q3", "q4"])
    src.add_argument("--instance", type=Path, help="edge-list fixture file")
    src.add_argument("--seed", type=int, help="sample a percolated instance")
    orc.add_argument("--d", type=int, default=None)
    orc.add_argument("--p", type=float, default=None)
    _add_common(orc)

    chern = sp.add_parser("chernoff", help="binomial deviation bound")
    chern.add_argument("--n", type=int, required=True)
    chern.add_argument("--p", type=float, required=True)
    chern.add_argument("--a", type=float, required=True)
    _add_common(chern)

    serve = sp.add_parser("serve", help="run the HTTP service")
    serve.add_argument("--host", default="127.0.0.1")
    serve.add_argument("--port", type=int, default=8000)
    return ap


def manifest_from_args(args: argparse.Namespace) -> dict:
    cmd = args.command
    if cmd == "monotone-prob":
        cells = []
        for part in args.cells.split(","):
            dim, p = part.split(":")
            cells.append({"dim": int(dim), "p": float(p)})
        return {"command": cmd, "cells": cells, "samples": args.samples,
                "seed0": args.seed0, "jobs": args.jobs}
    if cmd == "spectrum":
        return {"command": cmd, "d": args.d, "p": args.p, "c": args.c,
                "seeds": args.seeds, "lengths": args.lengths,
                "epsilon": args.epsilon, "profile": args.profile,
                "tri_partition": args.tri, "include_witnesses": args.witnesses,
                "jobs": args.jobs}
    if cmd == "giant":
        return {"command": cmd, "d": args.d, "p": args.p, "c": args.c,
                "seeds": args.seeds, "threshold": args.threshold,
                "keep_q": args.keep_q, "with_diameter": args.diameter,
                "jobs": args.jobs}
    if cmd == "expansion":
        return {"command": cmd, "d": args.d, "p": args.p, "c": args.c,
                "seeds": args.seeds, "sets_per_seed": args.sets,
                "size_min": args.size_min, "size_max": args.size_max,
                "jobs": args.jobs}
    if cmd == "oracle":
        manifest: dict = {"command": cmd}
        if args.builtin:
            manifest["builtin"] = args.builtin
        elif args.instance:
            manifest["instance_text"] = args.instance.read_text()
        else:
            manifest.update({"seed": args.seed, "d": args.d, "p": args.p})
        return manifest
    if cmd == "chernoff":
        return {"command": cmd, "n": args.n, "p": args.p, "a": args.a}
    raise ValueError(cmd)


def summarize(command: str, data: dict) -> str:
    if command == "monotone-prob":
        bad = [c for c in data["cells"] if not c["within_3sigma"]]
        return f"monotone-prob: {len(data['cells'])} cells, " \
               f"{len(bad)} outside 3 sigma"
    if command == "spectrum":
        return f"spectrum: coverage {data['coverage']:.4f} over " \
               f"{len(data['per_length'])} lengths x {len(data['runs'])} seeds"
    if command == "giant":
        return f"giant: present in {data['present_count']}/{len(data['rows'])} runs"
    if command == "expansion":
        return f"expansion: min ratio {data['min_ratio']} over " \
               f"{data['set_count']} sets"
    if command == "oracle":
        return f"oracle: spectrum {data['lengths']}"
    if command == "chernoff":
        return f"chernoff: bound {data['bound']!r}"
    return command


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        stream=sys.stderr,
        level=logging.DEBUG if args.verbose else logging.INFO,
        format="%(asctime)s %(name)s %(levelname)s %(message)s",
    )
    if args.command == "serve":
        import uvicorn

        from .service import app

        uvicorn.run(app, host=args.host, port=args.port)
        return 0
    manifest = manifest_from_args(args)
    payload = post_manifest(args.command, manifest, args.server)
    write_outputs(Path(args.out), args.command, payload)
    print(summarize(args.command, payload["data"]))
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
