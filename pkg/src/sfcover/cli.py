"""Command-line interface: ``sfcover {plan,plan-nonuniform,generate,render,verify}``.

Exit codes: 0 success, 2 input error, 3 scenario-semantic error (e.g. blocked
start), 4 completeness check failed.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from .formats import (
    STITCHED_MAGIC,
    ScenarioError,
    atomic_write,
    dump_json,
    generated_scenario,
    load_scenario,
    read_stitched_trace,
    read_trace,
    write_stitched_trace,
    write_trace,
)
from .nonuniform import run_nonuniform
from .planner import ConfigurationError
from .render import RenderSpec, render_stitched, render_trace
from .simulator import ValidationError, execute

log = logging.getLogger("sfcover")

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_SCENARIO = 3
EXIT_LEMMA = 4

OUT_ENV = "SFCOVER_OUT"


def _out_dir(arg) -> Path:
    return Path(arg or os.environ.get(OUT_ENV) or ".")


def _report(scenario_id, metrics, ok, started, **extra) -> dict:
    report = {
        "scenario": scenario_id,
        "metrics": metrics,
        "lemma_check": "pass" if ok else "fail",
        "duration_s": round(time.perf_counter() - started, 6),
    }
    report.update(extra)
    return report


def cmd_plan(args) -> int:
    started = time.perf_counter()
    try:
        sc = load_scenario(args.scenario)
    except ScenarioError as e:
        log.error("%s", e)
        return EXIT_INPUT
    if sc.is_nonuniform:
        log.error("%s has a quadrants block; use plan-nonuniform", args.scenario)
        return EXIT_INPUT
    try:
        trace = execute(sc.field, sc.start)
    except ConfigurationError as e:
        log.error("%s", e)
        return EXIT_SCENARIO
    out = _out_dir(args.out)
    atomic_write(out / f"{sc.id}.trace.csv", write_trace(trace, sc.id))
    report = _report(sc.id, trace.metrics, trace.lemma_ok, started, k=trace.k)
    atomic_write(out / f"{sc.id}.report.json", dump_json(report))
    print(dump_json(report), end="")
    return EXIT_OK if trace.lemma_ok else EXIT_LEMMA


def cmd_plan_nonuniform(args) -> int:
    started = time.perf_counter()
    try:
        sc = load_scenario(args.scenario)
    except ScenarioError as e:
        log.error("%s", e)
        return EXIT_INPUT
    if not sc.is_nonuniform:
        log.error("%s has no quadrants block; use plan", args.scenario)
        return EXIT_INPUT
    try:
        trace = run_nonuniform(sc.plan, sc.quadrant_fields)
    except ConfigurationError as e:
        log.error("%s", e)
        return EXIT_SCENARIO
    out = _out_dir(args.out)
    atomic_write(out / f"{sc.id}.trace.csv", write_stitched_trace(trace, sc.id))
    quads = {
        q: {"k": r.k, "entry": r.entry, "lemma_check": None if r.error else ("pass" if r.lemma_ok else "fail"), "error": r.error}
        for q, r in trace.quadrants.items()
    }
    report = _report(sc.id, trace.metrics, trace.lemma_ok, started, quadrants=quads)
    atomic_write(out / f"{sc.id}.report.json", dump_json(report))
    print(dump_json(report), end="")
    return EXIT_OK if trace.lemma_ok else EXIT_LEMMA


def cmd_generate(args) -> int:
    try:
        raw = generated_scenario(args.k, args.blocked, args.seed)
    except (ValidationError, ValueError, OverflowError) as e:
        log.error("%s", e)
        return EXIT_INPUT
    path = Path(args.out) if args.out else _out_dir(None) / f"{raw['id']}.json"
    atomic_write(path, dump_json(raw))
    print(path)
    return EXIT_OK


def cmd_render(args) -> int:
    try:
        spec = RenderSpec(cell_px=args.cell_px, curve=not args.no_curve, path=not args.no_path, obstacles=not args.no_obstacles, labels=args.labels)
        text = Path(args.trace).read_text()
        sc = load_scenario(args.scenario) if args.scenario else None
        if text.startswith(STITCHED_MAGIC):
            trace, sid = read_stitched_trace(text)
            svg = render_stitched(trace, spec, sc.quadrant_fields if sc and sc.is_nonuniform else None)
        else:
            trace, sid = read_trace(text)
            field = sc.field if sc and not sc.is_nonuniform else None
            if field is not None and field.k != trace.k:
                raise ValueError("scenario and trace iterations differ")
            svg = render_trace(trace, spec, field)
    except (OSError, ValueError, KeyError, IndexError) as e:
        log.error("cannot render %s: %s", args.trace, e)
        return EXIT_INPUT
    path = Path(args.out) if args.out else _out_dir(None) / f"{sid or Path(args.trace).stem}.svg"
    atomic_write(path, svg)
    print(path)
    return EXIT_OK


def _verify_one(path: str) -> dict:
    try:
        sc = load_scenario(path)
        if sc.is_nonuniform:
            trace = run_nonuniform(sc.plan, sc.quadrant_fields)
        else:
            trace = execute(sc.field, sc.start)
    except ScenarioError as e:
        return {"file": Path(path).name, "status": "input-error", "detail": str(e)}
    except ConfigurationError as e:
        return {"file": Path(path).name, "status": "config-error", "detail": str(e)}
    m = trace.metrics
    return {
        "file": Path(path).name,
        "scenario": sc.id,
        "status": "pass" if trace.lemma_ok else "fail",
        "metrics": {k: m[k] for k in ("total_moves", "unique_visited", "revisit_count", "detected_obstacles", "coverage_ratio", "reachable_coverage")},
    }


def _percentiles(values) -> dict:
    if not values:
        return {}
    qs = np.percentile(np.asarray(values, dtype=float), [0, 50, 90, 100])
    return dict(zip(("min", "p50", "p90", "max"), (round(float(q), 6) for q in qs)))


def cmd_verify(args) -> int:
    root = Path(args.scenario)
    if not root.is_dir():
        log.error("%s is not a directory", root)
        return EXIT_INPUT
    files = sorted(str(p) for p in root.glob("*.json"))
    if not files:
        log.error("no scenarios in %s", root)
        return EXIT_INPUT
    if args.jobs > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            results = list(pool.map(_verify_one, files, chunksize=16))
    else:
        results = [_verify_one(f) for f in files]
    counts = {}
    for r in results:
        counts[r["status"]] = counts.get(r["status"], 0) + 1
    ran = [r for r in results if "metrics" in r]
    summary = {
        "scenarios": len(results),
        "counts": dict(sorted(counts.items())),
        "metrics": {
            key: _percentiles([r["metrics"][key] for r in ran if r["metrics"][key] is not None])
            for key in ("total_moves", "revisit_count", "detected_obstacles", "coverage_ratio", "reachable_coverage")
        },
        "results": results,
    }
    text = dump_json(summary)
    if args.out:
        atomic_write(Path(args.out), text)
    else:
        print(text, end="")
    if counts.get("fail"):
        return EXIT_LEMMA
    if counts.get("config-error") or counts.get("input-error"):
        return EXIT_SCENARIO
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="sfcover", description="Hilbert-curve coverage with online obstacle evasion.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("plan", help="run one scenario, write trace and report")
    p.add_argument("--scenario", required=True)
    p.add_argument("--out", help=f"output directory (default ${OUT_ENV} or .)")
    p.set_defaults(func=cmd_plan)

    p = sub.add_parser("plan-nonuniform", help="run a four-quadrant scenario")
    p.add_argument("--scenario", required=True)
    p.add_argument("--out", help=f"output directory (default ${OUT_ENV} or .)")
    p.set_defaults(func=cmd_plan_nonuniform)

    p = sub.add_parser("generate", help="write a seeded sparse-obstacle scenario")
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--blocked", type=int, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out", help="scenario file path")
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("render", help="draw a trace as SVG")
    p.add_argument("--trace", required=True)
    p.add_argument("--scenario", help="scenario file for ground-truth obstacles")
    p.add_argument("--out", help="SVG path")
    p.add_argument("--cell-px", type=int, default=24)
    p.add_argument("--labels", action="store_true", help="print waypoint numbers")
    p.add_argument("--no-curve", action="store_true")
    p.add_argument("--no-path", action="store_true")
    p.add_argument("--no-obstacles", action="store_true")
    p.set_defaults(func=cmd_render)

    p = sub.add_parser("verify", help="check completeness over a directory of scenarios")
    p.add_argument("--scenario", required=True, help="directory of scenario files")
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--out", help="summary JSON path (default stdout)")
    p.set_defaults(func=cmd_verify)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_INPUT if e.code else EXIT_OK
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, format="sfcover: %(message)s")
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
