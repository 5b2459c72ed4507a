"""Command-line entry point: plan execution, analysis, and the grade calculator.

    gradebench run --plan plan.json [--resume] [--jobs N]
    gradebench analyze --store results/ [--svg]
    gradebench gmap <f_minus> <f_circ> <f_plus> <f> [<f> ...]
    gradebench catalog [--out catalog.json]

GRADEBENCH_OUTPUT_ROOT, when set, prefixes relative store paths.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from gradebench import problems as problem_catalog
from gradebench.analysis import analyze_store
from gradebench.engine import BenchmarkPlan, PlanError, ResultStore, execute
from gradebench.grading import DegenerateReferencesError, GMap, ReferencePoints, g_value
from gradebench.reports import write_reports

EXIT_OK = 0
EXIT_PARTIAL = 1
EXIT_INVALID = 2


def _resolve_output(path_text: str) -> Path:
    path = Path(path_text)
    root = os.environ.get("GRADEBENCH_OUTPUT_ROOT")
    if root and not path.is_absolute():
        return Path(root) / path
    return path


def _load_plan(plan_path: str) -> BenchmarkPlan:
    text = Path(plan_path).read_text()
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise PlanError(f"{plan_path}:{exc.lineno}:{exc.colno}: {exc.msg}") from None
    plan = BenchmarkPlan.from_json_dict(doc)
    plan.output = str(_resolve_output(plan.output))
    return plan


def cmd_run(args) -> int:
    try:
        plan = _load_plan(args.plan)
    except (PlanError, FileNotFoundError) as exc:
        print(f"invalid plan: {exc}", file=sys.stderr)
        return EXIT_INVALID

    store_root = Path(plan.output)
    if store_root.joinpath("runs").exists() and not args.resume:
        print(
            f"output {store_root} already holds results; pass --resume to continue",
            file=sys.stderr,
        )
        return EXIT_INVALID

    store = execute(plan, jobs=args.jobs, progress=print)

    failures = []
    for pid, _ in plan.problems:
        for spec in plan.methods:
            meta = store.load_meta(pid, spec.id)
            if meta is None or not meta.get("complete"):
                failures.append((pid, spec.id, "incomplete"))
            elif meta.get("failed"):
                failures.append((pid, spec.id, meta.get("reason", "failed")))
    if failures:
        for pid, mid, reason in failures:
            print(f"FAILED cell {pid} / {mid}: {reason}", file=sys.stderr)
        return EXIT_PARTIAL
    print(f"completed: {store_root}")
    return EXIT_OK


def cmd_analyze(args) -> int:
    store = ResultStore(_resolve_output(args.store))
    if not store.plan_path().exists():
        print(f"no plan.json under {store.root}", file=sys.stderr)
        return EXIT_INVALID
    try:
        report = analyze_store(store, probe_method=args.probe)
    except (FileNotFoundError, KeyError, DegenerateReferencesError) as exc:
        print(f"analysis failed: missing or degenerate records ({exc})", file=sys.stderr)
        return EXIT_PARTIAL
    out_dir = store.root / "report"
    written = write_reports(report, out_dir, svg=args.svg)
    for name in written:
        print(out_dir / name)
    return EXIT_OK


def cmd_gmap(args) -> int:
    try:
        refs = ReferencePoints(args.f_minus, args.f_circ, args.f_plus)
        gmap = GMap.from_refs(refs)
    except DegenerateReferencesError as exc:
        print(f"invalid references: {exc}", file=sys.stderr)
        return EXIT_INVALID
    alpha = "linear" if gmap.is_linear else repr(gmap.alpha)
    print(f"rho_circ={gmap.rho_circ!r} alpha={alpha}")
    for f in args.values:
        print(f"G({f!r}) = {g_value(f, gmap)!r}")
    return EXIT_OK


def cmd_catalog(args) -> int:
    text = problem_catalog.export_catalog_json()
    if args.out:
        Path(args.out).write_text(text + "\n")
        print(args.out)
    else:
        print(text)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gradebench",
        description="Benchmark optimizers against a random-sampling-referenced grade.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="execute a benchmark plan")
    p_run.add_argument("--plan", required=True, help="path to the plan JSON document")
    p_run.add_argument("--resume", action="store_true", help="continue an existing store")
    p_run.add_argument("--jobs", type=int, default=1, help="parallel runs per batch")
    p_run.set_defaults(func=cmd_run)

    p_an = sub.add_parser("analyze", help="write analysis tables for a store")
    p_an.add_argument("--store", required=True, help="store root produced by run")
    p_an.add_argument("--svg", action="store_true", help="also emit SVG summaries")
    p_an.add_argument("--probe", default="nm", help="multimodality probe method id")
    p_an.set_defaults(func=cmd_analyze)

    p_gmap = sub.add_parser("gmap", help="grade objective values against references")
    p_gmap.add_argument("f_minus", type=float)
    p_gmap.add_argument("f_circ", type=float)
    p_gmap.add_argument("f_plus", type=float)
    p_gmap.add_argument("values", type=float, nargs="+")
    p_gmap.set_defaults(func=cmd_gmap)

    p_cat = sub.add_parser("catalog", help="export the built-in problem catalog")
    p_cat.add_argument("--out", help="write JSON here instead of stdout")
    p_cat.set_defaults(func=cmd_catalog)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
