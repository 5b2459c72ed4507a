"""Benchmark orchestration: reference estimation, method cells under the
run-convergence controller, the best-known registry, and persistent storage.

Storage is raw-fitness-first: grades are never persisted, only derived from
stored objective values under the current reference map, so lowering the
best-known anchor never rewrites history.  Layout under the store root:

    plan.json                    the executed plan
    refs/<problem>.json          reference estimates + convergence flags
    runs/<problem>/<method>.jsonl    one JSON object per run, append-only
    runs/<problem>/<method>.meta.json   cell state: batches, convergence
    timings/<problem>.json       optional timing measurements

Problems and methods execute in plan order; parallelism happens inside a
batch of runs, so reported numbers are independent of the worker count.
"""

from __future__ import annotations

import json
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from gradebench import problems as problem_catalog
from gradebench.grading import DegenerateReferencesError, GMap, ReferencePoints, g_value
from gradebench.optimizers import OptimizerSpec, RunTrace, optimize
from gradebench.references import (
    ConvergenceConfig,
    MedianTracker,
    converged,
    derive_seed,
    estimate_f_circ,
    estimate_f_plus,
    sample_uniform,
)


class PlanError(ValueError):
    """The plan document is structurally invalid."""


def _require_keys(obj: dict, allowed: set[str], required: set[str], where: str):
    unknown = set(obj) - allowed
    if unknown:
        raise PlanError(f"{where}: unknown keys {sorted(unknown)}")
    missing = required - set(obj)
    if missing:
        raise PlanError(f"{where}: missing keys {sorted(missing)}")


@dataclass(frozen=True)
class TimingConfig:
    enabled: bool = False
    runs: int = 3
    eval_samples: int = 200


@dataclass
class BenchmarkPlan:
    problems: list[tuple[str, int]]  # (problem id, budget)
    methods: list[OptimizerSpec]
    convergence: ConvergenceConfig
    master_seed: int
    output: str
    timing: TimingConfig = field(default_factory=TimingConfig)

    @classmethod
    def from_json_dict(cls, doc: dict) -> "BenchmarkPlan":
        _require_keys(
            doc,
            {"problems", "methods", "convergence", "master_seed", "output", "timing"},
            {"problems", "methods", "master_seed", "output"},
            "plan",
        )
        problems = []
        for i, entry in enumerate(doc["problems"]):
            _require_keys(entry, {"id", "budget"}, {"id", "budget"}, f"plan.problems[{i}]")
            budget = entry["budget"]
            if not isinstance(budget, int) or budget < 1:
                raise PlanError(f"plan.problems[{i}]: budget must be a positive integer")
            problem_catalog.get_problem(entry["id"])  # raises on unknown id
            problems.append((entry["id"], budget))
        if not problems:
            raise PlanError("plan.problems: need at least one problem")

        methods = []
        for i, entry in enumerate(doc["methods"]):
            _require_keys(entry, {"id", "params", "command"}, {"id"}, f"plan.methods[{i}]")
            try:
                methods.append(
                    OptimizerSpec(
                        entry["id"],
                        params=entry.get("params", {}),
                        command=entry.get("command"),
                    )
                )
            except ValueError as exc:
                raise PlanError(f"plan.methods[{i}]: {exc}") from None
        ids = [m.id for m in methods]
        if len(set(ids)) != len(ids):
            raise PlanError("plan.methods: method ids must be unique")
        if not methods:
            raise PlanError("plan.methods: need at least one method")

        conv_doc = doc.get("convergence", {})
        _require_keys(
            conv_doc,
            {"batch_size", "window", "eps", "min_runs", "max_runs"},
            set(),
            "plan.convergence",
        )
        try:
            convergence = ConvergenceConfig(**conv_doc)
        except ValueError as exc:
            raise PlanError(f"plan.convergence: {exc}") from None

        timing_doc = doc.get("timing", {})
        _require_keys(timing_doc, {"enabled", "runs", "eval_samples"}, set(), "plan.timing")
        timing = TimingConfig(**timing_doc)

        if not isinstance(doc["master_seed"], int):
            raise PlanError("plan.master_seed must be an integer")
        return cls(
            problems=problems,
            methods=methods,
            convergence=convergence,
            master_seed=doc["master_seed"],
            output=doc["output"],
            timing=timing,
        )

    def to_json_dict(self) -> dict:
        return {
            "problems": [{"id": pid, "budget": b} for pid, b in self.problems],
            "methods": [
                {"id": m.id}
                | ({"params": m.params} if m.params else {})
                | ({"command": m.command} if m.command else {})
                for m in self.methods
            ],
            "convergence": self.convergence.to_json_dict(),
            "master_seed": self.master_seed,
            "output": self.output,
            "timing": {
                "enabled": self.timing.enabled,
                "runs": self.timing.runs,
                "eval_samples": self.timing.eval_samples,
            },
        }


@dataclass
class ProblemRefs:
    """Loaded reference state for one problem; f_minus is the live registry."""

    problem_id: str
    f_plus: float
    f_circ: dict[int, float]  # stage percent -> value
    f_minus: float
    f_minus_source: str
    flags: dict

    def gmap(self, stage: int = 100) -> GMap:
        return GMap.from_refs(
            ReferencePoints(self.f_minus, self.f_circ[stage], self.f_plus)
        )


def g_of_record(trace: RunTrace, stage: int, refs: ProblemRefs) -> float:
    """Grade of a stored run's stage fitness under the current references."""
    return g_value(trace.stage_fitness[stage], refs.gmap(100))


class ResultStore:
    def __init__(self, root):
        self.root = Path(root)

    # -- paths ----------------------------------------------------------
    def plan_path(self) -> Path:
        return self.root / "plan.json"

    def refs_path(self, problem_id: str) -> Path:
        return self.root / "refs" / f"{problem_id}.json"

    def runs_path(self, problem_id: str, method_id: str) -> Path:
        return self.root / "runs" / problem_id / f"{method_id}.jsonl"

    def meta_path(self, problem_id: str, method_id: str) -> Path:
        return self.root / "runs" / problem_id / f"{method_id}.meta.json"

    def timing_path(self, problem_id: str) -> Path:
        return self.root / "timings" / f"{problem_id}.json"

    # -- plan -----------------------------------------------------------
    def write_plan(self, plan: BenchmarkPlan) -> None:
        self.root.mkdir(parents=True, exist_ok=True)
        self.plan_path().write_text(json.dumps(plan.to_json_dict(), indent=2))

    def load_plan(self) -> BenchmarkPlan:
        return BenchmarkPlan.from_json_dict(json.loads(self.plan_path().read_text()))

    # -- references / registry ------------------------------------------
    def write_refs(self, problem_id: str, doc: dict) -> None:
        path = self.refs_path(problem_id)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(json.dumps(doc, indent=2))

    def has_refs(self, problem_id: str) -> bool:
        return self.refs_path(problem_id).exists()

    def load_refs_doc(self, problem_id: str) -> dict:
        return json.loads(self.refs_path(problem_id).read_text())

    def load_runs(self, problem_id: str, method_id: str) -> list[RunTrace]:
        path = self.runs_path(problem_id, method_id)
        if not path.exists():
            return []
        traces = []
        with path.open() as fh:
            for line in fh:
                if line.strip():
                    traces.append(RunTrace.from_json_dict(json.loads(line)))
        return traces

    def append_runs(self, problem_id: str, method_id: str, traces: list[RunTrace]) -> None:
        path = self.runs_path(problem_id, method_id)
        path.parent.mkdir(parents=True, exist_ok=True)
        with path.open("a") as fh:
            for trace in traces:
                fh.write(json.dumps(trace.to_json_dict()) + "\n")

    def load_meta(self, problem_id: str, method_id: str) -> dict | None:
        path = self.meta_path(problem_id, method_id)
        if not path.exists():
            return None
        return json.loads(path.read_text())

    def write_meta(self, problem_id: str, method_id: str, doc: dict) -> None:
        path = self.meta_path(problem_id, method_id)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(json.dumps(doc, indent=2))

    def method_ids(self, problem_id: str) -> list[str]:
        d = self.root / "runs" / problem_id
        if not d.exists():
            return []
        return sorted(p.stem for p in d.glob("*.jsonl"))

    def problem_ids(self) -> list[str]:
        d = self.root / "refs"
        if not d.exists():
            return []
        return sorted(p.stem for p in d.glob("*.json"))

    def current_refs(self, problem_id: str) -> ProblemRefs:
        """References with the registry minimum recomputed over everything
        stored, so the invariant holds by construction."""
        doc = self.load_refs_doc(problem_id)
        f_minus = doc["initial_f_minus"]
        source = doc["initial_f_minus_source"]
        for method_id in self.method_ids(problem_id):
            for trace in self.load_runs(problem_id, method_id):
                if not trace.failed and trace.best < f_minus:
                    f_minus = trace.best
                    source = f"run:{method_id}"
        return ProblemRefs(
            problem_id=problem_id,
            f_plus=doc["f_plus"]["f_plus"],
            f_circ={10: doc["f_circ"]["f_circ_10"], 50: doc["f_circ"]["f_circ_50"], 100: doc["f_circ"]["f_circ_100"]},
            f_minus=f_minus,
            f_minus_source=source,
            flags={
                "f_plus_converged": doc["f_plus"]["converged"],
                "f_plus_degenerate": doc["f_plus"]["degenerate"],
                "f_circ_converged": doc["f_circ"]["converged"],
            },
        )

    def write_timing(self, problem_id: str, doc: dict) -> None:
        path = self.timing_path(problem_id)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(json.dumps(doc, indent=2))

    def load_timing(self, problem_id: str) -> dict | None:
        path = self.timing_path(problem_id)
        if not path.exists():
            return None
        return json.loads(path.read_text())


def _run_cell_star(args):
    problem, spec, budget, seed = args
    return optimize(spec, problem.fresh(), budget, seed)


class _BatchRunner:
    """Runs one batch of independent runs, inline or on a process pool."""

    def __init__(self, jobs: int = 1):
        self.jobs = max(1, jobs)
        self._pool = None

    def __enter__(self):
        if self.jobs > 1:
            self._pool = ProcessPoolExecutor(max_workers=self.jobs)
        return self

    def __exit__(self, *exc):
        if self._pool is not None:
            self._pool.shutdown()
        return False

    def map(self, fn, args_list):
        if self._pool is None:
            return [fn(a) for a in args_list]
        return list(self._pool.map(fn, args_list, chunksize=1))


def _estimate_references(problem, budget, cfg, master_seed, runner) -> dict:
    fplus = estimate_f_plus(
        problem.fresh(), cfg, derive_seed(master_seed, "f-plus", problem.id)
    )
    fcirc = estimate_f_circ(
        problem.fresh(),
        budget,
        cfg,
        derive_seed(master_seed, "f-circ", problem.id),
        pmap=runner.map,
    )
    candidates = [
        (fplus.min_observed, "uniform-sample"),
        (fcirc.min_observed, "rs-reference"),
    ]
    if problem.known_best is not None:
        candidates.append((problem.known_best, "known-best"))
    f_minus, source = min(candidates, key=lambda t: t[0])
    return {
        "problem_id": problem.id,
        "budget": budget,
        "f_plus": fplus.to_json_dict(),
        "f_circ": fcirc.to_json_dict(),
        "initial_f_minus": f_minus,
        "initial_f_minus_source": source,
        "known_best": problem.known_best,
    }


def _cell_converged_state(finals_tracker: MedianTracker, refs: ProblemRefs, cfg):
    gmap = refs.gmap(100)
    transform = lambda f: g_value(f, gmap)  # noqa: E731
    median_g = finals_tracker.median(transform)
    window_range = finals_tracker.window_range(cfg.window, transform)
    done = converged(finals_tracker, cfg, transform=transform)
    return median_g, window_range, done


def execute(plan: BenchmarkPlan, *, jobs: int = 1, progress=None) -> ResultStore:
    """Run the full benchmark matrix; resumable, idempotent on completed cells."""
    store = ResultStore(plan.output)
    store.write_plan(plan)
    cfg = plan.convergence
    say = progress or (lambda msg: None)

    with _BatchRunner(jobs) as runner:
        for problem_id, budget in plan.problems:
            problem = problem_catalog.get_problem(problem_id)
            if not store.has_refs(problem_id):
                say(f"[{problem_id}] estimating references")
                refs_doc = _estimate_references(problem, budget, cfg, plan.master_seed, runner)
                store.write_refs(problem_id, refs_doc)
                say(
                    f"[{problem_id}] f+={refs_doc['f_plus']['f_plus']:.6g} "
                    f"({refs_doc['f_plus']['trials_used']} trials), "
                    f"f°={refs_doc['f_circ']['f_circ_100']:.6g} "
                    f"({refs_doc['f_circ']['runs_used']} runs)"
                )

            for spec in plan.methods:
                _run_cell(store, problem, spec, budget, cfg, plan.master_seed, runner, say)

            if plan.timing.enabled:
                _measure_problem_timing(store, problem, plan, say)

    return store


def _run_cell(store, problem, spec, budget, cfg, master_seed, runner, say):
    problem_id, method_id = problem.id, spec.id
    meta = store.load_meta(problem_id, method_id)
    if meta is not None and meta.get("complete"):
        say(f"[{problem_id} / {method_id}] already complete, skipping")
        return

    existing = store.load_runs(problem_id, method_id)
    tracker = MedianTracker()
    for trace in existing:
        tracker.append(trace.stage_fitness[100])
    batch_history = (meta or {}).get("batches", [])

    while True:
        try:
            refs = store.current_refs(problem_id)
            refs.gmap(100)  # validates ordering
        except (DegenerateReferencesError, KeyError) as exc:
            store.write_meta(
                problem_id,
                method_id,
                {
                    "complete": True,
                    "failed": True,
                    "reason": f"degenerate references: {exc}",
                    "runs": len(tracker),
                    "batches": batch_history,
                },
            )
            say(f"[{problem_id} / {method_id}] FAILED: degenerate references")
            return

        if len(tracker) >= cfg.min_runs:
            median_g, window_range, done = _cell_converged_state(tracker, refs, cfg)
            if done or len(tracker) >= cfg.max_runs:
                store.write_meta(
                    problem_id,
                    method_id,
                    {
                        "complete": True,
                        "failed": False,
                        "converged": bool(done),
                        "max_runs_hit": len(tracker) >= cfg.max_runs and not done,
                        "runs": len(tracker),
                        "median_g100": median_g,
                        "window_range": window_range,
                        "batches": batch_history,
                    },
                )
                say(
                    f"[{problem_id} / {method_id}] runs={len(tracker)} "
                    f"median G={median_g:+.4f} converged={bool(done)}"
                )
                return

        start = len(tracker)
        seeds = [
            derive_seed(master_seed, "run", problem_id, method_id, start + i)
            for i in range(cfg.batch_size)
        ]
        args = [(problem, spec, budget, s) for s in seeds]
        traces = runner.map(_run_cell_star, args)

        failed = [t for t in traces if t.failed]
        if failed:
            store.append_runs(problem_id, method_id, traces)
            store.write_meta(
                problem_id,
                method_id,
                {
                    "complete": True,
                    "failed": True,
                    "reason": failed[0].failure_reason or "run failed",
                    "runs": start + len(traces),
                    "batches": batch_history,
                },
            )
            say(f"[{problem_id} / {method_id}] FAILED: {failed[0].failure_reason}")
            return

        store.append_runs(problem_id, method_id, traces)
        for trace in traces:
            tracker.append(trace.stage_fitness[100])

        refs = store.current_refs(problem_id)
        median_g, window_range, _ = _cell_converged_state(tracker, refs, cfg)
        batch_history.append(
            {"runs": len(tracker), "median_g100": median_g, "window_range": window_range}
        )
        store.write_meta(
            problem_id,
            method_id,
            {"complete": False, "runs": len(tracker), "batches": batch_history},
        )
        say(
            f"[{problem_id} / {method_id}] runs={len(tracker)} median G={median_g:+.4f} "
            f"window={window_range:.4f}"
        )


def measure_timing(problem, spec: OptimizerSpec, budget: int, runs: int, seed: int, eval_samples: int = 200) -> dict:
    """Per-evaluation cost split: bare evaluation time vs method overhead."""
    if runs < 3:
        raise ValueError("need at least 3 timed runs")
    fresh = problem.fresh()
    points, _, _ = sample_uniform(fresh, eval_samples, derive_seed(seed, "timing-evals", problem.id))
    t0 = time.perf_counter()
    for row in points:
        fresh.evaluate(row)
    t_f = (time.perf_counter() - t0) / eval_samples

    overheads = []
    low_confidence = False
    for i in range(runs):
        trace = optimize(spec, problem.fresh(), budget, derive_seed(seed, "timing-run", problem.id, spec.id, i))
        if trace.wall_total < 1e-3:
            low_confidence = True
        overheads.append(max(0.0, trace.wall_total / trace.n_eval - t_f))
    return {
        "t_f": t_f,
        "t_m_per_eval": float(np.mean(overheads)),
        "runs": runs,
        "low_confidence": low_confidence,
    }


def _measure_problem_timing(store, problem, plan, say):
    if store.load_timing(problem.id) is not None:
        return
    budget = dict(plan.problems)[problem.id]
    doc = {"problem_id": problem.id, "methods": {}}
    for spec in plan.methods:
        doc["methods"][spec.id] = measure_timing(
            problem,
            spec,
            budget,
            plan.timing.runs,
            plan.master_seed,
            plan.timing.eval_samples,
        )
    doc["t_f"] = doc["methods"][plan.methods[0].id]["t_f"]
    store.write_timing(problem.id, doc)
    say(f"[{problem.id}] timing measured")
