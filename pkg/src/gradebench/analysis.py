"""Post-hoc analysis: every metric derived from a completed result store.

All functions here are pure: they take cell metrics (or a store snapshot)
and return plain data, so fixtures can feed them directly.  Grades are
recomputed from raw stored fitness under the final reference state.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from itertools import combinations

import numpy as np

from gradebench.grading import DegenerateReferencesError, GMap, ReferencePoints, g_value, grade_detail

SOLVED_THRESHOLD = 0.9
RW_RUNS = 10
STAGES = (10, 50, 100)

#: Stage blend weights for the speed-oriented and thoroughness-oriented views.
FAST_STAGE_WEIGHTS = {10: 1.0, 50: 0.5, 100: 0.0}
EXHAUSTIVE_STAGE_WEIGHTS = {10: 0.0, 50: 0.5, 100: 1.0}

LOW_D_FULL = 10
HIGH_D_FULL = 30


def empirical_quantile(samples, p: float) -> float:
    """EQF with linear interpolation between order statistics; the 0.5
    quantile equals the sample median."""
    return float(np.quantile(np.asarray(samples, dtype=float), p, method="linear"))


def grw(g100_samples) -> float:
    """Anticipated grade after repeated tries: EQF blend at percentiles
    0.5**(1/i) with weights 1/i, i = 1..10."""
    samples = np.asarray(g100_samples, dtype=float)
    num = 0.0
    den = 0.0
    for i in range(1, RW_RUNS + 1):
        w = 1.0 / i
        num += w * empirical_quantile(samples, 0.5 ** (1.0 / i))
        den += w
    return num / den


def multimodality(g_probe: float) -> float:
    """Landscape difficulty read off a local probe's grade; clamped [0, 1]."""
    return float(min(1.0, max(0.0, (1.0 - g_probe) / 2.0)))


@dataclass
class CellMetrics:
    """Per (problem, method) summary, all grades under final references."""

    problem_id: str
    method_id: str
    n_runs: int
    converged: bool
    g: dict[int, float]  # stage -> median grade
    g_rel: dict[int, float | None]  # stage -> median relative grade
    g_rw: float
    failed: bool = False
    extrapolated: bool = False  # any grade needed the guarded extrapolation


def low_d_weight(dimension: int) -> float:
    if dimension <= LOW_D_FULL:
        return 1.0
    if dimension >= HIGH_D_FULL:
        return 0.0
    return 1.0 - (dimension - LOW_D_FULL) / (HIGH_D_FULL - LOW_D_FULL)


def weighted_mean(values_and_weights) -> float | None:
    """Attribute aggregation; None when no weight mass exists."""
    num = 0.0
    den = 0.0
    for value, weight in values_and_weights:
        if value is None:
            continue
        num += value * weight
        den += weight
    if den == 0.0:
        return None
    return num / den


def attribute_scores(
    cells: dict[tuple[str, str], CellMetrics],
    problem_dims: dict[str, int],
    probe_method: str,
) -> dict[str, dict[str, float | None]]:
    """Six complementary attribute grades per method.

    Local/global weights come from the probe's grade per problem, the
    fast/exhaustive pair blends relative stage grades, and the dimension
    pair interpolates between D <= 10 and D >= 30.
    """
    methods = sorted({m for _, m in cells})
    problems = sorted({p for p, _ in cells})

    local_w = {}
    for p in problems:
        probe = cells.get((p, probe_method))
        local_w[p] = max(0.0, probe.g[100]) if probe else None

    out: dict[str, dict[str, float | None]] = {}
    for m in methods:
        rows = [(p, cells[(p, m)]) for p in problems if (p, m) in cells and not cells[(p, m)].failed]

        def blend(cell, weights):
            total_w = sum(weights.values())
            vals = []
            for stage, w in weights.items():
                if w == 0.0:
                    continue
                v = cell.g_rel[stage]
                if v is None:
                    return None
                vals.append(v * w)
            return sum(vals) / total_w

        out[m] = {
            "local": weighted_mean(
                (c.g[100], local_w[p]) for p, c in rows if local_w[p] is not None
            ),
            "global": weighted_mean(
                (c.g[100], 1.0 - local_w[p]) for p, c in rows if local_w[p] is not None
            ),
            "fast": weighted_mean((blend(c, FAST_STAGE_WEIGHTS), 1.0) for p, c in rows),
            "exhaustive": weighted_mean(
                (blend(c, EXHAUSTIVE_STAGE_WEIGHTS), 1.0) for p, c in rows
            ),
            "low_d": weighted_mean(
                (c.g[100], low_d_weight(problem_dims[p])) for p, c in rows
            ),
            "high_d": weighted_mean(
                (c.g[100], 1.0 - low_d_weight(problem_dims[p])) for p, c in rows
            ),
        }
    return out


def solved_sets(
    cells: dict[tuple[str, str], CellMetrics], *, use_rw: bool = False, threshold: float = SOLVED_THRESHOLD
) -> dict[str, set[str]]:
    out: dict[str, set[str]] = {}
    for (p, m), cell in cells.items():
        if cell.failed:
            continue
        score = cell.g_rw if use_rw else cell.g[100]
        out.setdefault(m, set())
        if score > threshold:
            out[m].add(p)
    return out


def overlap_matrix(
    cells: dict[tuple[str, str], CellMetrics],
    *,
    threshold: float = SOLVED_THRESHOLD,
    rs_method: str = "rs",
) -> tuple[list[str], np.ndarray, dict]:
    """Share of each method's solved problems also solved by every other.

    Rows with an empty solved set are NaN (undefined); the random-search row
    is set to 1 by convention and flagged, since its own grade pins it to
    zero and the share is incalculable.
    """
    solved = solved_sets(cells, threshold=threshold)
    methods = sorted(solved)
    n = len(methods)
    matrix = np.full((n, n), np.nan)
    flags: dict = {"rs_row_convention": False, "undefined_rows": []}
    for i, a in enumerate(methods):
        if a == rs_method:
            matrix[i, :] = 1.0
            flags["rs_row_convention"] = True
            continue
        if not solved[a]:
            flags["undefined_rows"].append(a)
            continue
        for j, b in enumerate(methods):
            matrix[i, j] = len(solved[a] & solved[b]) / len(solved[a])
    return methods, matrix, flags


def best_sets(
    cells: dict[tuple[str, str], CellMetrics],
    *,
    max_size: int = 5,
    threshold: float = SOLVED_THRESHOLD,
) -> dict[int, dict[str, dict]]:
    """Exhaustive best method subsets per size, for both the single-run and
    the repeat-weighted solved criteria; ties break lexicographically."""
    out: dict[int, dict[str, dict]] = {}
    for criterion, use_rw in (("solved", False), ("solved_rw", True)):
        solved = solved_sets(cells, use_rw=use_rw)
        methods = sorted(solved)
        for size in range(1, max_size + 1):
            best_combo, best_count = None, -1
            # Sizes past the roster reuse the full set, keeping counts monotone.
            for combo in combinations(methods, min(size, len(methods))):
                count = len(set().union(*(solved[m] for m in combo)))
                if count > best_count:
                    best_combo, best_count = combo, count
            out.setdefault(size, {})[criterion] = {
                "methods": list(best_combo) if best_combo else [],
                "count": max(best_count, 0),
            }
    return out


def pearson_r(xs, ys) -> float | None:
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)
    if len(xs) < 3 or len(set(xs.tolist())) < 3:
        return None
    sx = xs.std()
    sy = ys.std()
    if sx == 0.0 or sy == 0.0:
        return None
    return float(np.mean((xs - xs.mean()) * (ys - ys.mean())) / (sx * sy))


def method_properties(
    cells: dict[tuple[str, str], CellMetrics],
    problem_multimodality: dict[str, float],
    timings: dict[str, dict] | None = None,
    t_ref: float | None = None,
) -> dict[str, dict]:
    """Per-method property table: stability, repeat exploitation, speed,
    uniqueness, multimodality sensitivity, relative complexity."""
    methods = sorted({m for _, m in cells})
    solved = solved_sets(cells)
    out = {}
    for m in methods:
        rows = [c for (p, mm), c in sorted(cells.items()) if mm == m and not c.failed]
        if not rows:
            out[m] = {}
            continue
        g_vals = np.array([c.g[100] for c in rows])
        stability = 1.0 - float(g_vals.std())
        exploitation = float(np.mean([c.g_rw - c.g[100] for c in rows]))
        speed = float(np.mean([1.0 - (c.g[100] - c.g[10]) for c in rows]))

        uniqueness = None
        if solved.get(m):
            shares = [
                len(solved[m] & solved[other]) / len(solved[m])
                for other in methods
                if other != m
            ]
            uniqueness = 1.0 - max(shares) if shares else None

        pairs = [
            (problem_multimodality[c.problem_id], c.g[100])
            for c in rows
            if c.problem_id in problem_multimodality
        ]
        sensitivity = pearson_r([a for a, _ in pairs], [b for _, b in pairs]) if pairs else None

        complexity = None
        if timings and t_ref:
            ratios = [
                t["methods"][m]["t_m_per_eval"] / t_ref
                for t in timings.values()
                if m in t.get("methods", {})
            ]
            if ratios:
                complexity = float(np.mean(ratios))

        out[m] = {
            "stability": stability,
            "exploitation": exploitation,
            "speed": speed,
            "uniqueness": uniqueness,
            "multimodality_r": sensitivity,
            "complexity": complexity,
        }
    return out


# ---------------------------------------------------------------------------
# Store-backed assembly


def cell_metrics_from_store(store, problem_id: str, method_id: str) -> CellMetrics:
    """Grades for one cell under the problem's current references."""
    meta = store.load_meta(problem_id, method_id) or {}
    if meta.get("failed"):
        return CellMetrics(
            problem_id=problem_id,
            method_id=method_id,
            n_runs=meta.get("runs", 0),
            converged=False,
            g={s: math.nan for s in STAGES},
            g_rel={s: None for s in STAGES},
            g_rw=math.nan,
            failed=True,
        )
    traces = [t for t in store.load_runs(problem_id, method_id) if not t.failed]
    refs = store.current_refs(problem_id)
    gmap100 = refs.gmap(100)

    extrapolated = False
    g: dict[int, float] = {}
    for stage in STAGES:
        graded = [grade_detail(t.stage_fitness[stage], gmap100) for t in traces]
        extrapolated = extrapolated or any(flag for _, flag in graded)
        g[stage] = float(np.median([value for value, _ in graded]))

    g_rel: dict[int, float | None] = {}
    for stage in STAGES:
        try:
            gmap_stage = refs.gmap(stage)
        except DegenerateReferencesError:
            g_rel[stage] = None
            continue
        g_rel[stage] = float(
            np.median([g_value(t.stage_fitness[stage], gmap_stage) for t in traces])
        )

    g100_samples = [g_value(t.stage_fitness[100], gmap100) for t in traces]
    return CellMetrics(
        problem_id=problem_id,
        method_id=method_id,
        n_runs=len(traces),
        converged=bool(meta.get("converged", False)),
        g=g,
        g_rel=g_rel,
        g_rw=grw(g100_samples),
        extrapolated=extrapolated,
    )


@dataclass
class AnalysisReport:
    cells: dict[tuple[str, str], CellMetrics]
    problem_dims: dict[str, int]
    problem_multimodality: dict[str, float | None]
    attributes: dict[str, dict[str, float | None]]
    overlap_methods: list[str]
    overlap: np.ndarray
    overlap_flags: dict
    best_sets: dict[int, dict[str, dict]]
    properties: dict[str, dict]
    metadata: dict = field(default_factory=dict)


def analyze_store(store, probe_method: str = "nm") -> AnalysisReport:
    from gradebench import problems as problem_catalog

    plan = store.load_plan()
    problem_ids = [pid for pid, _ in plan.problems]
    method_ids = [m.id for m in plan.methods]

    cells = {}
    for pid in problem_ids:
        for mid in method_ids:
            if store.load_meta(pid, mid) is None and not store.runs_path(pid, mid).exists():
                continue
            cells[(pid, mid)] = cell_metrics_from_store(store, pid, mid)

    dims = {pid: problem_catalog.get_problem(pid).dimension for pid in problem_ids}

    multim = {}
    for pid in problem_ids:
        probe_cell = cells.get((pid, probe_method))
        if probe_cell is not None and not probe_cell.failed:
            multim[pid] = multimodality(probe_cell.g[100])
        else:
            multim[pid] = None

    timings = {}
    for pid in problem_ids:
        doc = store.load_timing(pid)
        if doc is not None:
            timings[pid] = doc
    t_ref = None
    ref_doc = store.load_timing("ref-10d")
    if ref_doc is not None:
        t_ref = ref_doc.get("t_f")

    attr = attribute_scores(cells, dims, probe_method)
    overlap_m, overlap, overlap_flags = overlap_matrix(cells)
    sets = best_sets(cells)
    props = method_properties(
        cells,
        {p: m for p, m in multim.items() if m is not None},
        timings=timings or None,
        t_ref=t_ref,
    )
    return AnalysisReport(
        cells=cells,
        problem_dims=dims,
        problem_multimodality=multim,
        attributes=attr,
        overlap_methods=overlap_m,
        overlap=overlap,
        overlap_flags=overlap_flags,
        best_sets=sets,
        properties=props,
        metadata={
            "probe_method": probe_method,
            "solved_threshold": SOLVED_THRESHOLD,
            "speed_metric": "absolute_g",
            "t_ref": t_ref,
        },
    )
