"""Acceptance gate: one test per criterion, each printing a pass/fail line.

Two pipeline stores are built once per session:
  store A: the five-problem random-search pipeline (references + RS cells),
  store B: sphere/ripple/gate problems under all five built-in methods.
"""

import json
import math
import time

import numpy as np
import pytest
from scipy.optimize import brentq

from gradebench import problems as P
from gradebench.analysis import analyze_store, grw
from gradebench.engine import BenchmarkPlan, execute
from gradebench.grading import GMap, ReferencePoints, alpha_for, g_value, linear_grade
from gradebench.cli import main as cli_main
from oracles import sp_lattice_minimum
from test_grading import random_exact_triples

MASTER_SEED = 2025
CONVERGENCE = {
    "batch_size": 10,
    "window": 50,
    "eps": 0.01,
    "min_runs": 100,
    "max_runs": 1000,
}

PLAN_A_PROBLEMS = [
    {"id": "sphere-10d", "budget": 10_000},
    {"id": "sp-zigzag20-20d", "budget": 2_000},
    {"id": "ec-blobs-direct-20d", "budget": 2_000},
    {"id": "pp-3c3t3s-24d", "budget": 600},
    {"id": "ripple-10d", "budget": 10_000},
]

PLAN_B_PROBLEMS = [
    {"id": "sphere-10d", "budget": 10_000},
    {"id": "ripple-10d", "budget": 10_000},
    {"id": "sp-gate5-5d", "budget": 4_000},
]
ALL_METHODS = [{"id": m} for m in ("rs", "nm", "msgd", "pso", "lshade")]


def verdict(criterion: str, ok: bool, detail: str = "") -> bool:
    status = "PASS" if ok else "FAIL"
    print(f"[acceptance] {status} {criterion}" + (f" ({detail})" if detail else ""))
    return ok


@pytest.fixture(scope="session")
def store_a(tmp_path_factory):
    out = tmp_path_factory.mktemp("acceptance-a") / "store"
    plan = BenchmarkPlan.from_json_dict(
        {
            "problems": PLAN_A_PROBLEMS,
            "methods": [{"id": "rs"}],
            "convergence": CONVERGENCE,
            "master_seed": MASTER_SEED,
            "output": str(out),
        }
    )
    t0 = time.perf_counter()
    store = execute(plan)
    return store, time.perf_counter() - t0


@pytest.fixture(scope="session")
def store_b(tmp_path_factory):
    out = tmp_path_factory.mktemp("acceptance-b") / "store"
    plan = BenchmarkPlan.from_json_dict(
        {
            "problems": PLAN_B_PROBLEMS,
            "methods": ALL_METHODS,
            "convergence": CONVERGENCE,
            "master_seed": MASTER_SEED,
            "output": str(out),
        }
    )
    store = execute(plan, jobs=2)
    return store


def test_criterion_1_metric_anchors():
    t0 = time.perf_counter()
    worst = 0.0
    for f_minus, f_circ, f_plus in random_exact_triples(1000, seed=20250801):
        gmap = GMap.from_refs(ReferencePoints(f_minus, f_circ, f_plus))
        worst = max(
            worst,
            abs(g_value(f_minus, gmap) - 1.0),
            abs(g_value(f_circ, gmap)),
            abs(g_value(f_plus, gmap) + 1.0),
        )
    elapsed = time.perf_counter() - t0
    ok = worst < 1e-9 and elapsed < 1.0
    assert verdict(
        "1 metric anchors", ok, f"max error {worst:.2e}, {elapsed * 1000:.0f} ms"
    )


def test_criterion_2_alpha_oracle_equivalence():
    ok = abs(alpha_for(0.25) - 9.0) < 1e-12 and abs(alpha_for(0.75) - 1.0 / 9.0) < 1e-12
    worst_rel = 0.0
    for rho in np.arange(0.05, 0.951, 0.05):
        rho = float(round(rho, 2))
        if rho == 0.5:
            continue

        def mid_zero(a):
            return 1.0 - 2.0 * math.log(rho * (a - 1.0) + 1.0) / math.log(a)

        if rho < 0.5:
            root = brentq(mid_zero, 1.0 + 1e-9, 1e9, xtol=1e-15, rtol=8.9e-16)
        else:
            root = brentq(mid_zero, 1e-9, 1.0 - 1e-9, xtol=1e-15, rtol=8.9e-16)
        worst_rel = max(worst_rel, abs(alpha_for(rho) - root) / root)
    ok = ok and worst_rel < 1e-9
    assert verdict("2 alpha oracle equivalence", ok, f"max rel error {worst_rel:.2e}")


def test_criterion_3_singularity_bridge():
    worst = 0.0
    for rho_circ in (0.5 - 2e-3, 0.5 + 2e-3):
        gmap = GMap.from_refs(ReferencePoints(0.0, rho_circ * 10.0, 10.0))
        for f in np.linspace(0.0, 10.0, 1000):
            rho = linear_grade(f, gmap.refs)
            worst = max(worst, abs(g_value(f, gmap) - (1.0 - 2.0 * rho)))
    assert verdict("3 singularity bridge", worst < 1e-2, f"max gap {worst:.4f}")


def test_criterion_4_rs_self_consistency(store_a):
    store, elapsed = store_a
    report = analyze_store(store)
    ok = elapsed < 1800.0
    details = [f"runtime {elapsed / 60:.1f} min"]
    for entry in PLAN_A_PROBLEMS:
        pid = entry["id"]
        cell = report.cells[(pid, "rs")]
        meta = store.load_meta(pid, "rs")
        ok = ok and abs(cell.g[100]) <= 0.05
        ok = ok and meta["runs"] >= 100 and meta["converged"]
        ok = ok and meta["window_range"] <= 0.01
        details.append(f"{pid}: G={cell.g[100]:+.3f} r={meta['runs']}")
    assert verdict("4 RS self-consistency", ok, "; ".join(details))


def test_criterion_5_grw_dominance(store_a, store_b):
    store, _ = store_a
    ok = True
    for report in (analyze_store(store), analyze_store(store_b)):
        for (pid, mid), cell in report.cells.items():
            if cell.failed:
                continue
            ok = ok and cell.g_rw >= cell.g[100] - 1e-12
    fixture = grw(np.linspace(-1.0, 1.0, 101))
    expected = sum((2 * 0.5 ** (1 / i) - 1) / i for i in range(1, 11)) / sum(
        1 / i for i in range(1, 11)
    )
    ok = ok and abs(fixture - 0.4279) < 1e-3 and abs(fixture - expected) < 1e-12
    assert verdict("5 repeat-weighted dominance", ok, f"uniform fixture {fixture:.6f}")


def test_criterion_6_method_sanity_ordering(store_b):
    report = analyze_store(store_b)
    details = []

    rs_finals = [t.best for t in store_b.load_runs("sphere-10d", "rs")]
    rs_median = float(np.median(rs_finals))
    ok = len(rs_finals) >= 100
    for mid in ("lshade", "pso", "nm", "msgd"):
        cell = report.cells[("sphere-10d", mid)]
        finals = [t.best for t in store_b.load_runs("sphere-10d", mid)]
        ok = ok and len(finals) >= 100
        ok = ok and cell.g[100] > 0.9
        ok = ok and float(np.median(finals)) < rs_median
        details.append(f"{mid}: G={cell.g[100]:+.3f}")

    m_ripple = report.problem_multimodality["ripple-10d"]
    ok = ok and m_ripple is not None and m_ripple > 0.5
    g_ls = report.cells[("ripple-10d", "lshade")].g[100]
    g_nm = report.cells[("ripple-10d", "nm")].g[100]
    ok = ok and g_ls > g_nm
    details.append(f"ripple M={m_ripple:.3f} lshade={g_ls:+.3f} nm={g_nm:+.3f}")
    assert verdict("6 method sanity ordering", ok, "; ".join(details))


def test_criterion_7_sp_optimum(store_b):
    inst = P.make_sp_instance("free5")
    straight = P.sp_fitness(np.zeros(5), inst)
    ok = abs(straight - inst.span) <= 1e-12 * inst.span

    gate = P.make_sp_instance("gate5")
    grid_min, _ = sp_lattice_minimum(gate, 17)
    refs = store_b.current_refs("sp-gate5-5d")
    gap = abs(grid_min - refs.f_minus) / grid_min
    ok = ok and gap <= 0.02

    report = analyze_store(store_b)
    g_ls = report.cells[("sp-gate5-5d", "lshade")].g[100]
    ok = ok and g_ls >= 0.9
    assert verdict(
        "7 shortest-path optimum",
        ok,
        f"straight={straight:.12f}, oracle gap {gap * 100:.2f}%, lshade G={g_ls:+.3f}",
    )


def test_criterion_8_analysis_algebra():
    from test_analysis import TestOverlap, cell

    cells = TestOverlap().make_cells()
    from gradebench.analysis import best_sets, overlap_matrix, pearson_r

    methods, matrix, flags = overlap_matrix(cells)
    finite = matrix[~np.isnan(matrix)]
    ok = np.all((finite >= 0.0) & (finite <= 1.0))
    for i, m in enumerate(methods):
        if m != "rs" and len({p for (p, mm) in cells if mm == m}):
            if not np.isnan(matrix[i, i]):
                ok = ok and matrix[i, i] == 1.0

    fixture = {
        ("p1", "a"): cell("p1", "a", 0.95),
        ("p2", "a"): cell("p2", "a", 0.95),
        ("p3", "b"): cell("p3", "b", 0.95),
        ("p1", "b"): cell("p1", "b", 0.0),
        ("p2", "b"): cell("p2", "b", 0.0),
        ("p3", "a"): cell("p3", "a", 0.0),
    }
    sets = best_sets(fixture, max_size=3)
    counts = [sets[k]["solved"]["count"] for k in (1, 2, 3)]
    ok = ok and counts == sorted(counts) and counts[-1] <= 3

    from gradebench.analysis import low_d_weight

    ok = ok and all(
        abs(low_d_weight(d) + (1.0 - low_d_weight(d)) - 1.0) < 1e-15 for d in range(3, 60)
    )
    ok = ok and pearson_r([0.1, 0.5, 0.9], [0.9, 0.5, 0.1]) == pytest.approx(-1.0)
    ok = ok and pearson_r([0.1, 0.5, 0.9], [0.2, 0.4, 0.6]) == pytest.approx(1.0)
    assert verdict("8 analysis algebra", bool(ok))


def test_criterion_9_protocol_constants(store_a, store_b):
    store, _ = store_a
    ok = True
    details = []
    for s, plan_problems, methods in (
        (store, PLAN_A_PROBLEMS, ["rs"]),
        (store_b, PLAN_B_PROBLEMS, [m["id"] for m in ALL_METHODS]),
    ):
        for entry in plan_problems:
            pid = entry["id"]
            refs_doc = s.load_refs_doc(pid)
            ok = ok and refs_doc["f_plus"]["trials_used"] >= 2000
            for mid in methods:
                meta = s.load_meta(pid, mid)
                ok = ok and meta["complete"] and not meta.get("failed")
                ok = ok and meta["runs"] % 10 == 0
                if meta.get("converged"):
                    ok = ok and meta["runs"] >= 100 and meta["window_range"] <= 0.01
                else:
                    ok = ok and meta["runs"] >= 1000
    details.append("f+ trials >= 2000, batches of 10, r >= 100, window <= 0.01")
    assert verdict("9 protocol constants", ok, "; ".join(details))


def test_criterion_10_determinism(tmp_path_factory):
    base = tmp_path_factory.mktemp("acceptance-det")

    def plan_doc(out):
        return {
            "problems": [{"id": "sphere-3d", "budget": 300}],
            "methods": [{"id": "rs"}, {"id": "nm"}],
            "convergence": {
                "batch_size": 10,
                "window": 50,
                "eps": 0.01,
                "min_runs": 100,
                "max_runs": 150,
            },
            "master_seed": MASTER_SEED,
            "output": str(out),
        }

    plan_1 = base / "plan1.json"
    plan_1.write_text(json.dumps(plan_doc(base / "store-j1")))
    plan_4 = base / "plan4.json"
    plan_4.write_text(json.dumps(plan_doc(base / "store-j4")))

    assert cli_main(["run", "--plan", str(plan_1), "--jobs", "1"]) == 0
    assert cli_main(["run", "--plan", str(plan_4), "--jobs", "4"]) == 0
    assert cli_main(["analyze", "--store", str(base / "store-j1")]) == 0
    assert cli_main(["analyze", "--store", str(base / "store-j4")]) == 0

    dir_1 = base / "store-j1" / "report"
    dir_4 = base / "store-j4" / "report"
    files_1 = {p.name: p.read_bytes() for p in sorted(dir_1.iterdir())}
    files_4 = {p.name: p.read_bytes() for p in sorted(dir_4.iterdir())}
    ok = files_1 == files_4 and len(files_1) >= 7
    assert verdict("10 determinism across parallelism", ok, f"{len(files_1)} report files")
