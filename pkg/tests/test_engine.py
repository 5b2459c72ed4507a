import json
import math

import numpy as np
import pytest

from gradebench.engine import (
    BenchmarkPlan,
    PlanError,
    ResultStore,
    execute,
    g_of_record,
    measure_timing,
)
from gradebench.optimizers import OptimizerSpec
from gradebench.problems import get_problem


def small_plan(tmp_path, methods=({"id": "rs"},), max_runs=120, problem="sphere-3d", budget=120):
    return BenchmarkPlan.from_json_dict(
        {
            "problems": [{"id": problem, "budget": budget}],
            "methods": list(methods),
            "convergence": {
                "batch_size": 10,
                "window": 50,
                "eps": 0.01,
                "min_runs": 100,
                "max_runs": max_runs,
            },
            "master_seed": 77,
            "output": str(tmp_path / "store"),
        }
    )


class TestPlanValidation:
    def test_unknown_top_level_key(self, tmp_path):
        with pytest.raises(PlanError):
            BenchmarkPlan.from_json_dict(
                {
                    "problems": [{"id": "sphere-3d", "budget": 10}],
                    "methods": [{"id": "rs"}],
                    "master_seed": 1,
                    "output": str(tmp_path),
                    "extra": True,
                }
            )

    def test_unknown_problem(self, tmp_path):
        with pytest.raises(ValueError):
            BenchmarkPlan.from_json_dict(
                {
                    "problems": [{"id": "does-not-exist", "budget": 10}],
                    "methods": [{"id": "rs"}],
                    "master_seed": 1,
                    "output": str(tmp_path),
                }
            )

    def test_unknown_method(self, tmp_path):
        with pytest.raises(PlanError):
            BenchmarkPlan.from_json_dict(
                {
                    "problems": [{"id": "sphere-3d", "budget": 10}],
                    "methods": [{"id": "annealing"}],
                    "master_seed": 1,
                    "output": str(tmp_path),
                }
            )

    def test_duplicate_method_ids(self, tmp_path):
        with pytest.raises(PlanError):
            BenchmarkPlan.from_json_dict(
                {
                    "problems": [{"id": "sphere-3d", "budget": 10}],
                    "methods": [{"id": "rs"}, {"id": "rs"}],
                    "master_seed": 1,
                    "output": str(tmp_path),
                }
            )


class TestExecute:
    def test_rs_cell_populated_and_self_consistent(self, tmp_path):
        plan = small_plan(tmp_path)
        store = execute(plan)
        runs = store.load_runs("sphere-3d", "rs")
        assert len(runs) >= 100
        meta = store.load_meta("sphere-3d", "rs")
        assert meta["complete"]
        assert abs(meta["median_g100"]) < 0.1

    def test_resume_idempotent(self, tmp_path):
        plan = small_plan(tmp_path)
        store = execute(plan)
        n_before = len(store.load_runs("sphere-3d", "rs"))
        store2 = execute(plan)
        assert len(store2.load_runs("sphere-3d", "rs")) == n_before

    def test_registry_is_global_min(self, tmp_path):
        plan = small_plan(tmp_path)
        store = execute(plan)
        refs = store.current_refs("sphere-3d")
        run_bests = [t.best for t in store.load_runs("sphere-3d", "rs")]
        doc = store.load_refs_doc("sphere-3d")
        candidates = run_bests + [
            doc["f_plus"]["min_observed"],
            doc["f_circ"]["min_observed"],
        ]
        if doc["known_best"] is not None:
            candidates.append(doc["known_best"])
        assert refs.f_minus == min(candidates)

    def test_store_round_trip_bit_exact(self, tmp_path):
        plan = small_plan(tmp_path)
        store = execute(plan)
        runs = store.load_runs("sphere-3d", "rs")
        raw_lines = store.runs_path("sphere-3d", "rs").read_text().splitlines()
        for trace, line in zip(runs, raw_lines):
            reparsed = json.loads(line)
            assert trace.stage_fitness[100] == reparsed["stage_fitness"]["100"]
            assert trace.best == reparsed["checkpoints"][-1][1]

    def test_failed_cell_recorded_matrix_continues(self, tmp_path):
        plan = small_plan(
            tmp_path,
            methods=(
                {"id": "broken", "command": "false"},
                {"id": "rs"},
            ),
        )
        store = execute(plan)
        broken_meta = store.load_meta("sphere-3d", "broken")
        assert broken_meta["failed"] and broken_meta["complete"]
        assert broken_meta["reason"]
        rs_meta = store.load_meta("sphere-3d", "rs")
        assert rs_meta["complete"] and not rs_meta.get("failed")

    def test_every_cell_has_terminal_state(self, tmp_path):
        plan = small_plan(tmp_path, methods=({"id": "rs"}, {"id": "nm"}))
        store = execute(plan)
        for mid in ("rs", "nm"):
            meta = store.load_meta("sphere-3d", mid)
            assert meta["complete"]
            assert meta.get("failed") or meta.get("converged") or meta.get("max_runs_hit")

    def test_protocol_constants_in_records(self, tmp_path):
        plan = small_plan(tmp_path)
        store = execute(plan)
        doc = store.load_refs_doc("sphere-3d")
        assert doc["f_plus"]["trials_used"] >= 2000
        meta = store.load_meta("sphere-3d", "rs")
        assert meta["runs"] % 10 == 0
        assert meta["runs"] >= 100
        batches = meta["batches"]
        assert [b["runs"] for b in batches] == sorted(b["runs"] for b in batches)


class TestGOfRecord:
    def test_anchor_values(self, tmp_path):
        plan = small_plan(tmp_path)
        store = execute(plan)
        refs = store.current_refs("sphere-3d")
        trace = store.load_runs("sphere-3d", "rs")[0]

        trace.stage_fitness[100] = refs.f_minus
        assert g_of_record(trace, 100, refs) == pytest.approx(1.0, abs=1e-9)
        trace.stage_fitness[100] = refs.f_plus
        assert g_of_record(trace, 100, refs) == pytest.approx(-1.0, abs=1e-9)
        trace.stage_fitness[100] = refs.f_circ[100]
        assert g_of_record(trace, 100, refs) == pytest.approx(0.0, abs=1e-9)

    def test_rank_preservation_after_rebase(self, tmp_path):
        plan = small_plan(tmp_path)
        store = execute(plan)
        refs = store.current_refs("sphere-3d")
        traces = store.load_runs("sphere-3d", "rs")[:20]
        g_before = [g_of_record(t, 100, refs) for t in traces]
        lowered = refs
        lowered.f_minus = refs.f_minus - 5.0
        g_after = [g_of_record(t, 100, lowered) for t in traces]
        assert np.argsort(g_before).tolist() == np.argsort(g_after).tolist()


class TestMeasureTiming:
    def test_decomposition(self):
        problem = get_problem("sphere-3d")
        doc = measure_timing(problem, OptimizerSpec("rs"), budget=300, runs=3, seed=5)
        assert doc["t_f"] > 0.0
        assert doc["t_m_per_eval"] >= 0.0
        # random sampling does almost no bookkeeping per evaluation
        assert doc["t_m_per_eval"] < 1e-3

    def test_requires_three_runs(self):
        with pytest.raises(ValueError):
            measure_timing(get_problem("sphere-3d"), OptimizerSpec("rs"), 100, 2, 5)

    def test_timing_enabled_plan_feeds_complexity(self, tmp_path):
        from gradebench.analysis import analyze_store

        plan = BenchmarkPlan.from_json_dict(
            {
                "problems": [
                    {"id": "ref-10d", "budget": 200},
                    {"id": "sphere-3d", "budget": 120},
                ],
                "methods": [{"id": "rs"}],
                "convergence": {
                    "batch_size": 10,
                    "window": 50,
                    "eps": 0.01,
                    "min_runs": 100,
                    "max_runs": 120,
                },
                "master_seed": 99,
                "output": str(tmp_path / "store"),
                "timing": {"enabled": True, "runs": 3, "eval_samples": 100},
            }
        )
        store = execute(plan)
        ref_doc = store.load_timing("ref-10d")
        assert ref_doc is not None and ref_doc["t_f"] > 0.0
        report = analyze_store(store)
        assert report.properties["rs"]["complexity"] is not None
        assert report.properties["rs"]["complexity"] >= 0.0
