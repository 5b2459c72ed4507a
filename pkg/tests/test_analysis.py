import math

import numpy as np
import pytest

from gradebench.analysis import (
    CellMetrics,
    attribute_scores,
    best_sets,
    empirical_quantile,
    grw,
    low_d_weight,
    method_properties,
    multimodality,
    overlap_matrix,
    pearson_r,
    solved_sets,
)


def cell(problem, method, g100, *, g10=None, g50=None, rel=None, g_rw=None, failed=False):
    g10 = g100 if g10 is None else g10
    g50 = g100 if g50 is None else g50
    g = {10: g10, 50: g50, 100: g100}
    g_rel = {10: rel[0], 50: rel[1], 100: rel[2]} if rel else dict(g)
    return CellMetrics(
        problem_id=problem,
        method_id=method,
        n_runs=100,
        converged=True,
        g=g,
        g_rel=g_rel,
        g_rw=g100 if g_rw is None else g_rw,
        failed=failed,
    )


class TestEQFAndGRW:
    def test_eqf_median(self):
        samples = [3.0, 1.0, 4.0, 1.0, 5.0, 9.0]
        assert empirical_quantile(samples, 0.5) == np.median(samples)

    def test_eqf_nondecreasing(self):
        rng = np.random.default_rng(2)
        samples = rng.normal(size=37)
        qs = [empirical_quantile(samples, p) for p in np.linspace(0, 1, 101)]
        assert all(a <= b for a, b in zip(qs, qs[1:]))

    def test_grw_constant_samples(self):
        assert grw([0.25] * 40) == pytest.approx(0.25)

    def test_grw_uniform_eqf_fixture(self):
        # 101 evenly spaced grades from -1 to 1 make the interpolated EQF
        # exactly 2p - 1; the weighted blend then evaluates to ~0.4279.
        samples = np.linspace(-1.0, 1.0, 101)
        expected = sum((2 * 0.5 ** (1 / i) - 1) / i for i in range(1, 11)) / sum(
            1 / i for i in range(1, 11)
        )
        assert expected == pytest.approx(0.4279, abs=1e-4)
        assert grw(samples) == pytest.approx(expected, abs=1e-12)

    def test_grw_dominates_median(self):
        rng = np.random.default_rng(3)
        for _ in range(50):
            samples = rng.normal(size=rng.integers(10, 200))
            assert grw(samples) >= np.median(samples) - 1e-12


class TestMultimodality:
    def test_anchors(self):
        assert multimodality(1.0) == 0.0
        assert multimodality(-1.0) == 1.0
        assert multimodality(0.0) == 0.5

    def test_clamped(self):
        assert multimodality(-1.8) == 1.0
        assert multimodality(1.5) == 0.0


class TestAttributeScores:
    def test_degenerate_weights_pick_single_problem(self):
        # probe grade 1 on pa -> local weight 1; probe grade <= 0 on pb -> 0.
        cells = {
            ("pa", "nm"): cell("pa", "nm", 1.0),
            ("pb", "nm"): cell("pb", "nm", -0.3),
            ("pa", "m"): cell("pa", "m", 0.8),
            ("pb", "m"): cell("pb", "m", 0.2),
        }
        scores = attribute_scores(cells, {"pa": 5, "pb": 5}, probe_method="nm")
        assert scores["m"]["local"] == pytest.approx(0.8)
        assert scores["m"]["global"] == pytest.approx(0.2)

    def test_fast_exhaustive_blend(self):
        cells = {
            ("pa", "m"): cell("pa", "m", 0.9, rel=(0.2, 0.5, 0.9)),
            ("pa", "nm"): cell("pa", "nm", 0.0),
        }
        scores = attribute_scores(cells, {"pa": 5}, probe_method="nm")
        assert scores["m"]["fast"] == pytest.approx(0.3)
        assert scores["m"]["exhaustive"] == pytest.approx(0.76667, abs=1e-4)

    def test_dimension_weights(self):
        assert low_d_weight(5) == 1.0
        assert low_d_weight(10) == 1.0
        assert low_d_weight(20) == 0.5
        assert low_d_weight(30) == 0.0
        assert low_d_weight(40) == 0.0

    def test_complementary_weights_sum_to_one(self):
        for d in (3, 10, 17, 25, 30, 50):
            assert low_d_weight(d) + (1.0 - low_d_weight(d)) == 1.0

    def test_absent_when_no_weight_mass(self):
        cells = {
            ("pa", "m"): cell("pa", "m", 0.5),
            ("pa", "nm"): cell("pa", "nm", 0.4),
        }
        scores = attribute_scores(cells, {"pa": 40}, probe_method="nm")
        assert scores["m"]["low_d"] is None
        assert scores["m"]["high_d"] == pytest.approx(0.5)

    def test_constant_method_scores_constant(self):
        cells = {}
        for p, d in (("pa", 5), ("pb", 20), ("pc", 35)):
            cells[(p, "m")] = cell(p, "m", 0.42, rel=(0.42, 0.42, 0.42))
            cells[(p, "nm")] = cell(p, "nm", 0.3)
        scores = attribute_scores(cells, {"pa": 5, "pb": 20, "pc": 35}, probe_method="nm")
        for name, value in scores["m"].items():
            assert value == pytest.approx(0.42), name


class TestOverlap:
    def make_cells(self):
        # solved sets: a -> {p1, p2}; b -> {p1, p2, p3}; c -> {} ; rs -> {}
        data = {
            ("p1", "a"): 0.95,
            ("p2", "a"): 0.93,
            ("p3", "a"): 0.2,
            ("p1", "b"): 0.91,
            ("p2", "b"): 0.99,
            ("p3", "b"): 0.92,
            ("p1", "c"): 0.1,
            ("p2", "c"): 0.0,
            ("p3", "c"): -0.4,
            ("p1", "rs"): 0.0,
            ("p2", "rs"): 0.0,
            ("p3", "rs"): 0.0,
        }
        return {(p, m): cell(p, m, v) for (p, m), v in data.items()}

    def test_subset_relation(self):
        methods, matrix, flags = overlap_matrix(self.make_cells())
        i = {m: k for k, m in enumerate(methods)}
        assert matrix[i["a"], i["b"]] == 1.0  # all of a's solved also by b
        assert matrix[i["b"], i["a"]] == pytest.approx(2.0 / 3.0)
        assert matrix[i["a"], i["a"]] == 1.0
        assert matrix[i["b"], i["b"]] == 1.0

    def test_undefined_row_nan(self):
        methods, matrix, flags = overlap_matrix(self.make_cells())
        i = {m: k for k, m in enumerate(methods)}
        assert np.isnan(matrix[i["c"], i["a"]])
        assert "c" in flags["undefined_rows"]

    def test_rs_row_convention(self):
        methods, matrix, flags = overlap_matrix(self.make_cells())
        i = {m: k for k, m in enumerate(methods)}
        assert np.all(matrix[i["rs"], :] == 1.0)
        assert flags["rs_row_convention"]

    def test_entries_in_unit_interval(self):
        _, matrix, _ = overlap_matrix(self.make_cells())
        vals = matrix[~np.isnan(matrix)]
        assert np.all((vals >= 0.0) & (vals <= 1.0))

    def test_disjoint_solved_sets(self):
        cells = {
            ("p1", "a"): cell("p1", "a", 0.95),
            ("p2", "a"): cell("p2", "a", 0.0),
            ("p1", "b"): cell("p1", "b", 0.0),
            ("p2", "b"): cell("p2", "b", 0.95),
        }
        methods, matrix, _ = overlap_matrix(cells)
        i = {m: k for k, m in enumerate(methods)}
        assert matrix[i["a"], i["b"]] == 0.0
        assert matrix[i["b"], i["a"]] == 0.0


class TestBestSets:
    def make_cells(self):
        # a solves p1,p2; b solves p3; c solves p1; singletons: a best.
        # pair {a, b} solves 3.
        data = {
            ("p1", "a"): 0.95, ("p2", "a"): 0.95, ("p3", "a"): 0.0,
            ("p1", "b"): 0.0, ("p2", "b"): 0.0, ("p3", "b"): 0.95,
            ("p1", "c"): 0.95, ("p2", "c"): 0.0, ("p3", "c"): 0.0,
        }
        return {(p, m): cell(p, m, v) for (p, m), v in data.items()}

    def test_singleton_best(self):
        sets = best_sets(self.make_cells(), max_size=3)
        assert sets[1]["solved"] == {"methods": ["a"], "count": 2}

    def test_pair_completes(self):
        sets = best_sets(self.make_cells(), max_size=3)
        assert sets[2]["solved"] == {"methods": ["a", "b"], "count": 3}

    def test_monotone_in_size(self):
        sets = best_sets(self.make_cells(), max_size=3)
        counts = [sets[k]["solved"]["count"] for k in (1, 2, 3)]
        assert counts == sorted(counts)
        assert counts[-1] <= 3

    def test_rw_criterion_independent(self):
        cells = self.make_cells()
        # b's repeat-weighted grades solve p1 and p2 as well: best RW
        # singleton flips to b while the single-run one stays a.
        cells[("p1", "b")] = cell("p1", "b", 0.0, g_rw=0.95)
        cells[("p2", "b")] = cell("p2", "b", 0.0, g_rw=0.95)
        sets = best_sets(cells, max_size=2)
        assert sets[1]["solved_rw"] == {"methods": ["b"], "count": 3}
        assert sets[1]["solved"] == {"methods": ["a"], "count": 2}

    def test_lexicographic_tie_break(self):
        cells = {
            ("p1", "zeta"): cell("p1", "zeta", 0.95),
            ("p1", "alpha"): cell("p1", "alpha", 0.95),
        }
        sets = best_sets(cells, max_size=1)
        assert sets[1]["solved"]["methods"] == ["alpha"]


class TestMethodProperties:
    def test_stability_constant_grades(self):
        cells = {(p, "m"): cell(p, "m", 0.6) for p in ("p1", "p2", "p3")}
        props = method_properties(cells, {})
        assert props["m"]["stability"] == pytest.approx(1.0)

    def test_exploitation_mean_gap(self):
        cells = {
            ("p1", "m"): cell("p1", "m", 0.2, g_rw=0.5),
            ("p2", "m"): cell("p2", "m", 0.4, g_rw=0.4),
        }
        props = method_properties(cells, {})
        assert props["m"]["exploitation"] == pytest.approx(0.15)

    def test_speed_from_stage_gap(self):
        cells = {("p1", "m"): cell("p1", "m", 0.9, g10=0.5)}
        props = method_properties(cells, {})
        assert props["m"]["speed"] == pytest.approx(1.0 - 0.4)

    def test_uniqueness_superseded_method(self):
        cells = {
            ("p1", "m"): cell("p1", "m", 0.95),
            ("p2", "m"): cell("p2", "m", 0.95),
            ("p1", "big"): cell("p1", "big", 0.95),
            ("p2", "big"): cell("p2", "big", 0.95),
        }
        props = method_properties(cells, {})
        assert props["m"]["uniqueness"] == 0.0

    def test_uniqueness_absent_without_solved(self):
        cells = {("p1", "m"): cell("p1", "m", 0.0)}
        props = method_properties(cells, {})
        assert props["m"]["uniqueness"] is None

    def test_sensitivity_collinear(self):
        mm = {"p1": 0.1, "p2": 0.5, "p3": 0.9}
        cells = {(p, "m"): cell(p, "m", 1.0 - mm[p]) for p in mm}
        props = method_properties(cells, mm)
        assert props["m"]["multimodality_r"] == pytest.approx(-1.0)
        cells_up = {(p, "m"): cell(p, "m", mm[p]) for p in mm}
        assert method_properties(cells_up, mm)["m"]["multimodality_r"] == pytest.approx(1.0)

    def test_sensitivity_needs_three_distinct(self):
        mm = {"p1": 0.4, "p2": 0.4, "p3": 0.4}
        cells = {(p, "m"): cell(p, "m", 0.1) for p in mm}
        assert method_properties(cells, mm)["m"]["multimodality_r"] is None

    def test_complexity_normalized_by_reference(self):
        cells = {("p1", "m"): cell("p1", "m", 0.5)}
        timings = {"p1": {"methods": {"m": {"t_m_per_eval": 3e-6}}}}
        props = method_properties(cells, {}, timings=timings, t_ref=1e-6)
        assert props["m"]["complexity"] == pytest.approx(3.0)


class TestPearson:
    def test_exact_lines(self):
        assert pearson_r([1, 2, 3], [2, 4, 6]) == pytest.approx(1.0)
        assert pearson_r([1, 2, 3], [5, 3, 1]) == pytest.approx(-1.0)

    def test_insufficient_points(self):
        assert pearson_r([1, 2], [1, 2]) is None
        assert pearson_r([1, 1, 1], [1, 2, 3]) is None


class TestSolvedSets:
    def test_threshold_strict(self):
        cells = {("p1", "m"): cell("p1", "m", 0.9)}
        assert solved_sets(cells)["m"] == set()
        cells = {("p1", "m"): cell("p1", "m", 0.9000001)}
        assert solved_sets(cells)["m"] == {"p1"}

    def test_failed_cells_ignored(self):
        cells = {("p1", "m"): cell("p1", "m", 0.99, failed=True)}
        assert solved_sets(cells).get("m", set()) == set()
