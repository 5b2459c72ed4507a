"""Reference-point estimation and the statistical run-convergence protocol.

The outer anchors come from sampling: the upper anchor is the median
objective value under uniform sampling (at least 2000 trials, median
stabilized), the middle anchor the median of random-search run bests over
batched runs (at least 100, at most 1000).  Stability is declared when the
running median's range over a trailing window drops under a unit-free
epsilon.  Everything is a pure function of (problem, config, seed).
"""

from __future__ import annotations

import bisect
import hashlib
from dataclasses import dataclass, field

import numpy as np

from gradebench.optimizers import OptimizerSpec, optimize
from gradebench.optimizers.trace import RunTrace

MIN_FPLUS_TRIALS = 2000
MAX_FPLUS_TRIALS = 200_000


def derive_seed(master_seed: int, *parts) -> int:
    """Independent, reproducible 64-bit stream ids from labeled parts."""
    text = repr((int(master_seed),) + tuple(parts))
    digest = hashlib.sha256(text.encode()).digest()
    return int.from_bytes(digest[:8], "little")


@dataclass(frozen=True)
class ConvergenceConfig:
    batch_size: int = 10
    window: int = 50
    eps: float = 0.01
    min_runs: int = 100
    max_runs: int = 1000

    def __post_init__(self):
        if self.batch_size < 1:
            raise ValueError("batch_size must be at least 1")
        if self.eps <= 0:
            raise ValueError("eps must be positive")
        if self.window > self.min_runs:
            raise ValueError("window must not exceed min_runs")
        if self.max_runs < self.min_runs:
            raise ValueError("max_runs must be at least min_runs")

    def to_json_dict(self) -> dict:
        return {
            "batch_size": self.batch_size,
            "window": self.window,
            "eps": self.eps,
            "min_runs": self.min_runs,
            "max_runs": self.max_runs,
        }


class MedianTracker:
    """Per-run summary values with exact prefix medians.

    A sorted copy is maintained incrementally and the two central order
    statistics of every prefix are recorded, so the median sequence can be
    re-expressed later under any monotone transform (medians of an even
    count average the transformed central pair).
    """

    def __init__(self):
        self.values: list[float] = []
        self._sorted: list[float] = []
        self._central_pairs: list[tuple[float, float]] = []

    def __len__(self) -> int:
        return len(self.values)

    def append(self, value: float) -> None:
        self.values.append(value)
        bisect.insort(self._sorted, value)
        n = len(self._sorted)
        if n % 2:
            mid = self._sorted[n // 2]
            self._central_pairs.append((mid, mid))
        else:
            self._central_pairs.append((self._sorted[n // 2 - 1], self._sorted[n // 2]))

    def medians(self, transform=None) -> np.ndarray:
        if transform is None:
            return np.array([(lo + hi) / 2.0 for lo, hi in self._central_pairs])
        return np.array(
            [(transform(lo) + transform(hi)) / 2.0 for lo, hi in self._central_pairs]
        )

    def median(self, transform=None) -> float:
        seq = self.medians(transform)
        return float(seq[-1])

    def window_range(self, window: int, transform=None) -> float:
        seq = self.medians(transform)[-window:]
        return float(seq.max() - seq.min())


def converged(tracker: MedianTracker, cfg: ConvergenceConfig, *, scale: float = 1.0, transform=None) -> bool:
    """True once min_runs are in and the trailing-window median range is
    within eps (times ``scale``, for criteria stated in raw fitness units)."""
    if len(tracker) < cfg.min_runs:
        return False
    return tracker.window_range(cfg.window, transform) <= cfg.eps * scale


def sample_uniform(problem, count: int, seed: int):
    """(points, values): i.i.d. uniform over the box; non-finite fitness is
    recorded as +inf and counted."""
    if count < 1:
        raise ValueError("count must be positive")
    rng = np.random.default_rng(seed)
    points = rng.uniform(problem.lower_bounds, problem.upper_bounds, size=(count, problem.dimension))
    values = np.empty(count)
    failures = 0
    for i, row in enumerate(points):
        v = problem.evaluate(row)
        if not np.isfinite(v):
            failures += 1
            v = np.inf
        values[i] = v
    return points, values, failures


@dataclass
class FPlusEstimate:
    f_plus: float
    trials_used: int
    converged: bool
    degenerate: bool
    min_observed: float
    eval_failures: int = 0

    def to_json_dict(self) -> dict:
        return {
            "f_plus": self.f_plus,
            "trials_used": self.trials_used,
            "converged": self.converged,
            "degenerate": self.degenerate,
            "min_observed": self.min_observed,
            "eval_failures": self.eval_failures,
        }


def estimate_f_plus(problem, cfg: ConvergenceConfig, seed: int) -> FPlusEstimate:
    """Median objective value under uniform sampling.

    Draws batches until at least MIN_FPLUS_TRIALS trials are in and the
    median's range over the trailing window of batch medians is within
    eps of the observed fitness spread (spread-normalized so eps is
    unit-free).  Zero spread returns immediately, flagged degenerate.
    """
    rng = np.random.default_rng(seed)
    sorted_vals: list[float] = []
    batch_medians: list[float] = []
    failures = 0
    lo, hi = np.inf, -np.inf

    while True:
        points = rng.uniform(
            problem.lower_bounds, problem.upper_bounds, size=(cfg.batch_size, problem.dimension)
        )
        for row in points:
            v = problem.evaluate(row)
            if not np.isfinite(v):
                failures += 1
                v = np.inf
            bisect.insort(sorted_vals, v)
        n = len(sorted_vals)
        lo = min(lo, sorted_vals[0])
        hi = max(hi, sorted_vals[-1])
        median = (
            sorted_vals[n // 2]
            if n % 2
            else (sorted_vals[n // 2 - 1] + sorted_vals[n // 2]) / 2.0
        )
        batch_medians.append(median)

        spread = hi - lo
        if spread == 0.0:
            return FPlusEstimate(median, n, True, True, lo, failures)
        if n >= MIN_FPLUS_TRIALS and len(batch_medians) >= cfg.window:
            window = batch_medians[-cfg.window :]
            if max(window) - min(window) <= cfg.eps * spread:
                return FPlusEstimate(median, n, True, False, lo, failures)
        if n >= MAX_FPLUS_TRIALS:
            return FPlusEstimate(median, n, False, False, lo, failures)


def run_random_search(problem, budget: int, seed: int) -> RunTrace:
    """One random-search run; shares the optimizer implementation."""
    return optimize(OptimizerSpec("rs"), problem, budget, seed)


@dataclass
class FCircEstimate:
    f_circ_10: float
    f_circ_50: float
    f_circ_100: float
    runs_used: int
    converged: bool
    min_observed: float
    final_bests: list[float] = field(default_factory=list)

    def staged(self) -> dict[int, float]:
        return {10: self.f_circ_10, 50: self.f_circ_50, 100: self.f_circ_100}

    def to_json_dict(self) -> dict:
        return {
            "f_circ_10": self.f_circ_10,
            "f_circ_50": self.f_circ_50,
            "f_circ_100": self.f_circ_100,
            "runs_used": self.runs_used,
            "converged": self.converged,
            "min_observed": self.min_observed,
        }


def estimate_f_circ(
    problem, budget: int, cfg: ConvergenceConfig, seed: int, pmap=None
) -> FCircEstimate:
    """Median random-search run best, with medians at all three stages.

    Runs accumulate in batches under the median-stability rule applied to
    final bests (range normalized by their observed spread); stops at
    max_runs with a non-converged flag.
    """
    run_map = pmap if pmap is not None else map
    tracker = MedianTracker()
    stage_values: dict[int, list[float]] = {10: [], 50: [], 100: []}
    min_observed = np.inf
    run_index = 0
    is_converged = False

    while True:
        seeds = [derive_seed(seed, "rs-reference", problem.id, run_index + i) for i in range(cfg.batch_size)]
        args = [(problem, budget, s) for s in seeds]
        traces = list(run_map(_run_rs_star, args))
        run_index += len(traces)
        for trace in traces:
            tracker.append(trace.stage_fitness[100])
            for pct in (10, 50, 100):
                stage_values[pct].append(trace.stage_fitness[pct])
            min_observed = min(min_observed, trace.best)

        finals = tracker.medians()
        spread = max(tracker.values) - min(tracker.values)
        if converged(tracker, cfg, scale=spread if spread > 0 else 1.0):
            is_converged = True
            break
        if len(tracker) >= cfg.max_runs:
            break

    return FCircEstimate(
        f_circ_10=float(np.median(stage_values[10])),
        f_circ_50=float(np.median(stage_values[50])),
        f_circ_100=float(finals[-1]),
        runs_used=len(tracker),
        converged=is_converged,
        min_observed=float(min_observed),
        final_bests=list(tracker.values),
    )


def _run_rs_star(args):
    problem, budget, run_seed = args
    return run_random_search(problem.fresh(), budget, run_seed)
