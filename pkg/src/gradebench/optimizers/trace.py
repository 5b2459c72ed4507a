"""Run records and the budget-enforcing evaluation context.

The harness owns the evaluation loop: methods request evaluations through a
BudgetedRun, which clamps candidates to bounds, counts, times, treats
non-finite fitness as +inf, and records the best-so-far checkpoint stream.
The budget cap is enforced here, never trusted to the method.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np

STAGES = (10, 50, 100)


class BudgetExhausted(Exception):
    """Raised by BudgetedRun when the evaluation budget is used up."""


@dataclass
class RunTrace:
    """One optimization run, stored raw (grades are derived later)."""

    problem_id: str
    method_id: str
    seed: int
    budget: int
    n_eval: int
    stage_fitness: dict[int, float]
    checkpoints: list[tuple[int, float]]
    wall_total: float = 0.0
    wall_eval: float = 0.0
    eval_failures: int = 0
    budget_truncated: bool = False
    failed: bool = False
    failure_reason: str = ""
    extras: dict = field(default_factory=dict)

    @property
    def best(self) -> float:
        return self.checkpoints[-1][1]

    def replay_key(self) -> tuple:
        """Everything that must be identical across replays of one seed."""
        return (
            self.problem_id,
            self.method_id,
            self.seed,
            self.budget,
            self.n_eval,
            tuple(sorted(self.stage_fitness.items())),
            tuple(self.checkpoints),
            self.eval_failures,
        )

    def to_json_dict(self) -> dict:
        return {
            "problem_id": self.problem_id,
            "method_id": self.method_id,
            "seed": self.seed,
            "budget": self.budget,
            "n_eval": self.n_eval,
            "stage_fitness": {str(k): v for k, v in self.stage_fitness.items()},
            "checkpoints": [[i, f] for i, f in self.checkpoints],
            "wall_total": self.wall_total,
            "wall_eval": self.wall_eval,
            "eval_failures": self.eval_failures,
            "budget_truncated": self.budget_truncated,
            "failed": self.failed,
            "failure_reason": self.failure_reason,
            "extras": self.extras,
        }

    @classmethod
    def from_json_dict(cls, d: dict) -> "RunTrace":
        return cls(
            problem_id=d["problem_id"],
            method_id=d["method_id"],
            seed=d["seed"],
            budget=d["budget"],
            n_eval=d["n_eval"],
            stage_fitness={int(k): v for k, v in d["stage_fitness"].items()},
            checkpoints=[(int(i), float(f)) for i, f in d["checkpoints"]],
            wall_total=d.get("wall_total", 0.0),
            wall_eval=d.get("wall_eval", 0.0),
            eval_failures=d.get("eval_failures", 0),
            budget_truncated=d.get("budget_truncated", False),
            failed=d.get("failed", False),
            failure_reason=d.get("failure_reason", ""),
            extras=d.get("extras", {}),
        )


class BudgetedRun:
    """Evaluation context handed to a method runner."""

    def __init__(self, problem, budget: int):
        if budget < 1:
            raise ValueError("budget must be positive")
        self.problem = problem
        self.budget = budget
        self.dim = problem.dimension
        self.lb = problem.lower_bounds
        self.ub = problem.upper_bounds
        self.n_eval = 0
        self.eval_failures = 0
        self.wall_eval = 0.0
        self.checkpoints: list[tuple[int, float]] = []
        self.extras: dict = {}
        self._best = math.inf

    @property
    def remaining(self) -> int:
        return self.budget - self.n_eval

    @property
    def best(self) -> float:
        return self._best

    def evaluate(self, x) -> float:
        if self.n_eval >= self.budget:
            raise BudgetExhausted()
        clamped = np.clip(np.asarray(x, dtype=float), self.lb, self.ub)
        t0 = time.perf_counter()
        fitness = self.problem.evaluate(clamped)
        self.wall_eval += time.perf_counter() - t0
        self.n_eval += 1
        if not math.isfinite(fitness):
            self.eval_failures += 1
            fitness = math.inf
        if fitness < self._best:
            self._best = fitness
            self.checkpoints.append((self.n_eval, fitness))
        return fitness

    def stage_values(self) -> dict[int, float]:
        """Best-so-far fitness at 10% / 50% / 100% of the budget."""
        out = {}
        for pct in STAGES:
            cut = max(1, (pct * self.budget) // 100)
            best = math.inf
            for idx, fit in self.checkpoints:
                if idx <= cut:
                    best = fit
                else:
                    break
            out[pct] = best
        return out

    def finish(
        self,
        problem_id: str,
        method_id: str,
        seed: int,
        wall_total: float,
        budget_truncated: bool,
    ) -> RunTrace:
        if not self.checkpoints:
            raise RuntimeError("run finished without a single evaluation")
        return RunTrace(
            problem_id=problem_id,
            method_id=method_id,
            seed=seed,
            budget=self.budget,
            n_eval=self.n_eval,
            stage_fitness=self.stage_values(),
            checkpoints=list(self.checkpoints),
            wall_total=wall_total,
            wall_eval=self.wall_eval,
            eval_failures=self.eval_failures,
            budget_truncated=budget_truncated,
            extras=dict(self.extras),
        )
