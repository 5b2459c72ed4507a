"""Built-in optimization methods behind one interface, plus the external
subprocess adapter."""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from gradebench.optimizers import lshade, msgd, nelder_mead, pso, random_search
from gradebench.optimizers.external import run_external
from gradebench.optimizers.trace import BudgetedRun, BudgetExhausted, RunTrace

__all__ = [
    "OptimizerSpec",
    "RunTrace",
    "BudgetedRun",
    "BudgetExhausted",
    "optimize",
    "builtin_ids",
    "run_external",
]


@dataclass(frozen=True)
class _Builtin:
    runner: object
    defaults: dict
    scope: str
    kind: str


_BUILTINS: dict[str, _Builtin] = {
    "rs": _Builtin(random_search.run, random_search.DEFAULTS, "global", "stochastic"),
    "nm": _Builtin(nelder_mead.run, nelder_mead.DEFAULTS, "local", "deterministic"),
    "msgd": _Builtin(msgd.run, msgd.DEFAULTS, "local", "deterministic"),
    "pso": _Builtin(pso.run, pso.DEFAULTS, "global", "stochastic"),
    "lshade": _Builtin(lshade.run, lshade.DEFAULTS, "global", "stochastic"),
}


def builtin_ids() -> list[str]:
    return list(_BUILTINS)


@dataclass(frozen=True)
class OptimizerSpec:
    """A method plus its parameters; external methods carry a command line."""

    id: str
    params: dict = field(default_factory=dict)
    command: str | None = None  # set -> external ask/tell subprocess

    def __post_init__(self):
        if self.command is None:
            if self.id not in _BUILTINS:
                raise ValueError(
                    f"unknown method {self.id!r}; built-ins: {', '.join(_BUILTINS)}"
                )
            allowed = set(_BUILTINS[self.id].defaults)
            unknown = set(self.params) - allowed
            if unknown:
                raise ValueError(
                    f"{self.id}: unknown parameters {sorted(unknown)}; allowed: {sorted(allowed)}"
                )

    @property
    def is_external(self) -> bool:
        return self.command is not None

    @property
    def scope(self) -> str:
        return "unknown" if self.is_external else _BUILTINS[self.id].scope

    @property
    def kind(self) -> str:
        return "unknown" if self.is_external else _BUILTINS[self.id].kind

    def resolved_params(self) -> dict:
        if self.is_external:
            return dict(self.params)
        merged = dict(_BUILTINS[self.id].defaults)
        merged.update(self.params)
        return merged


def optimize(spec: OptimizerSpec, problem, budget: int, seed: int) -> RunTrace:
    """Run one method on one problem under a hard evaluation cap.

    Deterministic for built-ins: (method, problem, budget, seed) fully
    determines the trace.  Candidate points are clamped to bounds before
    evaluation and non-finite fitness counts as +inf.
    """
    if budget < 1:
        raise ValueError("budget must be positive")
    if spec.is_external:
        return run_external(spec.command, problem, budget, seed, spec.id)

    ctx = BudgetedRun(problem, budget)
    rng = np.random.default_rng(seed)
    t_start = time.perf_counter()
    truncated = False
    try:
        _BUILTINS[spec.id].runner(ctx, spec.resolved_params(), rng)
    except BudgetExhausted:
        truncated = True
    return ctx.finish(
        problem_id=problem.id,
        method_id=spec.id,
        seed=seed,
        wall_total=time.perf_counter() - t_start,
        budget_truncated=truncated,
    )
