"""Random Search: uniform batches of size D until the budget runs out.

Deliberately naive; doubles as the statistical reference generator for the
grade's middle anchor.
"""

from __future__ import annotations

import numpy as np

from gradebench.optimizers.trace import BudgetedRun

DEFAULTS: dict = {"batch_size": None}  # None -> problem dimension


def run(ctx: BudgetedRun, params, rng: np.random.Generator) -> None:
    batch = params.get("batch_size") or ctx.dim
    while True:
        points = rng.uniform(ctx.lb, ctx.ub, size=(batch, ctx.dim))
        for row in points:
            ctx.evaluate(row)
