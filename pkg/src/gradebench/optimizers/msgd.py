"""Multi-scale grid descent: coordinate probing over nested grids.

At scale s the per-axis step is (ub - lb) / (divisions * base**s).  Each
pass walks every axis in both directions, riding improvements as far as they
go; when a full pass yields nothing the scale refines.  Exhausting the
finest scale triggers a random restart, the only stochastic element.
"""

from __future__ import annotations

import numpy as np

from gradebench.optimizers.trace import BudgetedRun

DEFAULTS = {"divisions": 10, "base": 4, "scale_max": 15}


def run(ctx: BudgetedRun, params, rng: np.random.Generator) -> None:
    span = ctx.ub - ctx.lb
    divisions = params["divisions"]
    base = params["base"]
    scale_max = params["scale_max"]
    restarts = -1

    while True:
        restarts += 1
        ctx.extras["restarts"] = restarts
        x = rng.uniform(ctx.lb, ctx.ub)
        fx = ctx.evaluate(x)

        for scale in range(scale_max + 1):
            h = span / (divisions * base**scale)
            improved = True
            while improved:
                improved = False
                for j in range(ctx.dim):
                    for sign in (1.0, -1.0):
                        moved = False
                        while True:
                            cand = x.copy()
                            cand[j] = np.clip(x[j] + sign * h[j], ctx.lb[j], ctx.ub[j])
                            if cand[j] == x[j]:
                                break
                            fc = ctx.evaluate(cand)
                            if fc < fx:
                                x, fx = cand, fc
                                moved = improved = True
                            else:
                                break
                        if moved:
                            break  # direction found; skip probing the other way
