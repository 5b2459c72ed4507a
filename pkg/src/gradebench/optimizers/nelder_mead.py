"""Nelder-Mead simplex with dimension-adaptive coefficients and restarts.

Coefficients follow the adaptive rule (reflection 1, expansion 1 + 2/n,
contraction 0.75 - 1/(2n), shrink 1 - 1/n), which coincides with the classic
parameters at n = 2; n = 1 keeps the classic set since the adaptive shrink
degenerates to zero there.  When the simplex collapses the search restarts
from a fresh uniform point until the budget is exhausted.
"""

from __future__ import annotations

import numpy as np

from gradebench.optimizers.trace import BudgetedRun

DEFAULTS = {"step_init": 0.4}  # initial simplex extent as a fraction of range

COLLAPSE_FRACTION = 1e-12


def _coefficients(n: int):
    if n == 1:
        return 1.0, 2.0, 0.5, 0.5
    return 1.0, 1.0 + 2.0 / n, 0.75 - 1.0 / (2.0 * n), 1.0 - 1.0 / n


def _initial_simplex(ctx: BudgetedRun, rng, step_frac: float):
    span = ctx.ub - ctx.lb
    x0 = rng.uniform(ctx.lb, ctx.ub)
    vertices = [x0]
    for j in range(ctx.dim):
        step = step_frac * span[j]
        # Flip the offset inward when it would leave the box.
        if x0[j] + step > ctx.ub[j]:
            step = -step
        v = x0.copy()
        v[j] += step
        vertices.append(v)
    return vertices


def run(ctx: BudgetedRun, params, rng: np.random.Generator) -> None:
    n = ctx.dim
    alpha, beta, gamma, delta = _coefficients(n)
    span = float(np.max(ctx.ub - ctx.lb))
    restarts = -1

    while True:
        restarts += 1
        ctx.extras["restarts"] = restarts
        xs = _initial_simplex(ctx, rng, params["step_init"])
        fs = [ctx.evaluate(x) for x in xs]

        while True:
            order = np.argsort(fs, kind="stable")
            xs = [xs[i] for i in order]
            fs = [fs[i] for i in order]

            diameter = max(np.max(np.abs(x - xs[0])) for x in xs[1:])
            if diameter < COLLAPSE_FRACTION * span:
                break  # restart from a fresh point

            centroid = np.mean(xs[:-1], axis=0)
            worst = xs[-1]
            xr = centroid + alpha * (centroid - worst)
            fr = ctx.evaluate(xr)

            if fr < fs[0]:
                xe = centroid + beta * (centroid - worst)
                fe = ctx.evaluate(xe)
                if fe < fr:
                    xs[-1], fs[-1] = xe, fe
                else:
                    xs[-1], fs[-1] = xr, fr
            elif fr < fs[-2]:
                xs[-1], fs[-1] = xr, fr
            else:
                if fr < fs[-1]:
                    xc = centroid + gamma * (xr - centroid)  # outside contraction
                    fc = ctx.evaluate(xc)
                    accept = fc <= fr
                else:
                    xc = centroid - gamma * (centroid - worst)  # inside contraction
                    fc = ctx.evaluate(xc)
                    accept = fc < fs[-1]
                if accept:
                    xs[-1], fs[-1] = xc, fc
                else:
                    best = xs[0]
                    for i in range(1, n + 1):
                        xs[i] = best + delta * (xs[i] - best)
                        fs[i] = ctx.evaluate(xs[i])
