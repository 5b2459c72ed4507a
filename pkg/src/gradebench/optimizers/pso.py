"""Particle swarm with inertia weight and clamped velocities."""

from __future__ import annotations

import numpy as np

from gradebench.optimizers.trace import BudgetedRun

DEFAULTS = {"n": None, "w": 0.72, "c1": 1.0, "c2": 1.0}  # n = max(10, D)


def swarm_size(dim: int, n_param=None) -> int:
    return n_param if n_param else max(10, dim)


def run(ctx: BudgetedRun, params, rng: np.random.Generator) -> None:
    n = swarm_size(ctx.dim, params.get("n"))
    w, c1, c2 = params["w"], params["c1"], params["c2"]
    vmax = 0.5 * (ctx.ub - ctx.lb)

    pos = rng.uniform(ctx.lb, ctx.ub, size=(n, ctx.dim))
    vel = np.zeros_like(pos)
    pbest = pos.copy()
    pbest_f = np.array([ctx.evaluate(p) for p in pos])
    g = int(np.argmin(pbest_f))
    gbest, gbest_f = pbest[g].copy(), pbest_f[g]

    while True:
        for i in range(n):
            r1 = rng.random(ctx.dim)
            r2 = rng.random(ctx.dim)
            vel[i] = (
                w * vel[i]
                + c1 * r1 * (pbest[i] - pos[i])
                + c2 * r2 * (gbest - pos[i])
            )
            np.clip(vel[i], -vmax, vmax, out=vel[i])
            pos[i] = np.clip(pos[i] + vel[i], ctx.lb, ctx.ub)
            f = ctx.evaluate(pos[i])
            if f < pbest_f[i]:
                pbest[i], pbest_f[i] = pos[i].copy(), f
                if f < gbest_f:
                    gbest, gbest_f = pos[i].copy(), f
