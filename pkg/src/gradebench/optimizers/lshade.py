"""Success-history adaptive differential evolution with linear population
size reduction.

current-to-pbest/1 mutation with an external archive of replaced parents,
success-history memories for the scale factor and crossover rate (weighted
Lehmer means, with the sticky terminal rule for the crossover memory), and a
population that shrinks linearly from n_init down to 4 across the budget.
"""

from __future__ import annotations

import numpy as np

from gradebench.optimizers.trace import BudgetedRun

DEFAULTS = {
    "n_init": None,  # None -> max(30, 5 * D)
    "f_archive": 2.6,
    "h_size": 6,
    "p_mut": 0.11,
}

MIN_POP = 4
_CR_TERMINAL = -1.0  # sticky sentinel for the crossover-rate memory


def initial_population_size(dim: int, n_init=None) -> int:
    return n_init if n_init else max(30, 5 * dim)


def _sample_f(rng: np.random.Generator, loc: float) -> float:
    while True:
        f = loc + 0.1 * rng.standard_cauchy()
        if f > 0.0:
            return min(f, 1.0)


def run(ctx: BudgetedRun, params, rng: np.random.Generator, observer=None) -> None:
    dim = ctx.dim
    n_init = initial_population_size(dim, params.get("n_init"))
    h_size = params["h_size"]
    p_rate = params["p_mut"]
    archive_rate = params["f_archive"]

    mem_f = np.full(h_size, 0.5)
    mem_cr = np.full(h_size, 0.5)
    mem_pos = 0

    pop = rng.uniform(ctx.lb, ctx.ub, size=(n_init, dim))
    fit = np.array([ctx.evaluate(x) for x in pop])
    archive: list[np.ndarray] = []

    while True:
        n = len(pop)
        order = np.argsort(fit, kind="stable")
        p_count = max(2, int(round(p_rate * n)))
        p_top = order[:p_count]

        success_f, success_cr, success_df = [], [], []
        children = np.empty_like(pop)
        child_fit = np.empty(n)

        for i in range(n):
            r = rng.integers(h_size)
            f_i = _sample_f(rng, mem_f[r])
            if mem_cr[r] == _CR_TERMINAL:
                cr_i = 0.0
            else:
                cr_i = float(np.clip(rng.normal(mem_cr[r], 0.1), 0.0, 1.0))

            pbest = pop[rng.choice(p_top)]
            r1 = i
            while r1 == i:
                r1 = int(rng.integers(n))
            r2 = i
            while r2 == i or r2 == r1:
                r2 = int(rng.integers(n + len(archive)))
            donor2 = pop[r2] if r2 < n else archive[r2 - n]

            mutant = pop[i] + f_i * (pbest - pop[i]) + f_i * (pop[r1] - donor2)
            np.clip(mutant, ctx.lb, ctx.ub, out=mutant)

            cross = rng.random(dim) <= cr_i
            cross[rng.integers(dim)] = True
            child = np.where(cross, mutant, pop[i])
            cf = ctx.evaluate(child)

            children[i] = child
            child_fit[i] = cf
            if cf < fit[i]:
                success_f.append(f_i)
                success_cr.append(cr_i)
                success_df.append(fit[i] - cf)

        replaced = child_fit <= fit
        strictly = child_fit < fit
        for i in np.nonzero(strictly)[0]:
            archive.append(pop[i].copy())
        pop[replaced] = children[replaced]
        fit[replaced] = child_fit[replaced]

        if success_f:
            w = np.asarray(success_df)
            w = w / w.sum()
            sf = np.asarray(success_f)
            scr = np.asarray(success_cr)
            mem_f[mem_pos] = np.sum(w * sf * sf) / np.sum(w * sf)
            if mem_cr[mem_pos] == _CR_TERMINAL or scr.max() <= 0.0:
                mem_cr[mem_pos] = _CR_TERMINAL
            else:
                mem_cr[mem_pos] = np.sum(w * scr * scr) / np.sum(w * scr)
            mem_pos = (mem_pos + 1) % h_size

        # Linear population size reduction against evaluations used.
        n_target = max(
            MIN_POP, int(round(n_init + (MIN_POP - n_init) * ctx.n_eval / ctx.budget))
        )
        if n_target < len(pop):
            keep = np.argsort(fit, kind="stable")[:n_target]
            keep.sort()
            pop = pop[keep]
            fit = fit[keep]

        archive_bound = max(1, int(round(archive_rate * len(pop))))
        while len(archive) > archive_bound:
            archive.pop(int(rng.integers(len(archive))))

        ctx.extras["pop_size"] = len(pop)
        if observer is not None:
            observer(
                {
                    "pop_size": len(pop),
                    "archive_size": len(archive),
                    "archive_bound": archive_bound,
                    "n_eval": ctx.n_eval,
                }
            )
