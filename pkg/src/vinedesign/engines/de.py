"""Differential evolution with the six classic mutation variants and per-slot selection."""

from __future__ import annotations

import numpy as np

from vinedesign.engines.config import DE_PARTNERS
from vinedesign.engines.core import Context, Population, initial_population


def distinct_partners(n_pop, k, rng):
    """``(n_pop, k)`` indices, distinct within a row and never equal to the row index."""
    own = np.arange(n_pop)[:, None]

    def draw(rows):
        idx = rng.integers(0, n_pop - 1, size=(rows.size, k))
        return idx + (idx >= own[rows])

    rows = np.arange(n_pop)
    idx = draw(rows)
    while True:
        srt = np.sort(idx, axis=1)
        dup = np.any(srt[:, 1:] == srt[:, :-1], axis=1)
        if not dup.any():
            return idx
        idx[dup] = draw(rows[dup])


def de_mutant(x, best, variant, F, rng):
    n_pop = x.shape[0]
    r = distinct_partners(n_pop, DE_PARTNERS[variant], rng)
    if variant == "rand/1":
        return x[r[:, 0]] + F * (x[r[:, 1]] - x[r[:, 2]])
    if variant == "best/1":
        return best + F * (x[r[:, 0]] - x[r[:, 1]])
    if variant == "rand/2":
        return x[r[:, 0]] + F * (x[r[:, 1]] - x[r[:, 2]]) + F * (x[r[:, 3]] - x[r[:, 4]])
    if variant == "best/2":
        return best + F * (x[r[:, 0]] - x[r[:, 1]]) + F * (x[r[:, 2]] - x[r[:, 3]])
    if variant == "current-to-best/1":
        return x + F * (best - x) + F * (x[r[:, 0]] - x[r[:, 1]])
    if variant == "current-to-rand/1":
        K = rng.random((n_pop, 1))
        return x + K * (x[r[:, 0]] - x) + F * (x[r[:, 1]] - x[r[:, 2]])
    raise ValueError(f"unknown DE variant {variant!r}")


def binomial_crossover(x, mutant, CR, rng):
    """Take mutant genes with probability CR, plus one guaranteed random gene per row."""
    n_pop, dim = x.shape
    take = rng.random((n_pop, dim)) < CR
    take[np.arange(n_pop), rng.integers(0, dim, n_pop)] = True
    return np.where(take, mutant, x)


def de_trials(x, best, lower, upper, variant, F, CR, rng):
    mutant = de_mutant(x, best, variant, F, rng)
    if variant != "current-to-rand/1":
        mutant = binomial_crossover(x, mutant, CR, rng)
    return np.clip(mutant, lower, upper)


def step(pop: Population, ctx: Context, g: int) -> Population:
    cfg = ctx.config
    best = pop.x[pop.leader()]
    trial = de_trials(pop.x, best, ctx.lower, ctx.upper, cfg.variant, cfg.F, cfg.CR, ctx.rng)
    obj, viol = ctx.assess(trial)
    win = ctx.better(obj, pop.objectives)
    x = np.where(win[:, None], trial, pop.x)
    obj = np.where(win[:, None], obj, pop.objectives)
    viol = np.where(win, viol, pop.violations)
    return Population(x, obj, viol, ctx.rank(obj))


init = initial_population
