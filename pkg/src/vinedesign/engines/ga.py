"""Real-coded GA: binary tournament, blx-alpha crossover, uniform random mutation."""

from __future__ import annotations

import numpy as np

from vinedesign.engines.core import Context, Population, initial_population


def binary_tournament(ranks, rng, count):
    a = rng.integers(0, ranks.size, count)
    b = rng.integers(0, ranks.size, count)
    return np.where(ranks[a] <= ranks[b], a, b)


def blx_alpha(p1, p2, alpha, rng):
    """Each child gene uniform in ``[min - alpha*range, max + alpha*range]`` of its parents."""
    lo = np.minimum(p1, p2)
    hi = np.maximum(p1, p2)
    spread = alpha * (hi - lo)
    return rng.uniform(lo - spread, hi + spread)


def random_mutation(x, lower, upper, rate, rng):
    mask = rng.random(x.shape) < rate
    fresh = rng.uniform(lower, upper, size=x.shape)
    return np.where(mask, fresh, x)


def ga_offspring(x, ranks, lower, upper, alpha, p_c, p_m, rng):
    """``len(x)`` children, each bred from two tournament winners."""
    n_pop = x.shape[0]
    first = binary_tournament(ranks, rng, n_pop)
    second = binary_tournament(ranks, rng, n_pop)
    child = blx_alpha(x[first], x[second], alpha, rng)
    if p_c < 1.0:
        keep = rng.random(n_pop) >= p_c
        child[keep] = x[first][keep]
    child = np.clip(child, lower, upper)
    return random_mutation(child, lower, upper, p_m, rng)


def step(pop: Population, ctx: Context, g: int) -> Population:
    cfg = ctx.config
    off = ga_offspring(pop.x, pop.ranks, ctx.lower, ctx.upper, cfg.alpha, cfg.p_c, cfg.mutation_rate(g), ctx.rng)
    obj, viol = ctx.assess(off)
    if not cfg.elitist:
        return Population(off, obj, viol, ctx.rank(obj))
    # (mu + lambda): rank the union, keep the N best
    x = np.concatenate([pop.x, off])
    obj = np.concatenate([pop.objectives, obj])
    viol = np.concatenate([pop.violations, viol])
    keep = np.argsort(ctx.rank(obj), kind="stable")[: pop.size]
    return Population(x[keep], obj[keep], viol[keep], np.arange(1, pop.size + 1))


init = initial_population
