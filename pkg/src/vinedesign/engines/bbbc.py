"""Big Bang-Big Crunch: regenerate the population around the rank-1 individual."""

from __future__ import annotations

import numpy as np

from vinedesign.engines.core import Context, Population, initial_population


def big_bang(center, size, lower, upper, generation, rng):
    """Normal scatter around ``center`` whose scale shrinks as ``1 / (1 + generation)``."""
    scale = (upper - lower) / (1.0 + generation)
    x = center + rng.standard_normal((size, center.size)) * scale
    return np.clip(x, lower, upper)


def step(pop: Population, ctx: Context, g: int) -> Population:
    center = pop.x[pop.leader()]
    x = big_bang(center, pop.size, ctx.lower, ctx.upper, g - 1, ctx.rng)
    obj, viol = ctx.assess(x)
    return Population(x, obj, viol, ctx.rank(obj))


init = initial_population
