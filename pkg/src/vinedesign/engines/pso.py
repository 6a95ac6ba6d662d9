"""Global-best PSO with inertia weight and per-gene velocity clamping."""

from __future__ import annotations

import numpy as np

from vinedesign.engines.core import Context, Population, initial_population

VELOCITY_CLAMP = 0.2


def pso_move(x, v, pbest, gbest, lower, upper, omega, c1, c2, rng):
    """One velocity/position update; returns the new ``(x, v)``."""
    r1 = rng.random(x.shape)
    r2 = rng.random(x.shape)
    v = omega * v + c1 * r1 * (pbest - x) + c2 * r2 * (gbest - x)
    vmax = VELOCITY_CLAMP * (upper - lower)
    v = np.clip(v, -vmax, vmax)
    return np.clip(x + v, lower, upper), v


def init(ctx: Context) -> Population:
    pop = initial_population(ctx)
    pop.state = {
        "velocity": np.zeros_like(pop.x),
        "pbest_x": pop.x.copy(),
        "pbest_obj": pop.objectives.copy(),
        "gbest": pop.x[pop.leader()].copy(),
    }
    return pop


def step(pop: Population, ctx: Context, g: int) -> Population:
    cfg = ctx.config
    s = pop.state
    x, v = pso_move(
        pop.x, s["velocity"], s["pbest_x"], s["gbest"], ctx.lower, ctx.upper, cfg.omega, cfg.c1, cfg.c2, ctx.rng
    )
    obj, viol = ctx.assess(x)
    improved = ctx.better(obj, s["pbest_obj"])
    pbest_x = np.where(improved[:, None], x, s["pbest_x"])
    pbest_obj = np.where(improved[:, None], obj, s["pbest_obj"])
    ranks = ctx.rank(obj)
    state = {
        "velocity": v,
        "pbest_x": pbest_x,
        "pbest_obj": pbest_obj,
        "gbest": x[int(np.argmin(ranks))].copy(),
    }
    return Population(x, obj, viol, ranks, state)
