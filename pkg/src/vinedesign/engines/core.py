"""
Generational loop shared by all engines.

Initialization, evaluation and best-so-far tracking live here; each engine
supplies a ``step`` that produces the next population (variation, evaluation
and survival) from the current one.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from vinedesign.engines.config import EngineConfig
from vinedesign.evaluation import BatchEvaluator, FitnessVector, PenaltyConfig
from vinedesign.ranking import DEFAULT_SCHEME, RankingScheme, compare_batch, rank_partition
from vinedesign.robot import Genotype, Task


@dataclass
class Population:
    x: np.ndarray
    objectives: np.ndarray
    violations: np.ndarray
    ranks: np.ndarray
    state: dict = field(default_factory=dict)

    @property
    def size(self) -> int:
        return self.x.shape[0]

    def leader(self) -> int:
        return int(np.argmin(self.ranks))


@dataclass
class Context:
    task: Task
    config: EngineConfig
    evaluate: BatchEvaluator
    scheme: RankingScheme
    lower: np.ndarray
    upper: np.ndarray
    rng: np.random.Generator

    def assess(self, x) -> tuple[np.ndarray, np.ndarray]:
        result = self.evaluate(x)
        return result.objectives, result.violations

    def clip(self, x):
        return np.clip(x, self.lower, self.upper)

    def rank(self, objectives):
        return rank_partition(objectives, self.scheme)

    def better(self, a, b) -> np.ndarray:
        """Row mask where ``a`` strictly beats ``b``."""
        return compare_batch(a, b, self.scheme) < 0


@dataclass
class Individual:
    x: np.ndarray
    genotype: Genotype
    fitness: FitnessVector


@dataclass
class RunResult:
    best: Individual
    history: list
    leader_history: np.ndarray
    config: EngineConfig


def random_population(ctx: Context, size: int) -> np.ndarray:
    return ctx.rng.uniform(ctx.lower, ctx.upper, size=(size, ctx.lower.size))


def initial_population(ctx: Context) -> Population:
    x = random_population(ctx, ctx.config.N)
    obj, viol = ctx.assess(x)
    return Population(x, obj, viol, ctx.rank(obj))


def run_engine(
    task: Task,
    config: EngineConfig,
    penalty: PenaltyConfig = PenaltyConfig(),
    scheme: RankingScheme = DEFAULT_SCHEME,
    callback=None,
) -> RunResult:
    """Evolve a design for ``task``; deterministic for a given ``config.seed``.

    ``history`` holds the best-so-far fitness after initialization and after
    each generation (``G + 1`` entries). ``leader_history`` holds the rank-1
    objectives of the population at the same points.
    """
    from vinedesign.engines import STEPS

    lower, upper = task.bounds()
    ctx = Context(
        task=task,
        config=config,
        evaluate=BatchEvaluator(task, penalty),
        scheme=scheme,
        lower=lower,
        upper=upper,
        rng=np.random.default_rng(config.seed),
    )
    init, step = STEPS[config.algorithm]
    pop = init(ctx)

    lead = pop.leader()
    best_x = pop.x[lead].copy()
    best_obj = pop.objectives[lead].copy()
    best_viol = int(pop.violations[lead])
    history = [FitnessVector.from_array(best_obj, best_viol)]
    leaders = [pop.objectives[lead].copy()]

    for g in range(1, config.G + 1):
        pop = step(pop, ctx, g)
        lead = pop.leader()
        if ctx.better(pop.objectives[lead][None], best_obj[None])[0]:
            best_x = pop.x[lead].copy()
            best_obj = pop.objectives[lead].copy()
            best_viol = int(pop.violations[lead])
        history.append(FitnessVector.from_array(best_obj, best_viol))
        leaders.append(pop.objectives[lead].copy())
        if callback is not None:
            callback(g, history[-1])

    best = Individual(
        x=best_x,
        genotype=Genotype.from_vector(best_x, task),
        fitness=FitnessVector.from_array(best_obj, best_viol),
    )
    return RunResult(best=best, history=history, leader_history=np.array(leaders), config=config)
