"""
Rank Partitioning survival ranking.

Objectives are visited in priority order. The population is sorted on the
first (binned) objective and split into partitions of equal bin; every
partition with more than one member is then sorted on the next objective and
split again, until objectives run out or every partition is a singleton.
The final order gives each individual a unique rank, 1 being the best.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from vinedesign.evaluation import OBJECTIVE_KEYS, FitnessVector

DEFAULT_BINS = {"f_ik": 0.5, "f_length": 5.0}


class Outcome(str, Enum):
    A_BETTER = "a_better"
    B_BETTER = "b_better"
    TIE = "tie"


@dataclass(frozen=True)
class RankingScheme:
    """Priority order of the objective columns plus bin widths (``None`` = exact)."""

    order: tuple = OBJECTIVE_KEYS
    bins: dict = field(default_factory=lambda: dict(DEFAULT_BINS))

    def __post_init__(self):
        if sorted(self.order) != sorted(OBJECTIVE_KEYS):
            raise ValueError(f"order must be a permutation of {OBJECTIVE_KEYS}, got {self.order}")
        for key, width in self.bins.items():
            if key not in OBJECTIVE_KEYS:
                raise ValueError(f"unknown objective '{key}' in bins")
            if width is not None and not width > 0:
                raise ValueError(f"bin width for {key} must be > 0")

    def keys(self, objectives) -> np.ndarray:
        """Binned key matrix ``(N, 5)`` with columns in priority order.

        ``objectives`` columns are in ``OBJECTIVE_KEYS`` order.
        """
        objectives = np.atleast_2d(np.asarray(objectives, dtype=float))
        cols = []
        for key in self.order:
            v = objectives[:, OBJECTIVE_KEYS.index(key)]
            width = self.bins.get(key)
            cols.append(np.floor(v / width) if width else v)
        return np.stack(cols, axis=1)


DEFAULT_SCHEME = RankingScheme()


def _as_matrix(population) -> np.ndarray:
    if len(population) and isinstance(population[0], FitnessVector):
        return np.array([f.as_array() for f in population])
    return np.atleast_2d(np.asarray(population, dtype=float))


def rank_partition(population, scheme: RankingScheme = DEFAULT_SCHEME) -> np.ndarray:
    """1-based rank of every individual; full ties keep input order."""
    keys = scheme.keys(_as_matrix(population))
    n_pop = keys.shape[0]
    order = np.arange(n_pop)
    # partition id of each position in ``order``; starts as one partition
    part = np.zeros(n_pop, dtype=np.int64)
    for level in range(keys.shape[1]):
        col = keys[order, level]
        # stable sort inside each partition: partition id first, key second
        perm = np.lexsort((col, part))
        order, part, col = order[perm], part[perm], col[perm]
        boundary = np.ones(n_pop, dtype=bool)
        boundary[1:] = (part[1:] != part[:-1]) | (col[1:] != col[:-1])
        part = np.cumsum(boundary) - 1
        if boundary.all():
            break
    ranks = np.empty(n_pop, dtype=np.int64)
    ranks[order] = np.arange(1, n_pop + 1)
    return ranks


def compare(a, b, scheme: RankingScheme = DEFAULT_SCHEME) -> Outcome:
    ka, kb = scheme.keys(_as_matrix([a, b]))
    for x, y in zip(ka, kb):
        if x < y:
            return Outcome.A_BETTER
        if x > y:
            return Outcome.B_BETTER
    return Outcome.TIE


def compare_batch(a, b, scheme: RankingScheme = DEFAULT_SCHEME) -> np.ndarray:
    """Row-wise :func:`compare` as integers: -1 a better, +1 b better, 0 tie."""
    ka = scheme.keys(a)
    kb = scheme.keys(b)
    diff = np.sign(ka - kb)
    nonzero = diff != 0
    first = np.argmax(nonzero, axis=1)
    out = diff[np.arange(len(diff)), first]
    return np.where(nonzero.any(axis=1), out, 0).astype(int)


def select_best(incumbent, candidates, scheme: RankingScheme = DEFAULT_SCHEME):
    """Rank-1 of ``{incumbent} + candidates``; the incumbent survives ties."""
    best = incumbent
    for c in candidates:
        if best is None or compare(c, best, scheme) is Outcome.A_BETTER:
            best = c
    return best
