import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from vinedesign.evaluation import OBJECTIVE_KEYS, FitnessVector
from vinedesign.ranking import (
    DEFAULT_SCHEME,
    Outcome,
    RankingScheme,
    compare,
    compare_batch,
    rank_partition,
    select_best,
)


def oracle_ranks(pop, scheme=DEFAULT_SCHEME):
    """Stable sort of binned tuples in priority order using plain Python."""
    def key(i):
        row = pop[i]
        out = []
        for name in scheme.order:
            v = row[OBJECTIVE_KEYS.index(name)]
            w = scheme.bins.get(name)
            out.append(math.floor(v / w) if w else v)
        return tuple(out)

    order = sorted(range(len(pop)), key=key)
    ranks = [0] * len(pop)
    for pos, i in enumerate(order, 1):
        ranks[i] = pos
    return ranks


def population(rng, size):
    """Objective rows with many ties so every priority level matters."""
    return np.column_stack(
        [
            rng.uniform(0, 3, size),
            rng.integers(2, 8, size),
            rng.choice([0.0, 12.5, 25.0, 37.5], size),
            rng.integers(2, 6, size),
            rng.uniform(100, 130, size),
        ]
    ).astype(float)


def fv(*values):
    return FitnessVector(*values)


class TestRankPartition:
    def test_example(self):
        a = fv(0.2, 5, 0, 2, 100)
        b = fv(0.4, 3, 0, 2, 100)
        c = fv(1.0, 4, 0, 2, 100)
        assert list(rank_partition([a, b, c])) == [2, 1, 3]

    def test_single(self):
        assert list(rank_partition([fv(1, 2, 3, 4, 5)])) == [1]

    def test_identical_stable(self):
        pop = [fv(1, 2, 3, 4, 5)] * 6
        assert list(rank_partition(pop)) == [1, 2, 3, 4, 5, 6]

    def test_oracle_default(self):
        rng = np.random.default_rng(0)
        for _ in range(100):
            pop = population(rng, int(rng.integers(1, 200)))
            assert list(rank_partition(pop)) == oracle_ranks(pop)

    def test_oracle_custom_scheme(self):
        scheme = RankingScheme(
            order=("f_length", "f_ik", "f_links_on_seg", "f_undulation", "f_links_to_seg"),
            bins={"f_ik": 1.0, "f_length": 10.0, "f_undulation": 20.0},
        )
        rng = np.random.default_rng(1)
        for _ in range(50):
            pop = population(rng, int(rng.integers(1, 120)))
            assert list(rank_partition(pop, scheme)) == oracle_ranks(pop, scheme)

    def test_bad_scheme(self):
        with pytest.raises(ValueError):
            RankingScheme(order=("f_ik",))
        with pytest.raises(ValueError):
            RankingScheme(bins={"f_ik": 0})

    @settings(max_examples=100, deadline=None)
    @given(st.integers(1, 60), st.integers(0, 2**32 - 1))
    def test_is_permutation(self, size, seed):
        ranks = rank_partition(population(np.random.default_rng(seed), size))
        assert sorted(ranks) == list(range(1, size + 1))


class TestCompare:
    def test_examples(self):
        assert compare(fv(0.1, 9, 9, 9, 9), fv(0.6, 0, 0, 0, 0)) is Outcome.A_BETTER
        assert compare(fv(0.1, 4, 0, 2, 100), fv(0.4, 4, 0, 2, 101)) is Outcome.TIE
        assert compare(fv(0.1, 4, 0, 2, 100), fv(0.4, 3, 0, 2, 101)) is Outcome.B_BETTER

    def test_batch_matches_scalar(self):
        rng = np.random.default_rng(2)
        a, b = population(rng, 500), population(rng, 500)
        codes = {Outcome.A_BETTER: -1, Outcome.TIE: 0, Outcome.B_BETTER: 1}
        expected = [codes[compare(a[i], b[i])] for i in range(500)]
        assert list(compare_batch(a, b)) == expected

    def test_transitivity(self):
        rng = np.random.default_rng(3)
        order = {Outcome.A_BETTER: -1, Outcome.TIE: 0, Outcome.B_BETTER: 1}
        for _ in range(1000):
            a, b, c = population(rng, 3)
            ab, bc, ac = order[compare(a, b)], order[compare(b, c)], order[compare(a, c)]
            if ab <= 0 and bc <= 0:
                assert ac <= 0
                if ab < 0 or bc < 0:
                    assert ac < 0

    def test_consistent_with_ranks(self):
        rng = np.random.default_rng(4)
        pop = population(rng, 80)
        ranks = rank_partition(pop)
        for i in range(80):
            for j in range(80):
                if compare(pop[i], pop[j]) is Outcome.A_BETTER:
                    assert ranks[i] < ranks[j]


class TestSelectBest:
    inc = fv(0.1, 3, 0, 2, 100)

    def test_incumbent_better(self):
        assert select_best(self.inc, [fv(0.6, 3, 0, 2, 100)]) is self.inc

    def test_candidate_better(self):
        cand = fv(0.1, 2, 50, 9, 200)
        assert select_best(self.inc, [cand]) is cand

    def test_tie_keeps_incumbent(self):
        assert select_best(self.inc, [fv(0.2, 3, 0, 2, 101)]) is self.inc

    def test_no_incumbent(self):
        a, b = fv(1, 1, 1, 1, 1), fv(0.2, 1, 1, 1, 1)
        assert select_best(None, [a, b]) is b
