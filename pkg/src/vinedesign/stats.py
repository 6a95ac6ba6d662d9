"""
Friedman test with Bonferroni-Dunn post-hoc comparison.

Rows of the input matrix are blocks (runs), columns are treatments
(algorithms or parameter combinations); lower values are better. Values are
re-ranked inside each block, ties sharing their average rank.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.stats import chi2, norm, rankdata

from vinedesign.errors import DegenerateInput


@dataclass
class FriedmanResult:
    chi2: float
    p_value: float
    average_ranks: np.ndarray
    critical_difference: float
    significant: np.ndarray
    alpha: float
    n_blocks: int

    @property
    def k(self) -> int:
        return self.average_ranks.size


def bonferroni_dunn_q(k: int, alpha: float) -> float:
    """Two-tailed normal critical value with alpha split over the k-1 comparisons against one control."""
    return float(norm.ppf(1.0 - alpha / (2.0 * (k - 1))))


def critical_difference(k: int, n_blocks: int, alpha: float = 0.05) -> float:
    return bonferroni_dunn_q(k, alpha) * np.sqrt(k * (k + 1) / (6.0 * n_blocks))


def friedman_statistic(average_ranks, n_blocks: int) -> float:
    r = np.asarray(average_ranks, dtype=float)
    k = r.size
    return 12.0 * n_blocks / (k * (k + 1)) * (np.sum(r**2) - k * (k + 1) ** 2 / 4.0)


def friedman_test(matrix, alpha: float = 0.05) -> FriedmanResult:
    """Friedman's chi-square over a (blocks, k) matrix plus pairwise significance.

    ``significant[i, j]`` is true when the average ranks of treatments i and
    j differ by at least the critical difference.
    """
    m = np.asarray(matrix, dtype=float)
    if m.ndim != 2:
        raise DegenerateInput(f"expected a 2-D matrix, got shape {m.shape}")
    n_blocks, k = m.shape
    if k < 2 or n_blocks < 2:
        raise DegenerateInput(f"need k >= 2 treatments and N >= 2 blocks, got k={k}, N={n_blocks}")
    if not np.isfinite(m).all():
        raise DegenerateInput("matrix contains non-finite values")
    if not 0 < alpha < 1:
        raise DegenerateInput(f"alpha must be in (0, 1), got {alpha}")
    avg = rankdata(m, axis=1).mean(axis=0)
    stat = max(friedman_statistic(avg, n_blocks), 0.0)
    cd = critical_difference(k, n_blocks, alpha)
    gap = np.abs(avg[:, None] - avg[None, :])
    return FriedmanResult(
        chi2=float(stat),
        p_value=float(chi2.sf(stat, k - 1)),
        average_ranks=avg,
        critical_difference=float(cd),
        significant=gap >= cd,
        alpha=alpha,
        n_blocks=n_blocks,
    )


def write_friedman(result: FriedmanResult, labels, directory) -> dict:
    """Write average ranks and the pairwise Y/N matrix as CSV; return a summary dict."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    with open(directory / "average_ranks.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(("combo", "average_rank"))
        for label, r in zip(labels, result.average_ranks):
            w.writerow((label, repr(float(r))))
    with open(directory / "pairwise.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(("", *labels))
        for label, row in zip(labels, result.significant):
            w.writerow((label, *("Y" if s else "N" for s in row)))
    n_sig = int(np.triu(result.significant, 1).sum())
    return {
        "chi2_F": result.chi2,
        "p_value": result.p_value,
        "critical_difference": result.critical_difference,
        "k": result.k,
        "blocks": result.n_blocks,
        "alpha": result.alpha,
        "significant_pairs": n_sig,
        "pairs": result.k * (result.k - 1) // 2,
    }
