"""Paired significance testing and rank summaries for comparing algorithms."""

from __future__ import annotations

import enum
import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.stats import norm, rankdata

MIN_PAIRS = 5
# Up to this many nonzero pairs the exact null distribution is used.
EXACT_MAX_N = 25


class Outcome(str, enum.Enum):
    BETTER = "+"
    SIMILAR = "="
    WORSE = "-"


class FewPairsWarning(RuntimeWarning):
    pass


@dataclass
class SignedRankResult:
    n: int
    w_plus: float
    w_minus: float
    p_value: float
    method: str


def _exact_tail(ranks, w):
    """P(W+ <= w) when every rank's sign is a fair coin.

    Ranks may be half-integers (averaged ties), so counts run on doubled ranks.
    """
    doubled = np.rint(2 * np.asarray(ranks)).astype(int)
    total = int(doubled.sum())
    counts = np.zeros(total + 1)
    counts[0] = 1.0
    for r in doubled:
        shifted = np.zeros_like(counts)
        shifted[r:] = counts[: total + 1 - r]
        counts = counts + shifted
    limit = int(math.floor(2 * w + 1e-9))
    return counts[: limit + 1].sum() / counts.sum()


def signed_rank(a, b):
    """Two-sided Wilcoxon signed-rank test on the pairs ``a - b``.

    Zero differences are dropped and tied magnitudes share their mean rank.
    The p-value is exact up to EXACT_MAX_N pairs and otherwise comes from
    the normal approximation with tie and continuity corrections.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != b.shape or a.ndim != 1:
        raise ValueError("samples must be 1-D and of equal length")
    d = a - b
    d = d[d != 0]
    n = d.size
    if n == 0:
        return SignedRankResult(0, 0.0, 0.0, 1.0, "empty")
    ranks = rankdata(np.abs(d))
    w_plus = float(ranks[d > 0].sum())
    w_minus = float(ranks[d < 0].sum())
    w = min(w_plus, w_minus)
    if n <= EXACT_MAX_N:
        p = min(1.0, 2.0 * _exact_tail(ranks, w))
        return SignedRankResult(n, w_plus, w_minus, p, "exact")
    mean = n * (n + 1) / 4.0
    _, tie_counts = np.unique(ranks, return_counts=True)
    var = n * (n + 1) * (2 * n + 1) / 24.0 - np.sum(tie_counts**3 - tie_counts) / 48.0
    z = (mean - w - 0.5) / math.sqrt(var)
    p = min(1.0, 2.0 * norm.sf(max(z, 0.0)))
    return SignedRankResult(n, w_plus, w_minus, p, "normal")


def wilcoxon_signed_rank(a, b, alpha=0.05):
    """Compare paired minimization results: BETTER means ``a`` is significantly smaller."""
    if len(a) != len(b):
        raise ValueError("samples must be paired")
    res = signed_rank(a, b)
    if res.n < MIN_PAIRS:
        warnings.warn(f"only {res.n} nonzero paired differences; reporting SIMILAR", FewPairsWarning, stacklevel=2)
        return Outcome.SIMILAR
    if res.p_value >= alpha:
        return Outcome.SIMILAR
    return Outcome.BETTER if res.w_plus < res.w_minus else Outcome.WORSE


def average_rank(results):
    """Mean rank per algorithm over functions.

    ``results`` maps algo -> {function -> mean value}; lower values rank
    better and ties share the averaged rank.
    """
    algos = list(results)
    functions = sorted({fn for per in results.values() for fn in per})
    table = np.empty((len(algos), len(functions)))
    for i, algo in enumerate(algos):
        for j, fn in enumerate(functions):
            try:
                table[i, j] = results[algo][fn]
            except KeyError:
                raise ValueError(f"missing result for algo {algo!r} on function {fn!r}") from None
    ranks = rankdata(table, axis=0)
    return {algo: float(ranks[i].mean()) for i, algo in enumerate(algos)}
