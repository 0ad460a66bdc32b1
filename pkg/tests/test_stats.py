import itertools
import math
import warnings

import numpy as np
import pytest
from scipy.stats import norm

from eade.harness.stats import (
    FewPairsWarning,
    Outcome,
    average_rank,
    signed_rank,
    wilcoxon_signed_rank,
)


def midranks(values):
    """Average ranks of ``values`` (1-based), computed by pairwise counting."""
    out = []
    for v in values:
        below = sum(1 for w in values if w < v)
        equal = sum(1 for w in values if w == v)
        out.append(below + (equal + 1) / 2)
    return out


def enumerated_outcome(a, b, alpha=0.05):
    """Exact test by listing all 2^n sign patterns of the nonzero differences."""
    d = [x - y for x, y in zip(a, b) if x != y]
    n = len(d)
    if n < 5:
        return Outcome.SIMILAR
    ranks = midranks([abs(x) for x in d])
    w_plus = sum(r for r, x in zip(ranks, d) if x > 0)
    w_minus = sum(r for r, x in zip(ranks, d) if x < 0)
    w = min(w_plus, w_minus)
    sums = [sum(r for r, s in zip(ranks, signs) if s) for signs in itertools.product((0, 1), repeat=n)]
    p = min(1.0, 2 * sum(1 for s in sums if s <= w + 1e-9) / len(sums))
    if p >= alpha:
        return Outcome.SIMILAR
    return Outcome.BETTER if w_plus < w_minus else Outcome.WORSE


def test_identical_samples_similar():
    a = np.arange(10.0)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", FewPairsWarning)
        assert wilcoxon_signed_rank(a, a) is Outcome.SIMILAR


def test_shifted_samples_better():
    b = np.random.default_rng(0).normal(size=30)
    assert wilcoxon_signed_rank(b - 100, b) is Outcome.BETTER
    assert wilcoxon_signed_rank(b + 100, b) is Outcome.WORSE


def test_six_pair_example_against_enumeration():
    d = [1, 2, 3, 4, 5, -1]
    a, b = np.array(d, dtype=float), np.zeros(6)
    res = signed_rank(a, b)
    # Tied |d| = 1 share rank 1.5.
    assert res.w_minus == 1.5
    assert res.p_value == pytest.approx(6 / 64)
    assert wilcoxon_signed_rank(a, b) is enumerated_outcome(a, b) is Outcome.SIMILAR


def test_few_pairs_warns():
    with pytest.warns(FewPairsWarning):
        assert wilcoxon_signed_rank([1, 2, 3, 4, 5], [1, 2, 3, 0, 0]) is Outcome.SIMILAR


def test_unpaired_rejected():
    with pytest.raises(ValueError):
        wilcoxon_signed_rank([1, 2], [1])


@pytest.mark.parametrize("seed", range(8))
def test_agrees_with_enumeration_random(seed):
    rng = np.random.default_rng(seed)
    for _ in range(40):
        n = int(rng.integers(5, 11))
        a = rng.normal(size=n)
        b = a - rng.normal(rng.uniform(-1.5, 1.5), 1.0, size=n)
        if rng.random() < 0.3:
            # Rounding induces ties and zero differences.
            a, b = np.round(a, 1), np.round(b, 1)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", FewPairsWarning)
            assert wilcoxon_signed_rank(a, b) is enumerated_outcome(a, b)


def test_boundary_cases_where_normal_approximation_fails():
    # n = 10, W = 8: exact p = 0.0488 (significant), normal approx p = 0.053.
    d = np.array([1, 2, 3, -4, 5, 6, 7, 8, 9, 10], dtype=float)
    d[[0, 2]] *= -1  # negatives at ranks 1, 3, 4 -> W- = 8
    res = signed_rank(d, np.zeros(10))
    assert res.w_minus == 8 and res.p_value == pytest.approx(50 / 1024)
    assert wilcoxon_signed_rank(d, np.zeros(10)) is enumerated_outcome(d, np.zeros(10)) is Outcome.WORSE


def test_normal_branch_close_to_exact_for_large_n():
    rng = np.random.default_rng(1)
    a = rng.normal(0.3, 1, 51)
    res = signed_rank(a, np.zeros(51))
    assert res.method == "normal"
    n = 51
    z = (n * (n + 1) / 4 - min(res.w_plus, res.w_minus) - 0.5) / math.sqrt(n * (n + 1) * (2 * n + 1) / 24)
    assert res.p_value == pytest.approx(2 * norm.sf(z), rel=1e-9)


class TestAverageRank:
    def test_dominant(self):
        r = average_rank({"A": {"f1": 1.0, "f2": 0.0}, "B": {"f1": 2.0, "f2": 1.0}})
        assert r == {"A": 1.0, "B": 2.0}

    def test_ties_share(self):
        r = average_rank({"A": {"f1": 1.0}, "B": {"f1": 1.0}})
        assert r == {"A": 1.5, "B": 1.5}

    def test_three_algos(self):
        # ranks over (f1, f2): A (1, 2), B (3, 1), C (2, 3)
        r = average_rank({"A": {"f1": 1, "f2": 5}, "B": {"f1": 9, "f2": 1}, "C": {"f1": 4, "f2": 9}})
        assert r == {"A": 1.5, "B": 2.0, "C": 2.5}

    def test_missing_cell(self):
        with pytest.raises(ValueError):
            average_rank({"A": {"f1": 1.0, "f2": 1.0}, "B": {"f1": 2.0}})
