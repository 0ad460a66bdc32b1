"""Trial-vector generation for the three strategies.

Every strategy is a selective-candidate scheme: each member produces two
independent candidates through its engine and keeps one of them by
distance to the parent, without evaluating either. Which one is kept is
governed by the member's fitness rank and the strategy's greedy degree.

Two engines exist. ``SHADE`` is current-to-pbest/1 mutation with binomial
crossover. ``CIP`` is a current-to-collective-best mutation with a mixed
binomial/exponential crossover.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from eade import core
from eade.core import NP_MIN, PBEST_RATE


class Engine(str, enum.Enum):
    SHADE = "shade"
    CIP = "cip"


@dataclass(frozen=True)
class Strategy:
    label: str
    engine: Engine
    gd: float

    def __str__(self):
        return self.label


S1 = Strategy("S1", Engine.SHADE, 0.5)  # balanced
S2 = Strategy("S2", Engine.SHADE, 0.1)  # explorative
S3 = Strategy("S3", Engine.CIP, 0.9)  # exploitative
STRATEGIES = {s.label: s for s in (S1, S2, S3)}


@dataclass
class CandidatePair:
    u1: np.ndarray
    u2: np.ndarray
    params1: tuple
    params2: tuple


@dataclass
class StepResult:
    """Outcome of one generation.

    ``ranks`` and ``delta_f`` refer to the parent population as it was at the
    start of the generation, before selection and size reduction.
    """

    ranks: np.ndarray
    delta_f: np.ndarray
    fes: int
    partial: bool


# -- mutation ---------------------------------------------------------------

def pbest_count(np_, p=PBEST_RATE):
    return max(2, core.round_half_up(p * np_))


def collective_size(np_):
    return max(2, math.ceil(PBEST_RATE * np_))


def draw_donor_indices(idx, np_, n_archive, rng):
    """r1 uniform over the population minus i; r2 over population+archive minus {i, r1}."""
    idx = np.asarray(idx)
    if np_ < NP_MIN:
        raise ValueError(f"population size {np_} below the minimum of {NP_MIN}")
    n = idx.size
    r1 = rng.integers(0, np_ - 1, size=n)
    r1 = r1 + (r1 >= idx)
    lo = np.minimum(idx, r1)
    hi = np.maximum(idx, r1)
    r2 = rng.integers(0, np_ + n_archive - 2, size=n)
    r2 = r2 + (r2 >= lo)
    r2 = r2 + (r2 >= hi)
    return r1, r2


def current_to_target(x, target, x_r1, x_r2, F):
    """x + F * (target - x) + F * (x_r1 - x_r2), broadcasting F over rows."""
    F = np.asarray(F, dtype=float)
    if F.ndim == 1:
        F = F[:, None]
    return x + F * (target - x) + F * (x_r1 - x_r2)


def collective_weights(t):
    if t < 2:
        raise ValueError("collective base needs at least two members")
    w = np.log(t + 1) - np.log(np.arange(1, t + 1))
    return w / w.sum()


def collective_base(pop, t):
    """Log-rank weighted mean of the ``t`` best members."""
    if t < 2:
        raise ValueError("collective base needs at least two members")
    if t > pop.size:
        raise ValueError("t exceeds the population size")
    top = core.rank_order(pop.f)[:t]
    return collective_weights(t) @ pop.X[top]


def _pool(pop, archive):
    if archive is None or len(archive) == 0:
        return pop.X, 0
    return np.vstack([pop.X, archive.X]), len(archive)


def _donors(idx, pop, archive, F, rng, engine, order=None, p=PBEST_RATE):
    np_ = pop.size
    if np_ < NP_MIN:
        raise ValueError(f"population size {np_} below the minimum of {NP_MIN}")
    if order is None:
        order = core.rank_order(pop.f)
    pool, n_arch = _pool(pop, archive)
    if engine is Engine.SHADE:
        pbest = order[rng.integers(0, pbest_count(np_, p), size=len(idx))]
        target = pop.X[pbest]
    else:
        t = collective_size(np_)
        target = collective_weights(t) @ pop.X[order[:t]]
    r1, r2 = draw_donor_indices(idx, np_, n_arch, rng)
    return current_to_target(pop.X[idx], target, pop.X[r1], pool[r2], F)


def donor_current_to_pbest(i, pop, archive, F, p, rng):
    return _donors(np.array([i]), pop, archive, np.array([F]), rng, Engine.SHADE, p=p)[0]


def donor_cip(i, pop, archive, F, rng):
    return _donors(np.array([i]), pop, archive, np.array([F]), rng, Engine.CIP)[0]


# -- crossover --------------------------------------------------------------

def _uniform_open_low(rng, shape):
    # Values in (0, 1] so that CR = 0 never crosses and CR = 1 always does.
    return 1.0 - rng.random(shape)


def _as_rows(x, v, CR):
    x = np.asarray(x, dtype=float)
    v = np.asarray(v, dtype=float)
    if x.shape != v.shape:
        raise ValueError("parent and donor must have the same shape")
    single = x.ndim == 1
    X = np.atleast_2d(x)
    V = np.atleast_2d(v)
    CR = np.broadcast_to(np.asarray(CR, dtype=float), (X.shape[0],))
    return single, X, V, CR


def _binomial_mask(n, d, CR, rng):
    mask = _uniform_open_low(rng, (n, d)) <= CR[:, None]
    jrand = rng.integers(0, d, size=n)
    mask[np.arange(n), jrand] = True
    return mask


def _exponential_mask(n, d, CR, rng):
    start = rng.integers(0, d, size=n)
    draws = _uniform_open_low(rng, (n, max(d - 1, 0))) <= CR[:, None]
    length = 1 + np.cumprod(draws, axis=1).sum(axis=1)
    offset = (np.arange(d)[None, :] - start[:, None]) % d
    return offset < length[:, None]


def crossover_binomial(x, v, CR, rng):
    single, X, V, CR = _as_rows(x, v, CR)
    mask = _binomial_mask(X.shape[0], X.shape[1], CR, rng)
    U = np.where(mask, V, X)
    return U[0] if single else U


def crossover_hybrid(x, v, CR, rng, branch=None):
    """Per row, binomial or exponential crossover with equal probability.

    ``branch`` forces "binomial" or "exponential" for every row.
    """
    single, X, V, CR = _as_rows(x, v, CR)
    n, d = X.shape
    if branch is None:
        use_bin = rng.random(n) < 0.5
    else:
        use_bin = np.full(n, branch == "binomial")
    mask = np.where(use_bin[:, None], _binomial_mask(n, d, CR, rng), _exponential_mask(n, d, CR, rng))
    U = np.where(mask, V, X)
    return U[0] if single else U


# -- candidates and similarity selection -------------------------------------

def make_trials(idx, strategy, pop, archive, mem, spec, rng, order=None):
    """One repaired trial per index in ``idx``; returns (U, F, CR)."""
    idx = np.asarray(idx)
    F, CR = core.sample_parameters_batch(mem, idx.size, rng)
    V = _donors(idx, pop, archive, F, rng, strategy.engine, order=order)
    if strategy.engine is Engine.SHADE:
        U = crossover_binomial(pop.X[idx], V, CR, rng)
    else:
        U = crossover_hybrid(pop.X[idx], V, CR, rng)
    U = core.repair_bounds(U, pop.X[idx], spec.lower, spec.upper)
    return U, F, CR


def scss_candidates(i, strategy, pop, archive, mem, spec, rng):
    idx = np.array([i])
    u1, f1, cr1 = make_trials(idx, strategy, pop, archive, mem, spec, rng)
    u2, f2, cr2 = make_trials(idx, strategy, pop, archive, mem, spec, rng)
    return CandidatePair(u1[0], u2[0], (float(f1[0]), float(cr1[0])), (float(f2[0]), float(cr2[0])))


def prefers_closest(rank, np_, gd, r):
    """Similarity rule: pick the closer candidate when r * 2 * GD > rank / NP."""
    return np.asarray(r) * 2.0 * gd > np.asarray(rank) / np_


def closed_form_p_closest(rank, np_, gd):
    """Probability that a uniform r makes ``prefers_closest`` true."""
    if gd <= 0:
        return 0.0
    return max(0.0, min(1.0, 1.0 - rank / (2.0 * gd * np_)))


def _pick_first(x, U1, U2, closest):
    d1 = np.linalg.norm(U1 - x, axis=-1)
    d2 = np.linalg.norm(U2 - x, axis=-1)
    # Exact distance ties go to the first candidate either way.
    first_is_closer = d1 <= d2
    first_is_farther = d1 >= d2
    return np.where(closest, first_is_closer, first_is_farther)


def similarity_select(x_i, rank_i, np_, gd, pair, r):
    """Return the candidate from ``pair`` chosen by the similarity rule."""
    closest = bool(prefers_closest(rank_i, np_, gd, r))
    first = bool(_pick_first(np.asarray(x_i), pair.u1, pair.u2, closest))
    return pair.u1 if first else pair.u2


def sample_offspring(strategy, pop, archive, mem, spec, rng, idx=None, ranks=None, order=None):
    """Chosen (unevaluated) trial for each member in ``idx``; returns (U, F, CR)."""
    if idx is None:
        idx = np.arange(pop.size)
    if order is None:
        order = core.rank_order(pop.f)
    if ranks is None:
        ranks = np.empty(pop.size, dtype=int)
        ranks[order] = np.arange(1, pop.size + 1)
    U1, F1, CR1 = make_trials(idx, strategy, pop, archive, mem, spec, rng, order)
    U2, F2, CR2 = make_trials(idx, strategy, pop, archive, mem, spec, rng, order)
    r = rng.random(idx.size)
    closest = prefers_closest(ranks[idx], pop.size, strategy.gd, r)
    first = _pick_first(pop.X[idx], U1, U2, closest)
    U = np.where(first[:, None], U1, U2)
    return U, np.where(first, F1, F2), np.where(first, CR1, CR2)


def generation_step(pop, archive, mem, strategy, evaluator, lpsr, rng, archive_rng=None):
    """Run one generation of ``strategy`` in place.

    ``lpsr`` is ``(max_fes, np_init, np_min)`` or ``None`` to keep the size
    fixed. Only as many members as the remaining budget allows are
    processed; the result is then flagged partial. Returns the new
    population and a StepResult.
    """
    archive_rng = rng if archive_rng is None else archive_rng
    np_ = pop.size
    order = core.rank_order(pop.f)
    ranks = np.empty(np_, dtype=int)
    ranks[order] = np.arange(1, np_ + 1)
    m = int(min(np_, evaluator.remaining))
    if m <= 0:
        return pop, StepResult(ranks, np.zeros(np_), 0, True)
    idx = np.arange(m)
    U, F, CR = sample_offspring(strategy, pop, archive, mem, evaluator.spec, rng, idx, ranks, order)
    fu = evaluator(U)
    delta = core.select_survivors(pop, U, fu, archive, archive_rng)
    won = delta[:m] > 0
    if np.any(won):
        core.update_memory(mem, (F[won], CR[won], delta[:m][won]))
    pop.generation += 1
    if lpsr is not None:
        max_fes, np_init, np_min = lpsr
        target = core.lpsr_target_size(min(evaluator.fes, max_fes), max_fes, np_init, np_min)
        if target < pop.size:
            pop = core.shrink_to(pop, archive, target, archive_rng)
    return pop, StepResult(ranks, delta, m, m < np_)
