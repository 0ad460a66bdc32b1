"""Population machinery shared by every strategy.

Holds the population arrays, success-history parameter memories, the
external archive, linear population size reduction, bound repair and
greedy survivor selection. Random draws always come from an explicitly
passed ``numpy.random.Generator``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from eade.bench import evaluate

NP_MIN = 4
MEMORY_SIZE = 6
PBEST_RATE = 0.11
# Marks a CR memory slot that has collapsed to zero; CR is then always 0.
TERMINAL = -1.0

STREAM_NAMES = ("init", "engine", "scheduler", "archive", "probe")


def make_streams(seed):
    """Independent generators per purpose, all derived from one master seed.

    Adding a consumer to one stream never shifts the draws of another.
    """
    root = np.random.SeedSequence(int(seed))
    children = root.spawn(len(STREAM_NAMES))
    return {name: np.random.default_rng(ss) for name, ss in zip(STREAM_NAMES, children)}


def round_half_up(v):
    return int(math.floor(v + 0.5))


class BudgetExceeded(RuntimeError):
    pass


class Evaluator:
    """Counts function evaluations against a hard budget."""

    def __init__(self, spec, max_fes=None):
        self.spec = spec
        self.max_fes = max_fes
        self.fes = 0

    @property
    def remaining(self):
        if self.max_fes is None:
            return math.inf
        return self.max_fes - self.fes

    def __call__(self, X):
        X = np.atleast_2d(X)
        n = X.shape[0]
        if self.max_fes is not None and self.fes + n > self.max_fes:
            raise BudgetExceeded(f"{n} evaluations requested with {self.remaining} remaining")
        self.fes += n
        return evaluate(self.spec, X)


@dataclass
class Individual:
    x: np.ndarray
    f: float


@dataclass
class Population:
    """Members stored row-wise: ``X[i]`` is a decision vector, ``f[i]`` its fitness."""

    X: np.ndarray
    f: np.ndarray
    generation: int = 0

    @property
    def size(self):
        return len(self.f)

    def __len__(self):
        return len(self.f)

    def __getitem__(self, i):
        return Individual(self.X[i].copy(), float(self.f[i]))

    def best(self):
        i = int(np.argmin(self.f))
        return self[i]


@dataclass
class ParamMemory:
    """Circular success-history memory for the scale factor F and crossover rate CR."""

    m_f: np.ndarray = field(default_factory=lambda: np.full(MEMORY_SIZE, 0.5))
    m_cr: np.ndarray = field(default_factory=lambda: np.full(MEMORY_SIZE, 0.5))
    write_index: int = 0

    @property
    def size(self):
        return len(self.m_f)

    def copy(self):
        return ParamMemory(self.m_f.copy(), self.m_cr.copy(), self.write_index)


class Archive:
    """Replaced parents kept as extra difference-vector donors.

    Capacity follows the current population size; overflow is evicted at
    random.
    """

    def __init__(self, dim, capacity):
        self.X = np.empty((0, dim))
        self.capacity = int(capacity)

    def __len__(self):
        return self.X.shape[0]

    def add(self, rows, rng):
        rows = np.atleast_2d(rows)
        if rows.shape[0] == 0:
            return
        self.X = np.vstack([self.X, rows])
        self._evict(rng)

    def resize(self, capacity, rng):
        self.capacity = int(capacity)
        self._evict(rng)

    def _evict(self, rng):
        excess = len(self) - self.capacity
        if excess > 0:
            keep = np.sort(rng.choice(len(self), size=self.capacity, replace=False))
            self.X = self.X[keep]


def init_population(spec, np_init, rng, evaluator=None):
    """Uniform sample of ``np_init`` points within bounds, each evaluated once."""
    if np_init < NP_MIN:
        raise ValueError(f"np_init must be at least {NP_MIN}")
    X = rng.uniform(spec.lower, spec.upper, size=(np_init, spec.dimension))
    f = evaluator(X) if evaluator is not None else evaluate(spec, X)
    return Population(X, np.asarray(f, dtype=float))


def rank_order(f):
    """Member indices from best to worst; equal fitness keeps index order."""
    return np.argsort(np.asarray(f), kind="stable")


def rank_population(pop):
    """Rank of each member, 1 = best; ties broken by member index."""
    f = pop.f if isinstance(pop, Population) else np.asarray(pop)
    order = rank_order(f)
    ranks = np.empty(len(f), dtype=int)
    ranks[order] = np.arange(1, len(f) + 1)
    return ranks


def lpsr_target_size(fes, max_fes, np_init, np_min=NP_MIN):
    """Population size prescribed by linear reduction after ``fes`` evaluations."""
    if not 0 <= fes <= max_fes:
        raise ValueError("fes must lie in [0, max_fes]")
    if np_min > np_init:
        raise ValueError("np_min must not exceed np_init")
    return round_half_up(np_init + (np_min - np_init) * fes / max_fes)


def shrink_to(pop, archive, target, rng):
    """Drop the worst members down to ``target`` and shrink the archive to match."""
    if target < NP_MIN:
        raise ValueError(f"target population size must be at least {NP_MIN}")
    if target > pop.size:
        raise ValueError("cannot grow the population by shrinking")
    if target < pop.size:
        keep = np.sort(rank_order(pop.f)[:target])
        pop = Population(pop.X[keep], pop.f[keep], pop.generation)
    if archive is not None:
        archive.resize(target, rng)
    return pop


def sample_parameters_batch(mem, n, rng):
    """Draw ``n`` (F, CR) pairs from the memory."""
    slots = rng.integers(0, mem.size, size=n)
    mu_f = mem.m_f[slots]
    F = mu_f + 0.1 * rng.standard_cauchy(n)
    bad = F <= 0
    while np.any(bad):
        F[bad] = mu_f[bad] + 0.1 * rng.standard_cauchy(int(bad.sum()))
        bad = F <= 0
    F = np.minimum(F, 1.0)
    mu_cr = mem.m_cr[slots]
    terminal = mu_cr == TERMINAL
    CR = np.clip(rng.normal(np.where(terminal, 0.0, mu_cr), 0.1), 0.0, 1.0)
    CR[terminal] = 0.0
    return F, CR


def sample_parameters(mem, rng):
    F, CR = sample_parameters_batch(mem, 1, rng)
    return float(F[0]), float(CR[0])


def _lehmer(values, weights):
    den = np.sum(weights * values)
    return np.sum(weights * values**2) / den


def update_memory(mem, successes):
    """Write weighted Lehmer means of successful parameters into the next slot.

    ``successes`` is a sequence of (F, CR, delta_f) with delta_f > 0, or a
    tuple of three equal-length arrays. The memory is updated in place and
    returned.
    """
    if isinstance(successes, tuple) and len(successes) == 3 and np.ndim(successes[0]) == 1:
        F, CR, df = (np.asarray(a, dtype=float) for a in successes)
    else:
        arr = np.asarray(list(successes), dtype=float).reshape(-1, 3)
        F, CR, df = arr[:, 0], arr[:, 1], arr[:, 2]
    if len(df) == 0:
        return mem
    w = df / np.sum(df)
    k = mem.write_index
    mem.m_f[k] = _lehmer(F, w)
    if mem.m_cr[k] == TERMINAL or np.max(CR) == 0:
        mem.m_cr[k] = TERMINAL
    else:
        mem.m_cr[k] = _lehmer(CR, w)
    mem.write_index = (k + 1) % mem.size
    return mem


def repair_bounds(v, x_parent, lower, upper):
    """Move out-of-bounds coordinates halfway between the violated bound and the parent."""
    v = np.array(v, dtype=float)
    x_parent = np.asarray(x_parent, dtype=float)
    lower = np.broadcast_to(lower, v.shape)
    upper = np.broadcast_to(upper, v.shape)
    lo = v < lower
    hi = v > upper
    v[lo] = (lower[lo] + x_parent[lo]) / 2.0
    v[hi] = (upper[hi] + x_parent[hi]) / 2.0
    return v


def greedy_select(x, u, archive=None, rng=None):
    """Keep the trial only if strictly better; returns (survivor, delta_f)."""
    if u.f < x.f:
        if archive is not None:
            archive.add(x.x, rng)
        return u, x.f - u.f
    return x, 0.0


def select_survivors(pop, U, fu, archive, rng):
    """Greedy selection for a batch of trials against members ``0..len(U)-1``.

    Mutates ``pop`` in place and returns per-member improvements (zero for
    members without a trial).
    """
    m = len(fu)
    delta = np.zeros(pop.size)
    better = fu < pop.f[:m]
    idx = np.flatnonzero(better)
    if archive is not None and idx.size:
        archive.add(pop.X[idx], rng)
    delta[idx] = pop.f[idx] - fu[idx]
    pop.X[idx] = U[idx]
    pop.f[idx] = fu[idx]
    return delta
