"""Offspring diversity probe comparing the greediness of the three strategies."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from eade import core, engines
from eade.engines import S1, S2, S3
from eade.harness.trial import RunConfig, run_trial

# Relative gap below which two diversities count as tied.
TIE_RTOL = 1e-12


def diversity(pop):
    """Mean Euclidean distance of the rows of ``pop`` to their centroid."""
    X = pop.X if isinstance(pop, core.Population) else np.atleast_2d(np.asarray(pop, dtype=float))
    if X.shape[0] <= 1:
        return 0.0
    return float(np.mean(np.linalg.norm(X - X.mean(axis=0), axis=1)))


def _ratio(smaller, larger):
    if larger == 0:
        return math.inf if smaller > 0 else math.nan
    return smaller / larger


@dataclass
class ProbeResult:
    function: str
    dim: int
    t_s1_lt_s2: int = 0
    t_s1_gt_s2: int = 0
    t_s3_lt_s1: int = 0
    t_s3_gt_s1: int = 0
    generations: int = 0

    @property
    def r1(self):
        return _ratio(self.t_s1_lt_s2, self.t_s1_gt_s2)

    @property
    def r2(self):
        return _ratio(self.t_s3_lt_s1, self.t_s3_gt_s1)

    def merge(self, other):
        return ProbeResult(
            self.function, self.dim,
            self.t_s1_lt_s2 + other.t_s1_lt_s2,
            self.t_s1_gt_s2 + other.t_s1_gt_s2,
            self.t_s3_lt_s1 + other.t_s3_lt_s1,
            self.t_s3_gt_s1 + other.t_s3_gt_s1,
            self.generations + other.generations,
        )

    def document(self):
        return {
            "function": self.function,
            "dim": self.dim,
            "T_S1<S2": self.t_s1_lt_s2,
            "T_S1>S2": self.t_s1_gt_s2,
            "T_S3<S1": self.t_s3_lt_s1,
            "T_S3>S1": self.t_s3_gt_s1,
            "R1": self.r1,
            "R2": self.r2,
            "generations": self.generations,
        }


def _compare(a, b):
    """-1 if a < b, 1 if a > b, 0 when tied to within TIE_RTOL."""
    if abs(a - b) <= TIE_RTOL * max(abs(a), abs(b)):
        return 0
    return -1 if a < b else 1


def probe_diversity(spec, budget=None, seed=0, strategies=(S1, S2, S3)):
    """Evolve a plain S1 run and, at every generation, sample one offspring
    population per strategy from the same parents.

    ``strategies`` is the (balanced, explorative, exploitative) triple being
    compared. Sampled offspring are never evaluated and do not touch the
    run's budget, memories or archive.
    """
    bal, expl, exploit = strategies
    config = RunConfig(spec, algo="s1", max_fes=budget, seed=seed)
    probe_rng = core.make_streams(seed)["probe"]
    result = ProbeResult(spec.id, spec.dimension)

    def observe(pop, archive, memories, _strategy):
        divs = {}
        for key, strat in (("bal", bal), ("expl", expl), ("exploit", exploit)):
            mem = memories[strat.engine].copy()
            U, _, _ = engines.sample_offspring(strat, pop, archive, mem, spec, probe_rng)
            divs[key] = diversity(U)
        c12 = _compare(divs["bal"], divs["expl"])
        c31 = _compare(divs["exploit"], divs["bal"])
        result.t_s1_lt_s2 += c12 < 0
        result.t_s1_gt_s2 += c12 > 0
        result.t_s3_lt_s1 += c31 < 0
        result.t_s3_gt_s1 += c31 > 0
        result.generations += 1

    run_trial(config, observer=observe)
    return result
