"""Single-trial runner and its result document."""

from __future__ import annotations

import json
import time
from dataclasses import asdict, dataclass, field

import numpy as np

from eade import bench, core, engines
from eade.engines import Engine
from eade.scheduler import KINDS, SchedulerState, plan_next_generation


@dataclass
class RunConfig:
    """One trial's settings; ``None`` budget/size fields take the protocol defaults."""

    spec: bench.ObjectiveSpec
    algo: str = "eade"
    max_fes: int | None = None
    np_init: int | None = None
    np_min: int = core.NP_MIN
    LEN: int = 30
    K: int = 2
    Q: int = 10
    seed: int = 0
    history_stride: int = 10

    def __post_init__(self):
        d = self.spec.dimension
        if self.max_fes is None:
            self.max_fes = 10000 * d
        if self.np_init is None:
            self.np_init = 18 * d
        self.algo = str(self.algo).lower()

    def validate(self):
        if self.algo not in KINDS:
            raise ValueError(f"unknown algo {self.algo!r}; expected one of {KINDS}")
        if self.np_min < core.NP_MIN:
            raise ValueError(f"np_min must be at least {core.NP_MIN}")
        if self.np_init < self.np_min:
            raise ValueError("np_init must be at least np_min")
        if self.max_fes < self.np_init:
            raise ValueError("max_fes must cover the initial population")
        for name in ("LEN", "K", "Q", "history_stride"):
            if int(getattr(self, name)) < 1:
                raise ValueError(f"{name} must be a positive integer")
        if int(self.seed) < 0:
            raise ValueError("seed must be non-negative")

    def echo(self):
        s = self.spec
        out = {
            "function": s.id,
            "dim": s.dimension,
            "algo": self.algo,
            "max_fes": self.max_fes,
            "np_init": self.np_init,
            "np_min": self.np_min,
            "LEN": self.LEN,
            "K": self.K,
            "Q": self.Q,
            "seed": self.seed,
            "history_stride": self.history_stride,
            "shifted": s.shift is not None,
            "rotated": s.rotation is not None,
        }
        return out


@dataclass
class RunResult:
    config: dict
    best_f: float
    best_error: float
    history: list
    usage_trace: list
    phase_runs: list
    trigger_fraction: float
    trigger_fes: int | None
    fes_used: int
    generations: int
    wall_time: float = field(default=0.0, compare=False)

    def document(self):
        """The serializable result; wall time is left out so reruns compare equal."""
        doc = asdict(self)
        doc.pop("wall_time")
        return doc

    def to_json(self, **kw):
        return json.dumps(self.document(), **kw)

    @classmethod
    def from_document(cls, doc):
        doc = dict(doc)
        doc["history"] = [tuple(h) for h in doc["history"]]
        doc["usage_trace"] = [tuple(t) for t in doc["usage_trace"]]
        doc["phase_runs"] = [tuple(p) for p in doc["phase_runs"]]
        return cls(**doc)


def run_trial(config, observer=None, after=None):
    """Run one configured trial to budget exhaustion.

    ``observer(pop, archive, memories, strategy)`` is called before each
    generation and ``after(pop, archive, step, evaluator)`` after it. Neither
    may draw from the trial's random streams.
    """
    config.validate()
    t0 = time.perf_counter()
    spec = config.spec
    streams = core.make_streams(config.seed)
    evaluator = core.Evaluator(spec, config.max_fes)
    pop = core.init_population(spec, config.np_init, streams["init"], evaluator)
    archive = core.Archive(spec.dimension, config.np_init)
    memories = {Engine.SHADE: core.ParamMemory(), Engine.CIP: core.ParamMemory()}
    state = SchedulerState(kind=config.algo, LEN=config.LEN, K=config.K, Q=config.Q)
    lpsr = (config.max_fes, config.np_init, config.np_min)

    best = float(np.min(pop.f))
    history = [(evaluator.fes, float(bench.error_value(spec, best)))]
    trigger_fes = None
    feedback = None
    while evaluator.remaining > 0:
        strategy = plan_next_generation(state, feedback, streams["scheduler"])
        if state.trigger and trigger_fes is None:
            trigger_fes = evaluator.fes
        if observer is not None:
            observer(pop, archive, memories, strategy)
        pop, step = engines.generation_step(
            pop, archive, memories[strategy.engine], strategy, evaluator, lpsr,
            streams["engine"], streams["archive"],
        )
        feedback = (step.ranks, step.delta_f)
        if after is not None:
            after(pop, archive, step, evaluator)
        best = min(best, float(np.min(pop.f)))
        if pop.generation % config.history_stride == 0 or evaluator.remaining <= 0:
            history.append((evaluator.fes, float(bench.error_value(spec, best))))

    best_error = float(bench.error_value(spec, best))
    return RunResult(
        config=config.echo(),
        best_f=float(bench.report_clamp(best_error)),
        best_error=best_error,
        history=history,
        usage_trace=[(g, label) for g, label, _ in state.trace],
        phase_runs=phase_runs(state.trace),
        trigger_fraction=1.0 if trigger_fes is None else trigger_fes / config.max_fes,
        trigger_fes=trigger_fes,
        fes_used=evaluator.fes,
        generations=pop.generation,
        wall_time=time.perf_counter() - t0,
    )


def phase_runs(trace):
    """Run-length encoding of the phase column of a scheduler trace."""
    runs = []
    for _, _, phase in trace:
        if runs and runs[-1][0] == phase:
            runs[-1] = (phase, runs[-1][1] + 1)
        else:
            runs.append((phase, 1))
    return runs
