"""Explicitly adaptive differential evolution (EaDE) and its benchmark harness."""

from eade.bench import ObjectiveSpec, evaluate, make_spec, report_clamp
from eade.engines import S1, S2, S3, Strategy
from eade.harness.trial import RunConfig, RunResult, run_trial

__all__ = [
    "ObjectiveSpec",
    "RunConfig",
    "RunResult",
    "S1",
    "S2",
    "S3",
    "Strategy",
    "evaluate",
    "make_spec",
    "report_clamp",
    "run_trial",
]
__version__ = "0.1.0"
