"""Per-generation strategy scheduling.

Before the difficulty detector fires, the balanced strategy S1 runs and
the improvements of the better and worse halves of the population are
compared over windows of Q generations. When the better half improves
more over a window, the detector latches. From then on generations come
in intervals: LEN generations of S1 that measure the two halves, then
K * LEN generations of whichever strategy the decision rule picks.

Each ``kind`` differs only in that decision rule:

* ``eade``: better half ahead -> S3 (exploitative), worse half ahead -> S2.
* ``oppo``: the reverse mapping.
* ``random``: S2 or S3 uniformly.
* ``tae``: the measuring generations each use a random one of S1/S2/S3.
  The strategy with the largest total improvement is then deployed.
* ``s1``, ``s2``, ``s3``: that one strategy throughout, with no detection.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from eade.engines import S1, S2, S3, STRATEGIES

DETECT = "detect"
SCSS = "scss"
ADAPTIVE = "adaptive"
FIXED = "fixed"

ADAPTIVE_KINDS = ("eade", "oppo", "random", "tae")
FIXED_KINDS = ("s1", "s2", "s3")
KINDS = ADAPTIVE_KINDS + FIXED_KINDS


def split_improvements(ranks, delta_f, np_=None):
    """Improvements of the better half (rank <= NP // 2) and of the rest."""
    ranks = np.asarray(ranks)
    delta_f = np.asarray(delta_f, dtype=float)
    np_ = len(ranks) if np_ is None else np_
    superior = ranks <= np_ // 2
    return float(np.sum(delta_f[superior])), float(np.sum(delta_f[~superior]))


def _coin(rng, options):
    return options[int(rng.integers(0, len(options)))]


def ea_decide(imp_s, imp_i, rng):
    if imp_s > imp_i:
        return S3
    if imp_s < imp_i:
        return S2
    return _coin(rng, (S2, S3))


def variant_decide(kind, inputs, rng):
    """Decision rule of the ablation variants.

    ``oppo`` takes ``(imp_s, imp_i)``; ``random`` ignores its inputs; ``tae``
    takes credits either as a mapping keyed by strategy (or label) or as a
    tuple ordered ``(S3, S1, S2)``.
    """
    if kind == "oppo":
        imp_s, imp_i = inputs
        if imp_s > imp_i:
            return S2
        if imp_s < imp_i:
            return S3
        return _coin(rng, (S2, S3))
    if kind == "random":
        return _coin(rng, (S2, S3))
    if kind == "tae":
        if isinstance(inputs, dict):
            credits = {STRATEGIES[str(k)]: float(v) for k, v in inputs.items()}
        else:
            credits = dict(zip((S3, S1, S2), map(float, inputs)))
        best = max(credits.values())
        leaders = [s for s in (S3, S1, S2) if credits.get(s) == best]
        return leaders[0] if len(leaders) == 1 else _coin(rng, leaders)
    raise ValueError(f"unknown variant {kind!r}")


@dataclass
class SchedulerState:
    kind: str = "eade"
    LEN: int = 30
    K: int = 2
    Q: int = 10
    trigger: bool = False
    fi_s: float = 0.0
    fi_i: float = 0.0
    gens_in_window: int = 0
    phase: str = DETECT
    gen_in_phase: int = 0
    imp_s: float = 0.0
    imp_i: float = 0.0
    credits: dict = field(default_factory=dict)
    chosen: object = None
    current: object = None
    generation: int = 0
    trace: list = field(default_factory=list)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown scheduler kind {self.kind!r}; expected one of {KINDS}")
        for name in ("LEN", "K", "Q"):
            if int(getattr(self, name)) < 1:
                raise ValueError(f"{name} must be a positive integer")
        if self.kind in FIXED_KINDS:
            self.phase = FIXED


def dm_step(state, sup, inf):
    """Accumulate one generation into the detection window; returns the trigger flag.

    The window is compared every Q generations. A strictly larger improvement
    of the better half latches the trigger; otherwise the window restarts.
    """
    if state.trigger:
        return True
    state.fi_s += sup
    state.fi_i += inf
    state.gens_in_window += 1
    if state.gens_in_window == state.Q:
        if state.fi_s > state.fi_i:
            state.trigger = True
        state.fi_s = state.fi_i = 0.0
        state.gens_in_window = 0
    return state.trigger


def _decide(state, rng):
    if state.kind == "eade":
        return ea_decide(state.imp_s, state.imp_i, rng)
    if state.kind == "tae":
        return variant_decide("tae", state.credits, rng)
    return variant_decide(state.kind, (state.imp_s, state.imp_i), rng)


def _start_scss(state):
    state.phase = SCSS
    state.gen_in_phase = 0
    state.imp_s = state.imp_i = 0.0
    state.credits = {S3: 0.0, S1: 0.0, S2: 0.0}
    state.chosen = None


def _account(state, ranks, delta_f, rng):
    """Attribute the last generation's feedback to the phase it ran in."""
    if state.phase == FIXED:
        return
    np_ = len(ranks)
    sup, inf = split_improvements(ranks, delta_f, np_)
    if state.phase == DETECT:
        if dm_step(state, sup, inf):
            _start_scss(state)
        return
    state.gen_in_phase += 1
    if state.phase == SCSS:
        state.imp_s += sup
        state.imp_i += inf
        state.credits[state.current] = state.credits.get(state.current, 0.0) + sup + inf
        if state.gen_in_phase == state.LEN:
            state.chosen = _decide(state, rng)
            state.phase = ADAPTIVE
            state.gen_in_phase = 0
    elif state.gen_in_phase == state.K * state.LEN:
        _start_scss(state)


def plan_next_generation(state, feedback, rng):
    """Fold in the previous generation's ``(ranks, delta_f)`` and pick the next strategy.

    ``feedback`` is ``None`` for the first generation. The chosen strategy and
    the phase it belongs to are appended to ``state.trace``.
    """
    if feedback is not None and state.current is not None:
        _account(state, feedback[0], feedback[1], rng)
    if state.phase == FIXED:
        strategy = STRATEGIES[state.kind.upper()]
    elif state.phase in (DETECT,):
        strategy = S1
    elif state.phase == SCSS:
        strategy = _coin(rng, (S3, S1, S2)) if state.kind == "tae" else S1
    else:
        strategy = state.chosen
    state.current = strategy
    state.generation += 1
    state.trace.append((state.generation, strategy.label, state.phase))
    return strategy
