import json

import numpy as np
import pytest

from eade import core
from eade.bench import make_spec
from eade.harness.trial import RunConfig, RunResult, run_trial
from eade.scheduler import split_improvements


def small(fn="rastrigin", dim=5, algo="eade", **kw):
    kw.setdefault("max_fes", 6000)
    return RunConfig(make_spec(fn, dim), algo=algo, **kw)


def test_protocol_defaults():
    cfg = RunConfig(make_spec("sphere", 30))
    assert cfg.max_fes == 300000 and cfg.np_init == 540 and cfg.np_min == 4
    assert (cfg.LEN, cfg.K, cfg.Q) == (30, 2, 10)


@pytest.mark.parametrize(
    "kw",
    [{"algo": "bogus"}, {"np_init": 3, "np_min": 3}, {"max_fes": 10}, {"LEN": 0}, {"K": 0}, {"Q": 0}, {"seed": -1}],
)
def test_invalid_config_rejected_before_evaluation(kw, monkeypatch):
    calls = []
    monkeypatch.setattr(core, "evaluate", lambda *a: calls.append(a))
    with pytest.raises(ValueError):
        run_trial(small(**kw))
    assert not calls


def test_determinism():
    a = run_trial(small(seed=3))
    b = run_trial(small(seed=3))
    assert a.to_json() == b.to_json()
    assert run_trial(small(seed=4)).to_json() != a.to_json()


def test_fixed_strategy_trace():
    r = run_trial(small(algo="s1"))
    assert {label for _, label in r.usage_trace} == {"S1"}
    assert r.trigger_fraction == 1.0 and r.trigger_fes is None


def test_usage_trace_numbering():
    r = run_trial(small())
    assert [g for g, _ in r.usage_trace] == list(range(1, r.generations + 1))


@pytest.mark.parametrize("algo", ["eade", "oppo", "random", "tae", "s1", "s2", "s3"])
def test_accounting_invariants(algo):
    cfg = small(algo=algo, max_fes=5000, Q=2, LEN=3, K=2)
    seen = {"gens": 0}

    def after(pop, archive, step, ev):
        seen["gens"] += 1
        assert ev.fes <= cfg.max_fes
        assert pop.size == core.lpsr_target_size(ev.fes, cfg.max_fes, cfg.np_init, cfg.np_min)
        assert len(archive) <= pop.size
        sup, inf = split_improvements(step.ranks, step.delta_f)
        assert sup + inf == pytest.approx(step.delta_f.sum(), rel=1e-12, abs=1e-300)
        assert np.array_equal(pop.f, core.evaluate(cfg.spec, pop.X))

    r = run_trial(cfg, after=after)
    assert r.fes_used == cfg.max_fes
    assert seen["gens"] == r.generations
    if algo in ("eade", "oppo", "random", "tae"):
        assert any(phase == "adaptive" for phase, _ in r.phase_runs)
    for k, (phase, n) in enumerate(r.phase_runs):
        if k == len(r.phase_runs) - 1:
            continue
        if phase == "scss":
            assert n == cfg.LEN
        elif phase == "adaptive":
            assert n == cfg.K * cfg.LEN


def test_budget_never_exceeded_on_odd_budget():
    r = run_trial(small(max_fes=1237, np_init=40))
    assert r.fes_used == 1237


def test_history_monotone_and_final():
    r = run_trial(small(history_stride=3))
    best = [h[1] for h in r.history]
    assert all(a >= b for a, b in zip(best, best[1:]))
    assert r.history[-1][1] == r.best_error
    assert r.history[-1][0] == r.fes_used


def test_best_is_clamped_error():
    r = run_trial(RunConfig(make_spec("sphere", 2), max_fes=20000, seed=1))
    assert r.best_error < 1e-8 and r.best_f == 0.0


def test_trigger_fraction_in_range():
    r = run_trial(small(max_fes=20000, Q=2))
    assert 0 < r.trigger_fraction <= 1


def test_document_round_trip():
    r = run_trial(small())
    doc = json.loads(r.to_json())
    assert "wall_time" not in doc
    assert doc["config"]["algo"] == "eade"
    back = RunResult.from_document(doc)
    assert back.to_json() == r.to_json()


def test_observer_does_not_perturb_trajectory():
    calls = []
    a = run_trial(small(seed=8), observer=lambda *args: calls.append(1))
    b = run_trial(small(seed=8))
    assert calls and a.to_json() == b.to_json()


def test_shifted_rotated_run():
    rng = np.random.default_rng(0)
    q, _ = np.linalg.qr(rng.normal(size=(4, 4)))
    spec = make_spec("sphere", 4, shift=rng.uniform(-50, 50, 4), rotation=q)
    r = run_trial(RunConfig(spec, max_fes=20000, seed=2))
    assert r.best_f == 0.0 and r.config["rotated"]
