import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from eade import bench
from eade.bench import evaluate, make_spec, report_clamp


def schwefel_by_hand(x):
    return 418.9829 * len(x) - sum(v * math.sin(math.sqrt(abs(v))) for v in x)


def test_sphere_origin():
    assert evaluate(make_spec("sphere", 30), np.zeros(30)) == 0.0


def test_rastrigin_origin():
    assert evaluate(make_spec("rastrigin", 30), np.zeros(30)) == 0.0


def test_powers_hand_value():
    assert evaluate(make_spec("powers", 2), [0.5, 0.5]) == pytest.approx(0.375, abs=1e-15)


def test_powers_uses_absolute_value():
    spec = make_spec("powers", 2)
    assert evaluate(spec, [-0.5, -0.5]) == evaluate(spec, [0.5, 0.5])


def test_schwefel_residual_matches_table_value():
    x = np.full(30, 420.9687)
    v = evaluate(make_spec("schwefel", 30), x)
    assert v == pytest.approx(schwefel_by_hand(x), abs=1e-10)
    # Reported as 3.82E-04 (three significant digits).
    assert abs(v - 3.82e-4) < 5e-7


@pytest.mark.parametrize("fn", sorted(bench.FUNCTIONS))
def test_documented_optimizer_is_near_minimum(fn):
    d = 10
    spec = make_spec(fn, d)
    v = evaluate(spec, np.full(d, bench.OPTIMIZERS[fn]))
    assert v <= 1e-3
    if fn != "schwefel":
        assert v == 0.0


def test_search_ranges():
    assert make_spec("sphere", 3).upper[0] == 100
    assert make_spec("powers", 3).lower[0] == -1
    assert make_spec("schwefel", 3).upper[0] == 500
    assert make_spec("rastrigin", 3).lower[0] == -5


def test_dimension_mismatch_rejected():
    with pytest.raises(ValueError):
        evaluate(make_spec("sphere", 3), np.zeros(4))


def test_batch_matches_rows():
    spec = make_spec("rastrigin", 5)
    X = np.random.default_rng(0).uniform(-5, 5, (7, 5))
    assert np.array_equal(evaluate(spec, X), [evaluate(spec, x) for x in X])


@pytest.mark.parametrize(
    "f, expected",
    [(1e-9, 0.0), (1e-8, 1e-8), (3.5, 3.5), (0.0, 0.0)],
)
def test_report_clamp(f, expected):
    assert report_clamp(f) == expected


def test_rejects_non_orthogonal_rotation():
    with pytest.raises(ValueError):
        make_spec("sphere", 2, rotation=np.array([[1.0, 0.1], [0.0, 1.0]]))


def test_rejects_bad_bounds():
    with pytest.raises(ValueError):
        bench.ObjectiveSpec("sphere", 2, np.array([1.0, 0.0]), np.array([1.0, 1.0]))


def test_spec_is_immutable():
    spec = make_spec("sphere", 2)
    with pytest.raises(ValueError):
        spec.lower[0] = 3.0


@settings(max_examples=50, deadline=None)
@given(
    st.sampled_from(sorted(bench.FUNCTIONS)),
    arrays(np.float64, 6, elements=st.floats(-1, 1)),
)
def test_identity_transform_is_bitwise_neutral(fn, x):
    plain = make_spec(fn, 6)
    wrapped = make_spec(fn, 6, shift=np.zeros(6), rotation=np.eye(6))
    assert evaluate(plain, x) == evaluate(wrapped, x)
    assert evaluate(plain, x) == evaluate(plain, x.copy())


def test_shift_moves_optimum():
    shift = np.array([1.0, -2.0, 3.0])
    spec = make_spec("sphere", 3, shift=shift)
    assert evaluate(spec, shift) == 0.0
    assert evaluate(spec, np.zeros(3)) == pytest.approx(14.0)


def test_rotation_applied_to_shifted_point():
    theta = 0.3
    R = np.array([[math.cos(theta), -math.sin(theta)], [math.sin(theta), math.cos(theta)]])
    spec = make_spec("powers", 2, shift=np.array([0.1, 0.2]), rotation=R)
    x = np.array([0.4, -0.3])
    z = R @ (x - np.array([0.1, 0.2]))
    assert evaluate(spec, x) == pytest.approx(abs(z[0]) ** 2 + abs(z[1]) ** 3, rel=1e-12)


def test_transform_file_round_trip(tmp_path):
    rng = np.random.default_rng(3)
    q, _ = np.linalg.qr(rng.normal(size=(4, 4)))
    shift = rng.uniform(-1, 1, 4)
    path = tmp_path / "t.txt"
    bench.save_transform(path, shift, q)
    s2, r2 = bench.load_transform(path)
    assert np.array_equal(s2, shift) and np.array_equal(r2, q)
    spec = make_spec("rastrigin", 4, shift=s2, rotation=r2)
    assert evaluate(spec, shift) == 0.0


def test_transform_file_shape_errors(tmp_path):
    path = tmp_path / "bad.txt"
    path.write_text("3\n1 2\n1 0 0\n0 1 0\n0 0 1\n")
    with pytest.raises(ValueError):
        bench.load_transform(path)
