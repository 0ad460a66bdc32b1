"""Benchmark objectives and the reporting clamp.

Four classic functions are provided (sphere, sum of different powers,
Schwefel, Rastrigin), each optionally wrapped by a shift vector and a
rotation matrix. Evaluation accepts a single decision vector or a 2-D
batch with one candidate per row.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

REPORT_THRESHOLD = 1e-8
SCHWEFEL_CONSTANT = 418.9829


def _sphere(z):
    return np.sum(z * z, axis=-1)


def _powers(z):
    exponents = np.arange(2, z.shape[-1] + 2)
    return np.sum(np.abs(z) ** exponents, axis=-1)


def _schwefel(z):
    d = z.shape[-1]
    return SCHWEFEL_CONSTANT * d - np.sum(z * np.sin(np.sqrt(np.abs(z))), axis=-1)


def _rastrigin(z):
    return np.sum(z * z - 10.0 * np.cos(2.0 * np.pi * z) + 10.0, axis=-1)


# id -> (base function, symmetric bound, known optimum value)
FUNCTIONS = {
    "sphere": (_sphere, 100.0, 0.0),
    "powers": (_powers, 1.0, 0.0),
    "schwefel": (_schwefel, 500.0, 0.0),
    "rastrigin": (_rastrigin, 5.0, 0.0),
}

# Known minimizers of the unshifted base functions, used by tests and docs.
OPTIMIZERS = {
    "sphere": 0.0,
    "powers": 0.0,
    "schwefel": 420.9687,
    "rastrigin": 0.0,
}


def _frozen(a):
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class ObjectiveSpec:
    """An objective: base function id, dimension, bounds and optional transform.

    ``optimum`` is the known minimum value used for error reporting; ``None``
    means raw fitness is reported.
    """

    id: str
    dimension: int
    lower: np.ndarray
    upper: np.ndarray
    shift: np.ndarray | None = None
    rotation: np.ndarray | None = None
    optimum: float | None = field(default=None)

    def __post_init__(self):
        if self.id not in FUNCTIONS:
            raise ValueError(f"unknown function id {self.id!r}; expected one of {sorted(FUNCTIONS)}")
        if int(self.dimension) < 1:
            raise ValueError("dimension must be a positive integer")
        d = int(self.dimension)
        object.__setattr__(self, "dimension", d)
        lower = _frozen(np.broadcast_to(self.lower, (d,)))
        upper = _frozen(np.broadcast_to(self.upper, (d,)))
        if not np.all(lower < upper):
            raise ValueError("lower bound must be strictly below upper bound in every dimension")
        object.__setattr__(self, "lower", lower)
        object.__setattr__(self, "upper", upper)
        if self.shift is not None:
            shift = _frozen(self.shift)
            if shift.shape != (d,):
                raise ValueError(f"shift must have shape ({d},), got {shift.shape}")
            object.__setattr__(self, "shift", shift)
        if self.rotation is not None:
            rot = _frozen(self.rotation)
            if rot.shape != (d, d):
                raise ValueError(f"rotation must have shape ({d}, {d}), got {rot.shape}")
            if not np.allclose(rot @ rot.T, np.eye(d), rtol=0.0, atol=1e-9):
                raise ValueError("rotation matrix is not orthogonal to within 1e-9")
            object.__setattr__(self, "rotation", rot)

    @property
    def bounds(self):
        return self.lower, self.upper


def make_spec(function_id, dimension, shift=None, rotation=None):
    """Build an ObjectiveSpec with the standard search range and optimum."""
    try:
        _, bound, optimum = FUNCTIONS[function_id]
    except KeyError:
        raise ValueError(f"unknown function id {function_id!r}; expected one of {sorted(FUNCTIONS)}") from None
    return ObjectiveSpec(
        id=function_id,
        dimension=dimension,
        lower=np.full(dimension, -bound),
        upper=np.full(dimension, bound),
        shift=shift,
        rotation=rotation,
        optimum=optimum,
    )


def evaluate(spec, x):
    """Fitness of ``x`` (shape (D,) -> float, shape (n, D) -> array of n)."""
    x = np.asarray(x, dtype=float)
    if x.ndim not in (1, 2) or x.shape[-1] != spec.dimension:
        raise ValueError(f"expected decision vector(s) of length {spec.dimension}, got shape {x.shape}")
    z = x
    if spec.shift is not None:
        z = z - spec.shift
    if spec.rotation is not None:
        z = z @ spec.rotation.T
    fn = FUNCTIONS[spec.id][0]
    out = fn(z)
    return float(out) if x.ndim == 1 else out


def error_value(spec, f):
    """Distance to the registered optimum, or ``f`` itself when none is known."""
    if spec.optimum is None:
        return f
    return f - spec.optimum


def report_clamp(f):
    """Values strictly below 1e-8 are reported as 0."""
    return 0.0 if f < REPORT_THRESHOLD else f


def load_transform(path):
    """Read shift/rotation data from a whitespace-separated text file.

    Layout: first line D, second line the shift vector, then D rotation rows.
    Returns ``(shift, rotation)``.
    """
    lines = [ln for ln in Path(path).read_text().splitlines() if ln.strip()]
    if not lines:
        raise ValueError(f"{path}: empty transform file")
    try:
        d = int(lines[0].split()[0])
    except ValueError:
        raise ValueError(f"{path}: first line must hold the dimension") from None
    if len(lines) < d + 2:
        raise ValueError(f"{path}: expected {d + 2} non-empty lines, found {len(lines)}")
    shift = np.array(lines[1].split(), dtype=float)
    rotation = np.array([ln.split() for ln in lines[2 : d + 2]], dtype=float)
    if shift.shape != (d,) or rotation.shape != (d, d):
        raise ValueError(f"{path}: shift/rotation shapes do not match D={d}")
    return shift, rotation


def save_transform(path, shift, rotation):
    shift = np.asarray(shift, dtype=float)
    rotation = np.asarray(rotation, dtype=float)
    rows = [str(len(shift)), " ".join(repr(float(v)) for v in shift)]
    rows += [" ".join(repr(float(v)) for v in row) for row in rotation]
    Path(path).write_text("\n".join(rows) + "\n")
