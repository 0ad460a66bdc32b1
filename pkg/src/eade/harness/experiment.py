"""Batch experiments: manifest expansion, concurrent execution and aggregation.

A manifest is a YAML (or JSON) mapping::

    trials: 3            # trials per cell; seeds are seed_base + trial index
    seed_base: 0
    baseline: eade       # label the vs_baseline column compares against
    functions: [sphere, rastrigin]
    dims: [10]
    algos: [eade, s1]
    max_fes: null        # default 10000 * D
    len: 30
    k: 2
    q: 10
    history_stride: 10
    cells:               # optional; replaces the functions x dims x algos grid
      - {function: sphere, dim: 10, algo: eade, len: 10, k: 1, label: LEN10_K1}

Cells may also name a ``shift_file`` holding shift/rotation data.
"""

from __future__ import annotations

import csv
import json
import logging
import warnings
from collections import defaultdict
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import yaml

from eade import bench
from eade.harness.stats import FewPairsWarning, Outcome, average_rank, wilcoxon_signed_rank
from eade.harness.trial import RunConfig, run_trial

log = logging.getLogger(__name__)

CSV_COLUMNS = ["function", "dim", "algo", "trials", "mean", "std", "median", "mean_rank", "vs_baseline"]
CELL_KEYS = {"function", "dim", "algo", "len", "k", "q", "label", "max_fes", "np_init", "shift_file", "history_stride"}


@dataclass(frozen=True)
class Cell:
    label: str
    function: str
    dim: int
    algo: str
    trial: int
    seed: int
    LEN: int = 30
    K: int = 2
    Q: int = 10
    max_fes: int | None = None
    np_init: int | None = None
    history_stride: int = 10
    shift_file: str | None = None

    @property
    def filename(self):
        return f"{self.label}__{self.function}__{self.dim}D__t{self.trial:03d}.json"

    def config(self):
        shift = rotation = None
        if self.shift_file:
            shift, rotation = bench.load_transform(self.shift_file)
        spec = bench.make_spec(self.function, self.dim, shift=shift, rotation=rotation)
        return RunConfig(
            spec, algo=self.algo, max_fes=self.max_fes, np_init=self.np_init,
            LEN=self.LEN, K=self.K, Q=self.Q, seed=self.seed, history_stride=self.history_stride,
        )


@dataclass
class Manifest:
    cells: list
    baseline: str | None = None
    source: dict = field(default_factory=dict)


def load_manifest(path):
    with open(path) as fh:
        data = yaml.safe_load(fh)
    return parse_manifest(data)


def parse_manifest(data):
    """Expand a manifest mapping into cells; raises ValueError on bad input."""
    if not isinstance(data, dict):
        raise ValueError("manifest must be a mapping")
    trials = int(data.get("trials", 1))
    seed_base = int(data.get("seed_base", 0))
    if trials < 1:
        raise ValueError("trials must be positive")
    defaults = {
        "len": data.get("len", 30),
        "k": data.get("k", 2),
        "q": data.get("q", 10),
        "max_fes": data.get("max_fes"),
        "np_init": data.get("np_init"),
        "history_stride": data.get("history_stride", 10),
        "shift_file": data.get("shift_file"),
    }
    if "cells" in data and data["cells"]:
        raw = data["cells"]
    else:
        raw = [
            {"function": fn, "dim": d, "algo": a}
            for fn in data.get("functions", [])
            for d in data.get("dims", [])
            for a in data.get("algos", [])
        ]
    if not raw:
        raise ValueError("manifest defines no cells")
    cells = []
    for entry in raw:
        unknown = set(entry) - CELL_KEYS
        if unknown:
            raise ValueError(f"unknown cell keys: {sorted(unknown)}")
        merged = {**defaults, **entry}
        algo = str(merged["algo"]).lower()
        for t in range(trials):
            cell = Cell(
                label=str(merged.get("label") or algo),
                function=merged["function"],
                dim=int(merged["dim"]),
                algo=algo,
                trial=t,
                seed=seed_base + t,
                LEN=int(merged["len"]),
                K=int(merged["k"]),
                Q=int(merged["q"]),
                max_fes=None if merged["max_fes"] is None else int(merged["max_fes"]),
                np_init=None if merged["np_init"] is None else int(merged["np_init"]),
                history_stride=int(merged["history_stride"]),
                shift_file=merged["shift_file"],
            )
            cell.config().validate()
            cells.append(cell)
    labels = list(dict.fromkeys(c.label for c in cells))
    baseline = data.get("baseline", labels[0])
    if baseline not in labels:
        raise ValueError(f"baseline {baseline!r} is not a cell label")
    return Manifest(cells, baseline, data)


def sweep_manifest(function, dim, len_list, k_list, trials=1, seed_base=0, max_fes=None, algo="eade"):
    """LEN x K grid for one function; labels look like ``LEN30_K2``."""
    cells = [
        {"function": function, "dim": dim, "algo": algo, "len": L, "k": K, "label": f"LEN{L}_K{K}"}
        for L in len_list
        for K in k_list
    ]
    data = {"trials": trials, "seed_base": seed_base, "max_fes": max_fes, "cells": cells}
    if 30 in len_list and 2 in k_list:
        data["baseline"] = "LEN30_K2"
    return data


def _execute(cell):
    result = run_trial(cell.config())
    doc = {"label": cell.label, "trial": cell.trial, **result.document()}
    return doc


@dataclass
class ExperimentOutcome:
    rows: list
    documents: list
    failed: list

    @property
    def exit_code(self):
        return 2 if self.failed else 0


def run_experiment(manifest, out_dir, jobs=1):
    """Run every cell, write per-trial JSON, ``summary.csv`` and ``status.json``."""
    out_dir = Path(out_dir)
    trial_dir = out_dir / "trials"
    trial_dir.mkdir(parents=True, exist_ok=True)
    docs, failed = [], []

    def handle(cell, doc=None, err=None):
        if err is not None:
            log.error("cell %s failed: %s", cell.filename, err)
            failed.append({"cell": cell.filename, "error": repr(err)})
            return
        (trial_dir / cell.filename).write_text(json.dumps(doc, indent=1) + "\n")
        docs.append(doc)

    if jobs <= 1:
        for cell in manifest.cells:
            try:
                handle(cell, _execute(cell))
            except Exception as err:  # keep going; failures go to status.json
                handle(cell, err=err)
    else:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            futures = [(cell, pool.submit(_execute, cell)) for cell in manifest.cells]
            for cell, fut in futures:
                try:
                    handle(cell, fut.result())
                except Exception as err:
                    handle(cell, err=err)

    rows = aggregate(docs, manifest.baseline)
    write_summary(rows, out_dir / "summary.csv")
    status = {
        "completed": sorted(c.filename for c in manifest.cells if c.filename not in {f["cell"] for f in failed}),
        "failed": failed,
    }
    (out_dir / "status.json").write_text(json.dumps(status, indent=1) + "\n")
    return ExperimentOutcome(rows, docs, failed)


def aggregate(docs, baseline=None):
    """Summary rows per (function, dim, label) from per-trial documents."""
    values = defaultdict(dict)
    for doc in docs:
        cfg = doc["config"]
        values[(cfg["function"], cfg["dim"], doc["label"])][doc["trial"]] = doc["best_f"]

    by_dim = defaultdict(lambda: defaultdict(dict))
    for (fn, dim, label), per_trial in values.items():
        by_dim[dim][label][fn] = float(np.mean(list(per_trial.values())))
    ranks = {}
    for dim, table in by_dim.items():
        try:
            for label, r in average_rank(table).items():
                ranks[(dim, label)] = r
        except ValueError:
            pass

    rows = []
    for (fn, dim, label) in sorted(values):
        per_trial = values[(fn, dim, label)]
        v = np.array([per_trial[t] for t in sorted(per_trial)])
        vs = ""
        base = values.get((fn, dim, baseline))
        if baseline is not None and base is not None:
            if label == baseline:
                vs = Outcome.SIMILAR.value
            else:
                common = sorted(set(per_trial) & set(base))
                with warnings.catch_warnings():
                    warnings.simplefilter("ignore", FewPairsWarning)
                    vs = wilcoxon_signed_rank(
                        [per_trial[t] for t in common], [base[t] for t in common]
                    ).value
        rows.append({
            "function": fn,
            "dim": dim,
            "algo": label,
            "trials": len(v),
            "mean": float(v.mean()),
            "std": float(v.std(ddof=1)) if len(v) > 1 else 0.0,
            "median": float(np.median(v)),
            "mean_rank": ranks.get((dim, label)),
            "vs_baseline": vs,
        })
    return rows


def _fmt(v):
    if v is None:
        return ""
    if isinstance(v, float):
        return f"{v:.5e}"
    return str(v)


def write_summary(rows, path):
    with open(path, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=CSV_COLUMNS)
        writer.writeheader()
        for row in rows:
            writer.writerow({k: _fmt(row[k]) for k in CSV_COLUMNS})
