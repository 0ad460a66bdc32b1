"""Command line entry point: ``eade {run,experiment,probe-diversity,sweep}``."""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from eade import bench
from eade.harness import experiment
from eade.harness.probe import probe_diversity
from eade.harness.trial import RunConfig, run_trial
from eade.scheduler import KINDS

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_PARTIAL = 2


def _int_list(text):
    return [int(v) for v in text.replace(",", " ").split()]


def _spec(args):
    shift = rotation = None
    if getattr(args, "shift_file", None):
        shift, rotation = bench.load_transform(args.shift_file)
    return bench.make_spec(args.function, args.dim, shift=shift, rotation=rotation)


def _emit(doc, out):
    text = json.dumps(doc, indent=1) + "\n"
    if out:
        Path(out).parent.mkdir(parents=True, exist_ok=True)
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def cmd_run(args):
    config = RunConfig(
        _spec(args), algo=args.algo, max_fes=args.max_fes, LEN=args.len, K=args.k, Q=args.q,
        seed=args.seed, history_stride=args.history_stride,
    )
    config.validate()
    result = run_trial(config)
    _emit(result.document(), args.out)
    logging.info("best error %.6e after %d FES (%.1fs)", result.best_f, result.fes_used, result.wall_time)
    return EXIT_OK


def cmd_experiment(args):
    manifest = experiment.load_manifest(args.manifest)
    outcome = experiment.run_experiment(manifest, args.out_dir, jobs=args.jobs)
    return outcome.exit_code


def cmd_probe(args):
    res = probe_diversity(_spec(args), budget=args.budget, seed=args.seed)
    _emit(res.document(), args.out)
    return EXIT_OK


def cmd_sweep(args):
    data = experiment.sweep_manifest(
        args.function, args.dim, args.len_list, args.k_list,
        trials=args.trials, seed_base=args.seed_base, max_fes=args.max_fes,
    )
    manifest = experiment.parse_manifest(data)
    outcome = experiment.run_experiment(manifest, args.out_dir, jobs=args.jobs)
    return outcome.exit_code


def build_parser():
    parser = argparse.ArgumentParser(prog="eade", description="Explicitly adaptive differential evolution.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    def objective_args(p):
        p.add_argument("--function", required=True, choices=sorted(bench.FUNCTIONS))
        p.add_argument("--dim", type=int, required=True)
        p.add_argument("--shift-file", help="shift/rotation data file")

    p = sub.add_parser("run", help="run a single trial")
    objective_args(p)
    p.add_argument("--algo", default="eade", choices=KINDS)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--max-fes", type=int, default=None, help="default 10000 * D")
    p.add_argument("--len", type=int, default=30)
    p.add_argument("--k", type=int, default=2)
    p.add_argument("--q", type=int, default=10)
    p.add_argument("--history-stride", type=int, default=10)
    p.add_argument("--out", help="output JSON path (stdout if omitted)")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("experiment", help="run every cell of a manifest")
    p.add_argument("--manifest", required=True)
    p.add_argument("--out-dir", required=True)
    p.add_argument("--jobs", type=int, default=1)
    p.set_defaults(func=cmd_experiment)

    p = sub.add_parser("probe-diversity", help="offspring diversity probe")
    objective_args(p)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--budget", type=int, default=None, help="default 10000 * D")
    p.add_argument("--out")
    p.set_defaults(func=cmd_probe)

    p = sub.add_parser("sweep", help="LEN x K sensitivity grid")
    objective_args(p)
    p.add_argument("--len-list", type=_int_list, default=[10, 30, 50, 70, 90])
    p.add_argument("--k-list", type=_int_list, default=[1, 2, 3, 4, 5])
    p.add_argument("--trials", type=int, default=1)
    p.add_argument("--seed-base", type=int, default=0)
    p.add_argument("--max-fes", type=int, default=None)
    p.add_argument("--out-dir", required=True)
    p.add_argument("--jobs", type=int, default=1)
    p.set_defaults(func=cmd_sweep)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except (ValueError, FileNotFoundError, OSError) as err:
        logging.error("%s", err)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
