"""Command line entry point: ``stablab {defects,stabilize,verify,diagonal,sweep}``."""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from concurrent.futures import ThreadPoolExecutor

from ..errors import ConfigError, StabLabError
from ..newton import MARGIN_TOL, stabilize, verify_bounds
from . import io
from .config import ExperimentConfig

EXIT_OK, EXIT_FAIL, EXIT_CONFIG = 0, 1, 2


def thread_count():
    raw = os.environ.get("STABLAB_THREADS", "0")
    try:
        n = int(raw)
    except ValueError:
        raise ConfigError(f"STABLAB_THREADS must be an integer, got {raw!r}", where="environment")
    return n if n > 0 else (os.cpu_count() or 1)


def _fmt(x):
    return "n/a" if x is None else f"{x:.6e}"


def cmd_defects(cfg, args):
    inst = cfg.build().instance
    vals = {"mdef": inst.mdef(), "adef": inst.adef(), "T_norm": inst.T_norm, "psi_norm": inst.psi_norm}
    if args.json:
        print(json.dumps({k: {"value": v.value, "exact": v.exact, "method": v.method}
                          for k, v in vals.items()}))
    else:
        for k, v in vals.items():
            print(f"{k:<9} {v.value!r:<24} {'exact' if v.exact else 'estimated'}")
    return EXIT_OK


def cmd_stabilize(cfg, args):
    exp = cfg.build()
    trace = stabilize(exp.instance, exp.iteration)
    io.write_trace(trace, args.out)
    summary = io.summary_dict(trace)
    if args.summary:
        with open(args.summary, "w") as fh:
            fh.write(io.dumps(summary) + "\n")
    print(f"outcome {summary['outcome']}  steps {summary['steps']}  final mdef {_fmt(summary['final_mdef'])}")
    return EXIT_OK


def cmd_verify(cfg, args):
    trials = [None] if args.trials is None else range(args.trials)
    worst = {}
    for t in trials:
        exp = cfg.build(trial=t)
        for c in verify_bounds(exp.instance, seed=exp.seed):
            if not c.hypothesis_ok:
                continue
            n = worst.get(c.name, (None, 0))[1] + 1
            if c.name not in worst or c.margin < worst[c.name][0].margin:
                worst[c.name] = (c, n)
            else:
                worst[c.name] = (worst[c.name][0], n)
    print(f"{'bound':<22} {'lhs':>14} {'rhs':>14} {'margin':>14} {'trials':>7}")
    failed = False
    for name, (c, n) in worst.items():
        flag = "" if c.ok else "  FAIL"
        failed |= not c.ok
        print(f"{name:<22} {c.lhs:>14.6e} {c.rhs:>14.6e} {c.margin:>14.6e} {n:>7d}{flag}")
    if failed:
        print(f"some margin below -{MARGIN_TOL:g}", file=sys.stderr)
    return EXIT_FAIL if failed else EXIT_OK


def cmd_diagonal(cfg, args):
    from ..errors import DiagonalRejected

    try:
        exp = cfg.build()
    except ConfigError as exc:
        if isinstance(exc.__cause__, DiagonalRejected):
            print(str(exc.__cause__))
            return EXIT_FAIL
        raise
    d = exp.instance.diagonal
    print(f"residual_unit    {d.residual_unit!r}")
    print(f"residual_commute {d.residual_commute!r}")
    print(f"M                {d.M!r}")
    print(f"terms            {len(d.rep)}")
    return EXIT_OK


def _parse_grid(text):
    try:
        vals = [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise ConfigError(f"grid must be comma separated numbers, got {text!r}", where="--grid")
    if not vals:
        raise ConfigError("empty grid", where="--grid")
    return vals


def cmd_sweep(cfg, args):
    grid = _parse_grid(args.grid)
    experiments = [cfg.with_value(args.vary, v).build() for v in grid]

    def run(exp):
        return stabilize(exp.instance, exp.iteration)

    with ThreadPoolExecutor(max_workers=thread_count()) as pool:
        traces = list(pool.map(run, experiments))
    io.write_sweep([io.sweep_row(v, tr) for v, tr in zip(grid, traces)], args.out)
    print(f"wrote {len(grid)} rows to {args.out}")
    return EXIT_OK


def build_parser():
    p = argparse.ArgumentParser(prog="stablab", description=__doc__)
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("defects", help="print mdef, adef and operator norms")
    s.add_argument("--config", required=True)
    s.add_argument("--json", action="store_true")
    s.set_defaults(func=cmd_defects)

    s = sub.add_parser("stabilize", help="run the improving iteration and write a JSONL trace")
    s.add_argument("--config", required=True)
    s.add_argument("--out", required=True)
    s.add_argument("--summary")
    s.set_defaults(func=cmd_stabilize)

    s = sub.add_parser("verify", help="check the proof inequalities on seeded instances")
    s.add_argument("--config", required=True)
    s.add_argument("--trials", type=int)
    s.set_defaults(func=cmd_verify)

    s = sub.add_parser("diagonal", help="validate the configured diagonal")
    s.add_argument("--config", required=True)
    s.set_defaults(func=cmd_diagonal)

    s = sub.add_parser("sweep", help="rerun stabilize across a parameter grid")
    s.add_argument("--config", required=True)
    s.add_argument("--vary", required=True, choices=["eta", "epsilon_t", "epsilon_psi"])
    s.add_argument("--grid", required=True)
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_sweep)
    return p


def run_command(argv):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code else EXIT_OK
    logging.basicConfig(level=logging.INFO if args.verbose else logging.ERROR,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = ExperimentConfig.load(args.config)
        return args.func(cfg, args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (StabLabError, AssertionError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAIL


def main():
    sys.exit(run_command(sys.argv[1:]))


if __name__ == "__main__":
    main()
