"""Run the improving iteration on a config and print the per-step table.

    python scripts/run_default.py [configs/default.json] [--trace out.jsonl]
"""

import argparse
from pathlib import Path

from stablab.lab import io
from stablab.lab.config import ExperimentConfig
from stablab.newton import stabilize

ROOT = Path(__file__).resolve().parents[1]


def main():
    p = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    p.add_argument("config", nargs="?", default=str(ROOT / "configs" / "default.json"))
    p.add_argument("--trace")
    args = p.parse_args()

    exp = ExperimentConfig.load(args.config).build()
    tr = stabilize(exp.instance, exp.iteration)
    print(f"alpha={tr.alpha:.3e}  theta={tr.theta}  delta={tr.delta:.3e}  K={tr.K:.6g}  L={tr.L:.6g}  M={tr.M:.6g}")
    print(f"{'n':>3} {'mdef':>12} {'||T_n||':>12} {'delta_n':>12} {'new-defect lhs':>15} {'rhs':>12}")
    for s in tr.steps:
        lhs = "" if s.prop34_lhs is None else f"{s.prop34_lhs:.3e}"
        rhs = "" if s.prop34_rhs is None else f"{s.prop34_rhs:.3e}"
        print(f"{s.n:>3} {s.mdef:>12.3e} {s.op_norm:>12.6f} {s.delta_n:>12.3e} {lhs:>15} {rhs:>12}")
    print(f"outcome {tr.outcome.value}  N={tr.N}  distance {tr.distance_to_start:.3e}  "
          f"(endgame bound {tr.endgame_bound:.3e})")
    for note in tr.notes:
        print("note:", note)
    if args.trace:
        io.write_trace(tr, args.trace)


if __name__ == "__main__":
    main()
