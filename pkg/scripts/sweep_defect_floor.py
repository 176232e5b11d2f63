"""How the terminal defect tracks the associative defect.

Sweeps epsilon_psi on a non-associative config and reports the final
multiplicative defect against alpha^(1/(1+theta)), the level at which the
iteration is allowed to stop.  Writes a CSV next to the printed table.

    python scripts/sweep_defect_floor.py [--out floor.csv]
"""

import argparse
import logging
from pathlib import Path

import numpy as np

from stablab.lab import io
from stablab.lab.config import ExperimentConfig
from stablab.newton import stabilize

ROOT = Path(__file__).resolve().parents[1]


def main():
    p = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    p.add_argument("--config", default=str(ROOT / "configs" / "default_nonassoc.json"))
    p.add_argument("--out", default="defect_floor.csv")
    args = p.parse_args()
    # the hypotheses warning repeats for every grid point
    logging.getLogger("stablab").setLevel(logging.ERROR)

    base = ExperimentConfig.load(args.config)
    grid = np.logspace(-10, -3, 8)
    rows = []
    print(f"{'eps_psi':>9} {'alpha':>10} {'outcome':>14} {'final mdef':>11} {'alpha^(1/(1+th))':>17}")
    for eps in grid:
        exp = base.with_value("epsilon_psi", float(eps)).build()
        tr = stabilize(exp.instance, exp.iteration)
        rows.append(io.sweep_row(float(eps), tr))
        print(f"{eps:>9.1e} {tr.alpha:>10.2e} {str(rows[-1]['N_or_outcome']):>14} "
              f"{tr.final_mdef:>11.2e} {tr.alpha_power_bound:>17.2e}")
    io.write_sweep(rows, args.out)


if __name__ == "__main__":
    main()
