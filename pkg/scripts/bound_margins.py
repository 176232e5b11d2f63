"""Relative margins of the proof inequalities over many random unital instances.

For each bound reports the smallest ``(rhs - lhs) / rhs`` seen, which shows
how tight each inequality is in practice.

    python scripts/bound_margins.py [--trials 500]
"""

import argparse
from collections import defaultdict

import numpy as np

from stablab.algebra import cyclic_algebra, symmetric_group_algebra
from stablab.defects import identity_op
from stablab.lab.generators import gen_perturbed_hom, gen_perturbed_product
from stablab.newton import Instance, verify_bounds
from stablab.tensor import group_diagonal

ALGEBRAS = [cyclic_algebra(2), cyclic_algebra(3), cyclic_algebra(6), symmetric_group_algebra(3)]


def main():
    p = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    p.add_argument("--trials", type=int, default=500)
    p.add_argument("--seed", type=int, default=0)
    args = p.parse_args()

    rng = np.random.default_rng(args.seed)
    worst = defaultdict(lambda: (np.inf, None))
    violations = 0
    for t in range(args.trials):
        A = ALGEBRAS[t % len(ALGEBRAS)]
        psi = gen_perturbed_product(A, 10 ** rng.uniform(-8, -1), seed=t)
        T = gen_perturbed_hom(A, A, identity_op(A), 10 ** rng.uniform(-5, -0.5), seed=t + 1)
        for c in verify_bounds(Instance(group_diagonal(A), psi, T), seed=t):
            violations += not c.ok
            rel = c.margin / c.rhs if c.rhs > 0 else np.inf
            if rel < worst[c.name][0]:
                worst[c.name] = (rel, A.name)
    print(f"{'bound':<22} {'min relative margin':>20}  algebra")
    for name, (rel, where) in worst.items():
        print(f"{name:<22} {rel:>20.4f}  {where}")
    print(f"{violations} violations in {args.trials} trials")


if __name__ == "__main__":
    main()
