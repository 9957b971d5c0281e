"""How often multistart ICM finds the <= k + 1/8 point on gadgets, by k.

    python scripts/hardness_phenomenology.py --kmin 4 --kmax 14 --per-k 10 --starts 50

Prints a CSV table: k, YES instances tried, fraction found by ICM, mean best
ICM value minus k on YES and NO instances.
"""

import argparse
import csv
import sys

import numpy as np

from tqreg.acceptance import random_a, random_yes_instance
from tqreg.reduction import SubsetSumInstance, build_reduction
from tqreg.solvers import SolverConfig, solve_local_icm


def main():
    p = argparse.ArgumentParser()
    p.add_argument("--kmin", type=int, default=4)
    p.add_argument("--kmax", type=int, default=14)
    p.add_argument("--per-k", type=int, default=10)
    p.add_argument("--starts", type=int, default=50)
    p.add_argument("--seed", type=int, default=0)
    args = p.parse_args()

    rng = np.random.default_rng(args.seed)
    w = csv.writer(sys.stdout)
    w.writerow(["k", "n_yes", "found_fraction", "yes_excess_mean", "no_excess_mean"])
    for k in range(args.kmin, args.kmax + 1):
        found, yes_ex, no_ex = 0, [], []
        for i in range(args.per_k):
            yes = random_yes_instance(rng, k)
            while yes.k != k:
                yes = random_yes_instance(rng, k)
            a = random_a(rng, k)
            no = SubsetSumInstance(a, sum(abs(v) for v in a) + 1)
            cfg = SolverConfig(starts=args.starts, seed=i)
            for ss, bucket in ((yes, yes_ex), (no, no_ex)):
                art = build_reduction(ss)
                obj = solve_local_icm(art.instance, cfg).objective
                bucket.append(obj - k)
                if ss is yes and obj <= float(art.threshold):
                    found += 1
        w.writerow([k, args.per_k, f"{found / args.per_k:.3f}", f"{np.mean(yes_ex):.4f}", f"{np.mean(no_ex):.4f}"])
        sys.stdout.flush()


if __name__ == "__main__":
    main()
