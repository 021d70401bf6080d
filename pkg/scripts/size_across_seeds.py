"""How much the warp-bootstrap size estimate moves with the master seed.

A scenario holds one covariate draw fixed, so different master seeds
condition on different covariate paths as well as different noise.
"""

import argparse

import numpy as np

from discrete_gof.bootstrap import StatPlan, warp_mc
from discrete_gof.scenarios import get_scenario


def main() -> None:
    parser = argparse.ArgumentParser(description="size estimates over several master seeds")
    parser.add_argument("--scenario", default="size1")
    parser.add_argument("--seeds", type=int, nargs="+", default=[0, 1, 2, 3, 2026])
    parser.add_argument("--R", type=int, default=500)
    parser.add_argument("--T", type=int, default=100)
    parser.add_argument("--threads", type=int, default=1)
    args = parser.parse_args()

    plan = StatPlan(columns=("S2", "R2", "S1", "R1", "Z"))
    sc = get_scenario(args.scenario, T=args.T)
    rows = []
    for seed in args.seeds:
        # same derivation as the first scenario of an ``mc`` run
        sc_seed = int(np.random.SeedSequence([seed, 0]).generate_state(1)[0])
        res = warp_mc(sc, args.R, sc_seed, plan=plan, n_jobs=args.threads)
        rows.append(100 * res.rejection)
        print(f"seed {seed}: " + " ".join(f"{c}-{n} {100 * v:.1f}" for (c, n), v in zip(res.labels, res.rejection)))
    rows = np.array(rows)
    labels = [f"{c}-{n}" for c, n in plan.for_spec(sc.null_spec).labels]
    print("range over seeds: " + " ".join(f"{l} {lo:.1f}-{hi:.1f}" for l, lo, hi in zip(labels, rows.min(0), rows.max(0))))
    half = 196 * np.sqrt(0.05 * 0.95 / args.R)
    print(f"binomial 95% half-width at 5% with R={args.R}: {half:.1f} points")


if __name__ == "__main__":
    main()
