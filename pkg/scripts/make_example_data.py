"""Write a synthetic rate-change CSV for ``configs/rates_test.ini``.

The series comes from the dynamic probit truth of the ``power2`` scenario,
so a static probit fitted to it should be rejected by the bivariate tests.
"""

import argparse
from pathlib import Path

import numpy as np

from discrete_gof.bootstrap import scenario_series
from discrete_gof.scenarios import get_scenario

# representative target-rate moves for the four ordered categories
RATE_MOVES = np.array([-0.5, -0.125, 0.125, 0.5])


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--out", default=str(Path(__file__).resolve().parent.parent / "configs" / "rates_example.csv"))
    parser.add_argument("--T", type=int, default=200)
    parser.add_argument("--seed", type=int, default=11)
    args = parser.parse_args()

    sc = get_scenario("power2", T=args.T)
    rng = np.random.default_rng(args.seed)
    x = sc.covariates(sc.T + sc.burn_in, rng)
    series = scenario_series(sc, x, rng)
    lines = ["d_rate,inflation,output_gap"]
    lines += [f"{RATE_MOVES[y - 1]},{a:.6f},{b:.6f}" for y, (a, b) in zip(series.y, series.x)]
    Path(args.out).write_text("\n".join(lines) + "\n")
    print(f"wrote {series.T} rows to {args.out}; category counts {np.bincount(series.y, minlength=5)[1:].tolist()}")


if __name__ == "__main__":
    main()
