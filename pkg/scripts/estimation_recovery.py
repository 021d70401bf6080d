"""Sampling behaviour of the maximum likelihood fits.

For each model, simulate ``reps`` series of length ``T``, refit, and report
bias, the ratio of the mean standard error to the Monte Carlo spread, and
the coverage of the 2-SE and 3-SE intervals.
"""

import argparse

import numpy as np

from discrete_gof.estimate import fit_mle
from discrete_gof.model import ObservationSeries, PoissonSpec, simulate
from discrete_gof.scenarios import get_scenario

SCENARIO_TRUTHS = {"static probit": "size1", "static logit": "size2", "dynamic probit": "power2", "dynamic logit": "power3"}
POISSON_TRUTH = np.array([1.0, 0.3, 0.4])


def cases():
    for label, name in SCENARIO_TRUTHS.items():
        sc = get_scenario(name)
        yield label, sc.truth_spec, np.array(sc.truth_theta), sc.covariates
    yield "identity-ar Poisson", PoissonSpec("identity-ar"), POISSON_TRUTH, lambda n, rng: np.zeros((n, 0))


def main() -> None:
    parser = argparse.ArgumentParser(description="estimation recovery study")
    parser.add_argument("--T", type=int, default=2000)
    parser.add_argument("--reps", type=int, default=200)
    parser.add_argument("--seed", type=int, default=3)
    args = parser.parse_args()

    for i, (label, spec, theta, covariates) in enumerate(cases()):
        rng = np.random.default_rng([args.seed, i])
        est, ses, failed = [], [], 0
        for _ in range(args.reps):
            s = simulate(spec, theta, covariates(args.T, rng), rng)
            fit = fit_mle(spec, ObservationSeries(y=s.y, x=s.x, K=spec.K, y0=s.y0))
            if not (fit.converged and fit.info_pd):
                failed += 1
                continue
            est.append(fit.theta)
            ses.append(fit.se)
        est, ses = np.array(est), np.array(ses)
        names = fit.names
        print(f"\n{label}: T={args.T}, {len(est)} of {args.reps} fits usable")
        print(f"{'param':<12}{'truth':>8}{'bias':>9}{'se/sd':>8}{'cov2':>7}{'cov3':>7}")
        for j, name in enumerate(names):
            err = est[:, j] - theta[j]
            cov2 = np.mean(np.abs(err) <= 2 * ses[:, j])
            cov3 = np.mean(np.abs(err) <= 3 * ses[:, j])
            print(f"{name:<12}{theta[j]:>8.3f}{err.mean():>9.4f}{ses[:, j].mean() / err.std():>8.3f}{cov2:>7.3f}{cov3:>7.3f}")


if __name__ == "__main__":
    main()
