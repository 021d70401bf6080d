"""Monte Carlo scenarios: a truth, a null to fit, and a synthetic covariate design."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError
from .model import ModelSpec, OrderedChoiceSpec

PROBIT = OrderedChoiceSpec("probit", 4, dynamic=False)
LOGIT = OrderedChoiceSpec("logit", 4, dynamic=False)
DYN_PROBIT = OrderedChoiceSpec("probit", 4, dynamic=True)
DYN_LOGIT = OrderedChoiceSpec("logit", 4, dynamic=True)

# logistic errors have sd pi/sqrt(3); 1.7 is the usual probit-to-logit rescaling
LOGIT_SCALE = 1.7

# Strong covariate signal, as in monetary-policy reaction functions; thresholds
# put roughly a quarter of the sample in each category.
STATIC_BETA = (2.0, -2.0)
STATIC_TAU = (-2.0, 0.1, 2.1)
LAG_COEF = -1.0
# the lag term shifts the latent index by about -2.5 at the average category,
# so the dynamic thresholds sit lower to keep the cells balanced
DYNAMIC_TAU = (-4.0, -2.4, -0.8)


@dataclass(frozen=True)
class ScenarioSpec:
    name: str
    truth_spec: ModelSpec
    truth_theta: tuple
    null_spec: ModelSpec
    T: int = 100
    covariate: str = "ar1"  # "ar1" or "iid"
    ar_coef: float = 0.9
    p: int = 2
    burn_in: int = 50
    description: str = ""
    columns: tuple[str, ...] = field(default=("inflation", "output_gap"))

    def __post_init__(self):
        if self.covariate not in ("ar1", "iid"):
            raise DomainError(f"unknown covariate generator {self.covariate!r}")
        if not -1 < self.ar_coef < 1:
            raise DomainError("AR(1) coefficient must lie in (-1, 1)")
        if self.truth_spec.K != self.null_spec.K:
            raise DomainError("truth and null must share the support")
        if self.T < 2:
            raise DomainError("T must be >= 2")

    def covariates(self, n: int, rng: np.random.Generator) -> np.ndarray:
        """``n x p`` Gaussian covariates (iid or stationary AR(1)).

        The draw is held fixed across replications, so each column is
        standardized to sample mean 0 and variance 1; a persistent AR(1)
        path otherwise drifts far enough to empty an outer category.
        """
        e = rng.standard_normal((n, self.p))
        if self.covariate == "iid":
            x = e
        else:
            x = np.empty_like(e)
            x[0] = e[0]
            scale = np.sqrt(1.0 - self.ar_coef**2)
            for t in range(1, n):
                x[t] = self.ar_coef * x[t - 1] + scale * e[t]
        if n > 1:
            x = (x - x.mean(axis=0)) / x.std(axis=0)
        return x

    def with_T(self, T: int) -> "ScenarioSpec":
        from dataclasses import replace

        return replace(self, T=T)


def _scaled(values, c):
    return tuple(c * v for v in values)


BUILTIN_SCENARIOS: dict[str, ScenarioSpec] = {
    s.name: s
    for s in (
        ScenarioSpec(
            "size1", PROBIT, STATIC_BETA + STATIC_TAU, PROBIT,
            description="H0: static probit",
        ),
        ScenarioSpec(
            "size2",
            LOGIT,
            _scaled(STATIC_BETA + STATIC_TAU, LOGIT_SCALE),
            LOGIT,
            description="H0: static logit",
        ),
        ScenarioSpec(
            "power1",
            LOGIT,
            _scaled(STATIC_BETA + STATIC_TAU, LOGIT_SCALE),
            PROBIT,
            description="H0: static probit vs H1: static logit",
        ),
        ScenarioSpec(
            "power2",
            DYN_PROBIT,
            STATIC_BETA + (LAG_COEF,) + DYNAMIC_TAU,
            PROBIT,
            description="H0: static probit vs H1: dynamic probit",
        ),
        ScenarioSpec(
            "power3",
            DYN_LOGIT,
            _scaled(STATIC_BETA + (LAG_COEF,) + DYNAMIC_TAU, LOGIT_SCALE),
            PROBIT,
            description="H0: static probit vs H1: dynamic logit",
        ),
    )
}


def get_scenario(name: str, T: int | None = None) -> ScenarioSpec:
    try:
        s = BUILTIN_SCENARIOS[name]
    except KeyError:
        raise DomainError(f"unknown scenario {name!r}; choose from {sorted(BUILTIN_SCENARIOS)}") from None
    return s if T is None else s.with_T(T)
