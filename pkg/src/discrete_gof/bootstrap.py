"""Parametric bootstrap p-values and the warp-speed Monte Carlo accelerator."""

from __future__ import annotations

import dataclasses
import re
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Protocol

import numpy as np

from .errors import ConvergenceError, DiscreteGofError, DomainError
from .estimate import FitOptions, FitResult, fit_mle
from .model import ModelSpec, ObservationSeries, simulate
from .process import MarkedProcess, R1Process, R2Process, S1Process, S2Process
from .stat import cvm, ks
from .transform import NoiseMatrix, TransformSeries

DEFAULT_COLUMNS = ("S2", "R2M(50)", "R2M(25)", "R2", "S1", "R1M(50)", "R1M(25)", "R1", "Z")
NORMS = ("KS", "CvM")
MAX_DROP_SHARE = 0.05

_COLUMN = re.compile(r"^(S1|S2|Z|R1|R2)(?:M\((\d+)\))?$")


@dataclass(frozen=True)
class StatPlan:
    """Which processes and norms to compute.

    Columns are ``S1``, ``S2``, ``R1``/``R2`` (M = 1), ``R1M(M)``/``R2M(M)``
    and ``Z``.  One noise matrix with ``max M`` columns is drawn per dataset;
    each ``M`` uses its leading columns.
    """

    columns: tuple[str, ...] = DEFAULT_COLUMNS
    norms: tuple[str, ...] = NORMS
    cvm_mode: str = "auto"

    def __post_init__(self):
        for c in self.columns:
            if not _COLUMN.match(c):
                raise DomainError(f"unknown statistic column {c!r}")
            m = _COLUMN.match(c)
            if m.group(2) is not None and (m.group(1) in ("S1", "S2", "Z") or int(m.group(2)) < 1):
                raise DomainError(f"invalid column {c!r}")
        for n in self.norms:
            if n not in NORMS:
                raise DomainError(f"unknown norm {n!r}")
        if self.cvm_mode not in ("auto", "exact", "grid"):
            raise DomainError(f"unknown CvM mode {self.cvm_mode!r}")

    @staticmethod
    def parse(column: str) -> tuple[str, int]:
        m = _COLUMN.match(column)
        kind = m.group(1)
        return kind, int(m.group(2)) if m.group(2) else 1

    @property
    def m_max(self) -> int:
        ms = [self.parse(c)[1] for c in self.columns if self.parse(c)[0] in ("R1", "R2")]
        return max(ms, default=0)

    @property
    def labels(self) -> list[tuple[str, str]]:
        return [(c, n) for c in self.columns for n in self.norms]

    def for_spec(self, spec: ModelSpec) -> "StatPlan":
        """Drop the marked process for families where it is undefined."""
        if spec.family == "ordered":
            return self
        return dataclasses.replace(self, columns=tuple(c for c in self.columns if c != "Z"))


def compute_statistics(
    spec: ModelSpec, theta, series: ObservationSeries, plan: StatPlan, rng: np.random.Generator
) -> np.ndarray:
    """Statistics in ``plan.labels`` order; noise for the R-columns comes from ``rng``."""
    ts = TransformSeries.from_model(spec, theta, series)
    noise = NoiseMatrix.draw(series.T, plan.m_max, rng) if plan.m_max else None
    out = []
    for column in plan.columns:
        kind, M = plan.parse(column)
        if kind == "Z":
            cvm_val, ks_val = MarkedProcess.from_model(spec, theta, series).statistics()
            out.extend(ks_val if n == "KS" else cvm_val for n in plan.norms)
            continue
        if kind == "S1":
            proc = S1Process(ts)
        elif kind == "S2":
            proc = S2Process(ts)
        elif kind == "R1":
            proc = R1Process(ts, noise.columns(M))
        else:
            proc = R2Process(ts, noise.columns(M))
        for n in plan.norms:
            out.append(ks(proc).value if n == "KS" else cvm(proc, mode=plan.cvm_mode).value)
    return np.asarray(out, dtype=float)


def critical_value(draws: np.ndarray, alpha: float) -> np.ndarray:
    """Empirical ``(1 - alpha)`` percentile of the bootstrap draws (column-wise)."""
    return np.quantile(draws, 1.0 - alpha, axis=0, method="inverted_cdf")


def bootstrap_pvalue(observed: np.ndarray, draws: np.ndarray) -> np.ndarray:
    """``(1 + #{draw >= observed}) / (B + 1)``."""
    return (1.0 + np.sum(draws >= observed[None, :], axis=0)) / (draws.shape[0] + 1.0)


def simulation_spec(spec: ModelSpec, series: ObservationSeries) -> ModelSpec:
    """Pin the initial state used by the fit so simulation starts from it."""
    if spec.family == "poisson" and spec.dynamic:
        lam0, y0 = spec.initial_state(series)
        return dataclasses.replace(spec, lambda0=lam0, y0=y0)
    return spec


def _fit_or_raise(spec, series, options) -> FitResult:
    fit = fit_mle(spec, series, options)
    if not fit.converged:
        raise ConvergenceError(fit.message or "fit did not converge")
    return fit


def _replicate(spec, theta, series, plan, options, burn_in, seed) -> np.ndarray | None:
    rng = np.random.default_rng(seed)
    sim_spec = simulation_spec(spec, series)
    try:
        sim = simulate(sim_spec, theta, series.x, rng, y0=series.y0, burn_in=burn_in)
        sim = ObservationSeries(y=sim.y, x=series.x, K=series.K, y0=sim.y0, columns=series.columns)
        fit = _fit_or_raise(spec, sim, options)
        return compute_statistics(spec, fit.theta, sim, plan, rng)
    except (DiscreteGofError, np.linalg.LinAlgError, FloatingPointError):
        return None


def _map(fn, args_list, n_jobs: int):
    if n_jobs > 1 and len(args_list) > 1:
        with ProcessPoolExecutor(max_workers=n_jobs) as pool:
            return list(pool.map(fn, *zip(*args_list)))
    return [fn(*a) for a in args_list]


@dataclass
class BootstrapResult:
    labels: list[tuple[str, str]]
    observed: np.ndarray
    replicates: np.ndarray  # B_ok x n_stats
    critical: np.ndarray
    pvalues: np.ndarray
    alpha: float
    B: int
    seed: int
    n_failed: int
    fit: FitResult
    replicate_ok: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=bool))

    @property
    def unreliable(self) -> bool:
        return self.n_failed > MAX_DROP_SHARE * self.B

    def rejects(self) -> np.ndarray:
        return self.observed > self.critical

    def as_dict(self) -> dict[tuple[str, str], dict[str, float]]:
        return {
            lab: {"statistic": float(o), "critical": float(c), "pvalue": float(p)}
            for lab, o, c, p in zip(self.labels, self.observed, self.critical, self.pvalues)
        }


def parametric_bootstrap(
    series: ObservationSeries,
    spec: ModelSpec,
    plan: StatPlan | None = None,
    B: int = 199,
    alpha: float = 0.05,
    seed: int = 0,
    options: FitOptions | None = None,
    burn_in: int = 0,
    n_jobs: int = 1,
) -> BootstrapResult:
    """Fit, compute observed statistics, then ``B`` simulate-refit-recompute replicates.

    Replicates reuse the observed covariates.  Seeds come from
    ``SeedSequence(seed).spawn(B + 1)``: child 0 drives the observed noise,
    child ``b + 1`` drives replicate ``b``.  Replicates whose refit fails are
    dropped and counted.
    """
    if B < 19:
        raise DomainError("B must be at least 19")
    if not 0 < alpha < 1:
        raise DomainError("alpha must lie in (0, 1)")
    plan = (plan or StatPlan()).for_spec(spec)
    children = np.random.SeedSequence(seed).spawn(B + 1)
    fit = _fit_or_raise(spec, series, options)
    observed = compute_statistics(spec, fit.theta, series, plan, np.random.default_rng(children[0]))
    args = [(spec, fit.theta, series, plan, options, burn_in, children[b + 1]) for b in range(B)]
    draws = _map(_replicate, args, n_jobs)
    ok = np.array([d is not None for d in draws])
    reps = np.array([d for d in draws if d is not None]).reshape(-1, observed.size)
    if reps.shape[0] == 0:
        raise ConvergenceError("every bootstrap refit failed")
    return BootstrapResult(
        labels=plan.labels,
        observed=observed,
        replicates=reps,
        critical=critical_value(reps, alpha),
        pvalues=bootstrap_pvalue(observed, reps),
        alpha=alpha,
        B=B,
        seed=seed,
        n_failed=int((~ok).sum()),
        fit=fit,
        replicate_ok=ok,
    )


# ---------------------------------------------------------------------------
# Warp-speed Monte Carlo
# ---------------------------------------------------------------------------


class Scenario(Protocol):
    name: str
    truth_spec: ModelSpec
    truth_theta: tuple
    null_spec: ModelSpec
    T: int
    burn_in: int

    def covariates(self, n: int, rng: np.random.Generator) -> np.ndarray: ...


def scenario_series(scenario: Scenario, x_full: np.ndarray, rng: np.random.Generator) -> ObservationSeries:
    """Simulate the truth over ``burn_in + T`` rows and keep the last ``T``."""
    K = scenario.null_spec.K
    full = simulate(scenario.truth_spec, np.asarray(scenario.truth_theta), x_full, rng)
    b = scenario.burn_in
    y0 = int(full.y[b - 1]) if b > 0 else full.y0
    return ObservationSeries(y=full.y[b:], x=x_full[b:], K=K, y0=y0)


def _warp_replication(scenario, x_full, plan, options, seed):
    rng = np.random.default_rng(seed)
    try:
        data = scenario_series(scenario, x_full, rng)
        fit = _fit_or_raise(scenario.null_spec, data, options)
        obs = compute_statistics(scenario.null_spec, fit.theta, data, plan, rng)
    except (DiscreteGofError, np.linalg.LinAlgError, FloatingPointError):
        return None
    boot = _replicate(scenario.null_spec, fit.theta, data, plan, options, 0, rng.integers(2**63))
    if boot is None:
        return None
    return obs, boot


@dataclass
class WarpResult:
    scenario: str
    labels: list[tuple[str, str]]
    observed: np.ndarray  # R_ok x n_stats
    bootstrap: np.ndarray  # R_ok x n_stats, one draw per replication
    critical: np.ndarray
    rejection: np.ndarray
    alpha: float
    R: int
    seed: int
    n_failed: int

    @property
    def mc_se(self) -> np.ndarray:
        n = max(self.observed.shape[0], 1)
        return np.sqrt(self.rejection * (1 - self.rejection) / n)


def warp_mc(
    scenario: Scenario,
    R: int,
    seed: int,
    plan: StatPlan | None = None,
    alpha: float = 0.05,
    options: FitOptions | None = None,
    n_jobs: int = 1,
) -> WarpResult:
    """Rejection rates with one bootstrap draw per replication.

    The ``R`` single bootstrap statistics are pooled into the null
    reference distribution.  Covariates are drawn once per scenario
    (from the first child seed) and held fixed across replications.
    """
    if R < 1:
        raise DomainError("R must be >= 1")
    plan = (plan or StatPlan()).for_spec(scenario.null_spec)
    children = np.random.SeedSequence(seed).spawn(R + 1)
    x_full = scenario.covariates(scenario.T + scenario.burn_in, np.random.default_rng(children[0]))
    args = [(scenario, x_full, plan, options, children[r + 1]) for r in range(R)]
    results = _map(_warp_replication, args, n_jobs)
    kept = [r for r in results if r is not None]
    n_stats = len(plan.labels)
    obs = np.array([k[0] for k in kept]).reshape(-1, n_stats)
    boot = np.array([k[1] for k in kept]).reshape(-1, n_stats)
    if obs.shape[0]:
        crit = critical_value(boot, alpha)
        rej = np.mean(obs > crit[None, :], axis=0)
    else:
        crit = np.full(n_stats, np.nan)
        rej = np.full(n_stats, np.nan)
    return WarpResult(
        scenario=scenario.name,
        labels=plan.labels,
        observed=obs,
        bootstrap=boot,
        critical=crit,
        rejection=rej,
        alpha=alpha,
        R=R,
        seed=seed,
        n_failed=R - len(kept),
    )
