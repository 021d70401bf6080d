"""Conditional discrete response models: ordered choice and Poisson counts.

Categories are always coded ``1..K`` (or ``1, 2, ...`` for counts, with
``Y = Y* + 1``), so that ``F(0) = 0`` for every conditional law.

Parameter vectors are plain 1-D arrays with a fixed layout:

* ordered choice: ``(beta_1..beta_p, [rho], tau_1..tau_{K-1})``
* Poisson ``exp-static``: ``(beta_1..beta_p)``
* Poisson ``identity-ar``: ``(alpha0, alpha1, rho)``
* Poisson ``log-ar``: ``(beta_1..beta_p, rho)``
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Literal, Union

import numpy as np
from scipy import signal, special

from .errors import (
    DegenerateLawError,
    DimensionError,
    DomainError,
    InvalidParameterError,
    InvalidStateError,
)

PMF_FLOOR = 1e-12
POISSON_TAIL = 1e-12
POISSON_KMAX_CAP = 10**6


# ---------------------------------------------------------------------------
# Data containers
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ObservationSeries:
    """Sample ``{Y_t, X_t}``.

    ``K=None`` marks a countably infinite support (counts).  ``y0`` is the
    presample response used as ``Y_0`` by dynamic specifications; it
    defaults to the first observation.
    """

    y: np.ndarray
    x: np.ndarray
    K: int | None = None
    y0: int | None = None
    columns: tuple[str, ...] = ()

    def __post_init__(self):
        y = np.asarray(self.y)
        if y.ndim != 1:
            raise DimensionError("y must be a vector")
        if not np.all(np.isfinite(y)) or np.any(y != np.round(y)):
            raise DomainError("y must hold integer category codes")
        y = y.astype(np.int64)
        x = np.asarray(self.x, dtype=float)
        if x.ndim == 1:
            x = x.reshape(-1, 1) if x.size else np.zeros((len(y), 0))
        if x.shape[0] != len(y):
            raise DimensionError(f"x has {x.shape[0]} rows but y has length {len(y)}")
        if len(y) < 2:
            raise DomainError("need T >= 2 observations")
        if np.any(y < 1):
            raise DomainError("categories must be >= 1")
        if self.K is not None:
            if self.K < 2:
                raise DomainError("finite support needs K >= 2")
            if np.any(y > self.K):
                raise DomainError(f"category above K={self.K}")
        y0 = int(y[0]) if self.y0 is None else int(self.y0)
        y.setflags(write=False)
        x = np.array(x)
        x.setflags(write=False)
        object.__setattr__(self, "y", y)
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "y0", y0)

    @property
    def T(self) -> int:
        return len(self.y)

    @property
    def p(self) -> int:
        return self.x.shape[1]

    @property
    def finite(self) -> bool:
        return self.K is not None

    def lagged_y(self) -> np.ndarray:
        """``Y_{t-1}`` for ``t = 1..T`` with the presample value in front."""
        return np.concatenate(([self.y0], self.y[:-1]))

    def with_y(self, y) -> "ObservationSeries":
        return ObservationSeries(y=y, x=self.x, K=self.K, y0=self.y0, columns=self.columns)


@dataclass(frozen=True)
class InfoState:
    """Realized information set at one ``t``: covariate row and lagged response."""

    x: np.ndarray
    y_lag: int | None = None


# ---------------------------------------------------------------------------
# Specifications
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class OrderedChoiceSpec:
    link: Literal["probit", "logit"] = "probit"
    K: int = 4
    dynamic: bool = False

    def __post_init__(self):
        if self.link not in ("probit", "logit"):
            raise InvalidParameterError(f"unknown ordered link {self.link!r}")
        if self.K < 2:
            raise InvalidParameterError("K must be >= 2")

    @property
    def family(self) -> str:
        return "ordered"

    def n_params(self, p: int) -> int:
        return p + int(self.dynamic) + self.K - 1

    def split(self, theta, p: int):
        """Return ``(beta, rho, tau)``; ``rho`` is 0.0 for static specs."""
        theta = np.asarray(theta, dtype=float)
        if theta.shape != (self.n_params(p),):
            raise DimensionError(
                f"theta has length {theta.size}, expected {self.n_params(p)}"
            )
        beta = theta[:p]
        rho = float(theta[p]) if self.dynamic else 0.0
        tau = theta[p + int(self.dynamic):]
        return beta, rho, tau

    def validate(self, theta, p: int) -> None:
        _, _, tau = self.split(theta, p)
        if not np.all(np.isfinite(theta)):
            raise InvalidParameterError("theta must be finite")
        if np.any(np.diff(tau) <= 0):
            raise InvalidParameterError(f"thresholds must be strictly increasing: {tau}")

    def param_names(self, p: int, columns=()) -> list[str]:
        names = list(columns) if len(columns) == p else [f"beta{i + 1}" for i in range(p)]
        if self.dynamic:
            names.append("rho")
        names += [f"tau{k}" for k in range(1, self.K)]
        return names


@dataclass(frozen=True)
class PoissonSpec:
    """Conditional Poisson model for ``Y* = Y - 1``.

    ``lambda0`` and ``y0`` fix the initial state of the autoregressive links;
    ``None`` resolves them from the sample (mean count, presample count).
    """

    link: Literal["exp-static", "identity-ar", "log-ar"] = "identity-ar"
    lambda0: float | None = None
    y0: int | None = None

    def __post_init__(self):
        if self.link not in ("exp-static", "identity-ar", "log-ar"):
            raise InvalidParameterError(f"unknown Poisson link {self.link!r}")

    @property
    def family(self) -> str:
        return "poisson"

    @property
    def K(self) -> None:
        return None

    @property
    def dynamic(self) -> bool:
        return self.link != "exp-static"

    def n_params(self, p: int) -> int:
        return {"exp-static": p, "identity-ar": 3, "log-ar": p + 1}[self.link]

    def validate(self, theta, p: int) -> None:
        theta = np.asarray(theta, dtype=float)
        if theta.shape != (self.n_params(p),):
            raise DimensionError(f"theta has length {theta.size}, expected {self.n_params(p)}")
        if not np.all(np.isfinite(theta)):
            raise InvalidParameterError("theta must be finite")
        if self.link == "identity-ar":
            a0, a1, rho = theta
            if not (a0 > 0 and a1 >= 0 and rho >= 0 and a1 + rho < 1):
                raise InvalidParameterError(
                    "identity-ar needs alpha0 > 0, alpha1 >= 0, rho >= 0, alpha1 + rho < 1"
                )

    def initial_state(self, series: ObservationSeries) -> tuple[float, int]:
        counts = series.y - 1
        lam0 = float(np.mean(counts)) if self.lambda0 is None else float(self.lambda0)
        y0 = series.y0 - 1 if self.y0 is None else int(self.y0)
        if lam0 <= 0:
            lam0 = 0.5
        return lam0, y0

    def param_names(self, p: int, columns=()) -> list[str]:
        xs = list(columns) if len(columns) == p else [f"beta{i + 1}" for i in range(p)]
        return {
            "exp-static": xs,
            "identity-ar": ["alpha0", "alpha1", "rho"],
            "log-ar": xs + ["rho"],
        }[self.link]


ModelSpec = Union[OrderedChoiceSpec, PoissonSpec]


# ---------------------------------------------------------------------------
# Link functions for the latent error
# ---------------------------------------------------------------------------


def link_cdf(link: str, z):
    z = np.asarray(z, dtype=float)
    if link == "probit":
        return special.ndtr(z)
    return special.expit(z)


def link_sf(link: str, z):
    return link_cdf(link, -np.asarray(z, dtype=float))


def link_pdf(link: str, z):
    z = np.asarray(z, dtype=float)
    if link == "probit":
        out = np.exp(-0.5 * z * z) / np.sqrt(2 * np.pi)
    else:
        e = special.expit(z)
        out = e * (1.0 - e)
    return np.where(np.isfinite(z), out, 0.0)


def link_dpdf(link: str, z):
    """Derivative of the error density."""
    z = np.asarray(z, dtype=float)
    zf = np.where(np.isfinite(z), z, 0.0)
    if link == "probit":
        out = -zf * link_pdf(link, zf)
    else:
        e = special.expit(zf)
        out = e * (1.0 - e) * (1.0 - 2.0 * e)
    return np.where(np.isfinite(z), out, 0.0)


# ---------------------------------------------------------------------------
# Conditional laws
# ---------------------------------------------------------------------------


class ConditionalLaw:
    """A discrete law on ``{1..K}`` given by its cdf ``F(0..K)``.

    Cells with mass at or below ``floor`` are rejected as degenerate.
    """

    __slots__ = ("_cdf",)

    def __init__(self, cdf_values, floor: float = PMF_FLOOR):
        c = np.asarray(cdf_values, dtype=float)
        if c.ndim != 1 or c.size < 1:
            raise DimensionError("cdf values must be a non-empty vector")
        if abs(c[-1] - 1.0) > 1e-10:
            raise DegenerateLawError(f"cdf must reach 1, got {c[-1]!r}")
        c = np.concatenate(([0.0], c))
        c[-1] = 1.0
        pmf = np.diff(c)
        if np.any(pmf <= floor):
            k = int(np.argmax(pmf <= floor)) + 1
            raise DegenerateLawError(f"cell {k} has mass {pmf[k - 1]:.3g} <= {floor}")
        c.setflags(write=False)
        self._cdf = c

    @classmethod
    def from_pmf(cls, pmf) -> "ConditionalLaw":
        pmf = np.asarray(pmf, dtype=float)
        return cls(np.cumsum(pmf))

    @property
    def K(self) -> int:
        return self._cdf.size - 1

    @property
    def cdf_values(self) -> np.ndarray:
        """``F(0), F(1), ..., F(K)``."""
        return self._cdf

    @property
    def pmf_values(self) -> np.ndarray:
        return np.diff(self._cdf)

    def cdf(self, k):
        k = np.asarray(k)
        if np.any(k < 0):
            raise DomainError("cdf argument must be >= 0")
        return self._cdf[np.minimum(k, self.K)]

    def pmf(self, k):
        k = np.asarray(k)
        if np.any((k < 1) | (k > self.K)):
            raise DomainError(f"pmf argument outside support 1..{self.K}")
        return self._cdf[k] - self._cdf[k - 1]

    def quantile(self, u):
        return quantile(self, u)

    def __repr__(self) -> str:
        return f"ConditionalLaw(pmf={np.round(self.pmf_values, 6).tolist()})"


def quantile(law: ConditionalLaw, u):
    """Smallest support point ``y`` with ``F(y) >= u``, for ``0 < u <= 1``."""
    u_arr = np.asarray(u, dtype=float)
    if np.any(~(u_arr > 0) | (u_arr > 1)):
        raise DomainError("quantile needs 0 < u <= 1")
    k = np.searchsorted(law.cdf_values, u_arr, side="left")
    k = np.minimum(k, law.K)
    return int(k) if k.ndim == 0 else k


def mixture_law(F: ConditionalLaw, H: ConditionalLaw, delta: float, T: int) -> ConditionalLaw:
    """Local-alternative law ``(1 - delta/sqrt(T)) F + (delta/sqrt(T)) H``."""
    if F.K != H.K:
        raise DomainError("F and H must share the support")
    if not (0 <= delta < np.sqrt(T)):
        raise DomainError(f"need 0 <= delta < sqrt(T) = {np.sqrt(T):.4g}")
    w = delta / np.sqrt(T)
    return ConditionalLaw((1 - w) * F.cdf_values[1:] + w * H.cdf_values[1:])


# ---------------------------------------------------------------------------
# Ordered choice
# ---------------------------------------------------------------------------


def _ordered_index(spec: OrderedChoiceSpec, theta, x, y_lag):
    x = np.atleast_2d(np.asarray(x, dtype=float))
    p = x.shape[1]
    spec.validate(theta, p)
    beta, rho, tau = spec.split(theta, p)
    eta = x @ beta
    if spec.dynamic:
        if y_lag is None:
            raise DomainError("dynamic spec needs the lagged response")
        eta = eta + rho * np.asarray(y_lag, dtype=float)
    return eta, tau


def ordered_cdf(spec: OrderedChoiceSpec, theta, omega: InfoState, k: int) -> float:
    """``F_eps(tau_k - x'beta - rho*y_{t-1})`` with ``tau_0=-inf``, ``tau_K=+inf``."""
    if not (0 <= k <= spec.K):
        raise DomainError(f"category {k} outside 0..{spec.K}")
    eta, tau = _ordered_index(spec, theta, np.atleast_2d(omega.x),
                              None if omega.y_lag is None else [omega.y_lag])
    if k == 0:
        return 0.0
    if k == spec.K:
        return 1.0
    return float(link_cdf(spec.link, tau[k - 1] - eta[0]))


def ordered_cdf_matrix(spec: OrderedChoiceSpec, theta, x, y_lag=None) -> np.ndarray:
    """Rows ``F_t(0..K)`` for every observation."""
    eta, tau = _ordered_index(spec, theta, x, y_lag)
    inner = link_cdf(spec.link, tau[None, :] - eta[:, None])
    T = eta.size
    return np.hstack([np.zeros((T, 1)), inner, np.ones((T, 1))])


def ordered_pmf_matrix(spec: OrderedChoiceSpec, theta, x, y_lag=None) -> np.ndarray:
    """Cell probabilities, computed from the survival side in the upper tail."""
    eta, tau = _ordered_index(spec, theta, x, y_lag)
    cuts = np.concatenate(([-np.inf], tau, [np.inf]))
    z = cuts[None, :] - eta[:, None]
    lo, hi = z[:, :-1], z[:, 1:]
    upper = lo > 0
    return np.where(
        upper,
        link_sf(spec.link, lo) - link_sf(spec.link, hi),
        link_cdf(spec.link, hi) - link_cdf(spec.link, lo),
    )


def ordered_law(spec: OrderedChoiceSpec, theta, omega: InfoState) -> ConditionalLaw:
    lag = None if omega.y_lag is None else [omega.y_lag]
    c = ordered_cdf_matrix(spec, theta, np.atleast_2d(omega.x), lag)[0]
    return ConditionalLaw(c[1:])


# ---------------------------------------------------------------------------
# Poisson
# ---------------------------------------------------------------------------


def poisson_kmax(lam) -> np.ndarray | int:
    """Smallest shifted category ``k`` with ``P(Y* <= k-1) >= 1 - 1e-12``."""
    lam_arr = np.asarray(lam, dtype=float)
    if np.any(lam_arr <= 0):
        raise InvalidStateError("Poisson intensity must be positive")
    from scipy.stats import poisson

    k = poisson.ppf(1.0 - POISSON_TAIL, lam_arr).astype(np.int64)
    # ppf may land one off because of rounding in the inversion
    k = np.where(special.pdtr(k - 1, lam_arr) >= 1.0 - POISSON_TAIL, k - 1, k)
    k = np.where(special.pdtr(k, lam_arr) < 1.0 - POISSON_TAIL, k + 1, k)
    k = np.minimum(np.maximum(k, 0) + 1, POISSON_KMAX_CAP)
    return int(k) if k.ndim == 0 else k


def poisson_cdf(spec: PoissonSpec | None, lam, k):
    """``P(Y* <= k-1)`` for shifted category ``k``; 1 from ``k_max`` on."""
    lam_arr = np.asarray(lam, dtype=float)
    if np.any(lam_arr <= 0):
        raise InvalidStateError("Poisson intensity must be positive")
    k_arr = np.asarray(k)
    if np.any(k_arr < 0):
        raise DomainError("category must be >= 0")
    out = np.where(k_arr >= 1, special.pdtr(np.maximum(k_arr - 1, 0), lam_arr), 0.0)
    out = np.where(k_arr >= poisson_kmax(lam_arr), 1.0, out)
    return float(out) if out.ndim == 0 else out


def poisson_law(lam: float) -> ConditionalLaw:
    """Truncated Poisson law on ``1..k_max`` with the residual mass at ``k_max``."""
    kmax = poisson_kmax(lam)
    c = special.pdtr(np.arange(kmax), lam)
    c[-1] = 1.0
    # lower-tail cells of a large intensity are tiny but genuinely positive
    return ConditionalLaw(c, floor=0.0)


def _identity_ar_filter(a1: float, inputs: np.ndarray, init: np.ndarray):
    """Run ``s_t = inputs_t + a1 * s_{t-1}`` along axis 0 with ``s_0 = init``."""
    zi = (a1 * np.asarray(init, dtype=float))[None, ...]
    out, _ = signal.lfilter([1.0], [1.0, -a1], inputs, axis=0, zi=zi)
    return out


def lambda_path(spec: PoissonSpec, theta, series: ObservationSeries, hessian: bool = False):
    """Intensity path and its gradient (``T x dim(theta)``).

    With ``hessian=True`` (identity-ar and exp-static only) also return the
    second derivatives ``T x d x d``.
    """
    theta = np.asarray(theta, dtype=float)
    if spec.link == "identity-ar":
        spec.validate(theta, series.p)
    counts = (series.y - 1).astype(float)
    T = series.T
    if spec.link == "exp-static":
        eta = series.x @ theta
        lam = np.exp(eta)
        dlam = lam[:, None] * series.x
        if hessian:
            return lam, dlam, lam[:, None, None] * series.x[:, :, None] * series.x[:, None, :]
        return lam, dlam

    lam0, y0 = spec.initial_state(series)
    lag = np.concatenate(([float(y0)], counts[:-1]))

    if spec.link == "identity-ar":
        a0, a1, rho = theta
        lam = _identity_ar_filter(a1, a0 + rho * lag, np.array(lam0))
        lam_prev = np.concatenate(([lam0], lam[:-1]))
        # d lambda_t = (1, lambda_{t-1}, Y*_{t-1}) + alpha1 * d lambda_{t-1}
        drive = np.column_stack([np.ones(T), lam_prev, lag])
        dlam = _identity_ar_filter(a1, drive, np.zeros(3))
        if np.any(lam <= 0):
            raise InvalidStateError("intensity path hit a nonpositive value")
        if not hessian:
            return lam, dlam
        # d2 lambda_t = alpha1 * d2 lambda_{t-1} + e1 dlam_{t-1}' + dlam_{t-1} e1'
        dprev = np.vstack([np.zeros((1, 3)), dlam[:-1]])
        cross = np.zeros((T, 3, 3))
        cross[:, 1, :] += dprev
        cross[:, :, 1] += dprev
        d2 = _identity_ar_filter(a1, cross.reshape(T, 9), np.zeros(9)).reshape(T, 3, 3)
        return lam, dlam, d2

    # log-ar: log(lambda_t) = x_t'beta + rho * e_{t-1}, e = (Y* - lambda)/lambda
    if hessian:
        raise NotImplementedError("analytic Hessian is not available for log-ar")
    p = series.p
    beta, rho = theta[:p], theta[p]
    xb = series.x @ beta
    lam = np.empty(T)
    dnu = np.empty((T, p + 1))
    e_prev = 0.0
    de_prev = np.zeros(p + 1)
    for t in range(T):
        nu = xb[t] + rho * e_prev
        if nu > 700:
            raise InvalidStateError("log intensity overflow")
        lam[t] = np.exp(nu)
        dnu[t, :p] = series.x[t]
        dnu[t, p] = e_prev
        dnu[t] += rho * de_prev
        # e_t = Y*_t / lambda_t - 1, d e_t = -(Y*_t / lambda_t) d nu_t
        e_prev = counts[t] / lam[t] - 1.0
        de_prev = -(counts[t] / lam[t]) * dnu[t]
    return lam, lam[:, None] * dnu


# ---------------------------------------------------------------------------
# Per-series law helpers
# ---------------------------------------------------------------------------


def cdf_at(spec: ModelSpec, theta, series: ObservationSeries, k) -> np.ndarray:
    """``F_t(k_t | Omega_t)`` for a vector of categories ``k_t``."""
    k = np.asarray(k)
    if spec.family == "ordered":
        C = ordered_cdf_matrix(spec, theta, series.x, series.lagged_y() if spec.dynamic else None)
        return C[np.arange(series.T), np.clip(k, 0, spec.K)]
    lam, _ = lambda_path(spec, theta, series)
    return poisson_cdf(spec, lam, k)


def law_at(spec: ModelSpec, theta, series: ObservationSeries, t: int) -> ConditionalLaw:
    """Conditional law of ``Y_t`` (0-based ``t``) given the realized ``Omega_t``."""
    if spec.family == "ordered":
        omega = InfoState(series.x[t], int(series.lagged_y()[t]) if spec.dynamic else None)
        return ordered_law(spec, theta, omega)
    lam, _ = lambda_path(spec, theta, series)
    return poisson_law(float(lam[t]))


# ---------------------------------------------------------------------------
# Simulation
# ---------------------------------------------------------------------------


def _poisson_draw(lam: float, u: float) -> int:
    """Inverse-cdf draw on the shifted, truncated support."""
    kmax = poisson_kmax(lam)
    k = 1
    c = np.exp(-lam)
    p = c
    while c < u and k < kmax:
        p *= lam / k
        c += p
        k += 1
    return k


def simulate(
    spec: ModelSpec,
    theta,
    x,
    rng: np.random.Generator,
    T: int | None = None,
    y0: int | None = None,
    burn_in: int = 0,
) -> ObservationSeries:
    """Draw ``Y_t = F_t^{-1}(Z_t)`` recursively, rebuilding ``Omega_t`` from draws.

    ``y0`` is the presample response (1-based) for dynamic specs.  With
    ``burn_in > 0`` the recursion is first run over the leading
    ``burn_in`` covariate rows and its last draw becomes ``Y_0``.
    """
    x = np.asarray(x, dtype=float)
    if x.ndim == 1:
        x = x.reshape(-1, 1)
    T = x.shape[0] if T is None else int(T)
    if x.shape[0] != T:
        raise DimensionError(f"x-path has {x.shape[0]} rows, T={T}")
    theta = np.asarray(theta, dtype=float)
    spec.validate(theta, x.shape[1])
    K = spec.K if spec.family == "ordered" else None

    if burn_in:
        if burn_in > T:
            raise DomainError("burn_in cannot exceed T")
        warm = simulate(spec, theta, x[:burn_in], rng, y0=y0)
        y0 = int(warm.y[-1])

    # 1 - U[0,1) lies in (0, 1], the domain of the quantile function
    u = 1.0 - rng.random(T)

    if spec.family == "ordered":
        p = x.shape[1]
        beta, rho, tau = spec.split(theta, p)
        xb = x @ beta
        if not spec.dynamic:
            C = link_cdf(spec.link, tau[None, :] - xb[:, None])
            y = 1 + np.sum(C < u[:, None], axis=1)
            return ObservationSeries(y=y, x=x, K=K, y0=y0)
        lag = 1 if y0 is None else int(y0)
        y0_used = lag
        # cdf rows for every possible lagged category, then walk the chain
        table = link_cdf(
            spec.link,
            tau[None, None, :] - xb[None, :, None] - rho * np.arange(1, K + 1)[:, None, None],
        )
        y = np.empty(T, dtype=np.int64)
        for t in range(T):
            lag = 1 + int(np.sum(table[lag - 1, t] < u[t]))
            y[t] = lag
        return ObservationSeries(y=y, x=x, K=K, y0=y0_used)

    # Poisson
    if spec.link == "exp-static":
        lam = np.exp(x @ theta)
        y = np.array([_poisson_draw(float(l), float(ui)) for l, ui in zip(lam, u)], dtype=np.int64)
        return ObservationSeries(y=y, x=x, K=None, y0=y0)

    lam_prev = spec.lambda0
    y_prev = spec.y0
    if y0 is not None and y_prev is None:
        y_prev = int(y0) - 1
    if lam_prev is None:
        lam_prev = _stationary_mean(spec, theta, x)
    if y_prev is None:
        y_prev = int(round(lam_prev))
    y0_used = int(y_prev) + 1
    y = np.empty(T, dtype=np.int64)
    if spec.link == "identity-ar":
        a0, a1, rho = theta
        for t in range(T):
            lam_t = a0 + a1 * lam_prev + rho * y_prev
            k = _poisson_draw(lam_t, u[t])
            y[t] = k
            lam_prev, y_prev = lam_t, k - 1
    else:
        p = x.shape[1]
        beta, rho = theta[:p], theta[p]
        xb = x @ beta
        e_prev = 0.0
        y0_used = int(y_prev) + 1
        for t in range(T):
            lam_t = float(np.exp(xb[t] + rho * e_prev))
            k = _poisson_draw(lam_t, u[t])
            y[t] = k
            e_prev = (k - 1) / lam_t - 1.0
    return ObservationSeries(y=y, x=x, K=None, y0=y0_used)


def _stationary_mean(spec: PoissonSpec, theta, x) -> float:
    if spec.link == "identity-ar":
        a0, a1, rho = theta
        return float(a0 / (1.0 - a1 - rho))
    p = x.shape[1]
    return float(np.exp(np.mean(x @ theta[:p])))
