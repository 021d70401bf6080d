"""Nonrandomized and randomized probability integral transforms for discrete laws.

For an outcome ``Y`` with conditional cdf ``F`` write ``U- = F(Y-1)`` and
``U = F(Y)``.  The nonrandomized transform is the continuous piecewise
linear map

    I(u) = clip((u - U-) / (U - U-), 0, 1),

the randomized PIT is ``U- + Z (U - U-)`` for external uniform noise ``Z``.
The helper quantities ``delta_f``, ``gamma``, ``discrepancy_d`` and
``nabla_drift`` give closed forms for conditional moments of ``I``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import special

from .errors import DimensionError, DomainError, InvalidParameterError
from .model import (
    ConditionalLaw,
    ModelSpec,
    ObservationSeries,
    lambda_path,
    link_pdf,
    ordered_cdf_matrix,
    poisson_kmax,
    quantile,
)


@dataclass(frozen=True)
class PitPair:
    u_minus: float
    u_plus: float

    def __post_init__(self):
        if not (0.0 <= self.u_minus < self.u_plus <= 1.0):
            raise InvalidParameterError(
                f"need 0 <= u_minus < u_plus <= 1, got ({self.u_minus}, {self.u_plus})"
            )


def nonrandomized_values(u_minus, u_plus, u) -> np.ndarray:
    """Vectorized ``I_t(u)``: returns ``len(u_minus) x len(u)``.

    Cells whose width underflows to zero are treated as a jump at ``u_plus``.
    """
    um = np.asarray(u_minus, dtype=float)[:, None]
    up = np.asarray(u_plus, dtype=float)[:, None]
    u = np.asarray(u, dtype=float)[None, :]
    width = up - um
    with np.errstate(divide="ignore", invalid="ignore"):
        lin = np.clip((u - um) / width, 0.0, 1.0)
    return np.where(width > 0, lin, (u >= up).astype(float))


def nonrandomized(pair: PitPair, u):
    """``I(u)`` for one observation; scalar in, scalar out."""
    out = nonrandomized_values([pair.u_minus], [pair.u_plus], np.atleast_1d(u))[0]
    return float(out[0]) if np.ndim(u) == 0 else out


def randomized_pit(pair: PitPair, z):
    """``U- + z (U - U-)``."""
    z = np.asarray(z, dtype=float)
    out = pair.u_minus + z * (pair.u_plus - pair.u_minus)
    return float(out) if out.ndim == 0 else out


def m_random(pair: PitPair, z_row, u):
    """Average of ``M`` jittered indicators ``1{U^r_m <= u}``."""
    z_row = np.atleast_1d(np.asarray(z_row, dtype=float))
    if z_row.size == 0:
        raise DomainError("M must be >= 1")
    ur = randomized_pit(pair, z_row)
    u_arr = np.atleast_1d(np.asarray(u, dtype=float))
    out = np.mean(np.atleast_1d(ur)[:, None] <= u_arr[None, :], axis=0)
    return float(out[0]) if np.ndim(u) == 0 else out


@dataclass(frozen=True)
class TransformSeries:
    """PIT pairs for a whole sample and the breakpoints they induce."""

    u_minus: np.ndarray
    u_plus: np.ndarray

    def __post_init__(self):
        um = np.asarray(self.u_minus, dtype=float)
        up = np.asarray(self.u_plus, dtype=float)
        if um.shape != up.shape or um.ndim != 1:
            raise DimensionError("u_minus and u_plus must be vectors of equal length")
        if np.any(um < 0) or np.any(up > 1) or np.any(um > up):
            raise InvalidParameterError("PIT pairs must satisfy 0 <= u_minus <= u_plus <= 1")
        um, up = um.copy(), up.copy()
        um.setflags(write=False)
        up.setflags(write=False)
        object.__setattr__(self, "u_minus", um)
        object.__setattr__(self, "u_plus", up)

    @property
    def T(self) -> int:
        return self.u_minus.size

    @property
    def breakpoints(self) -> np.ndarray:
        return np.unique(np.concatenate(([0.0, 1.0], self.u_minus, self.u_plus)))

    def pair(self, t: int) -> PitPair:
        return PitPair(float(self.u_minus[t]), float(self.u_plus[t]))

    def values(self, u) -> np.ndarray:
        """``I_t(u)`` as a ``T x len(u)`` matrix."""
        return nonrandomized_values(self.u_minus, self.u_plus, np.atleast_1d(u))

    def randomized(self, z) -> np.ndarray:
        """``U^r_{t,m}`` for a ``T x M`` noise matrix."""
        z = np.asarray(z, dtype=float)
        if z.ndim == 1:
            z = z[:, None]
        if z.shape[0] != self.T:
            raise DimensionError(f"noise has {z.shape[0]} rows, series has {self.T}")
        return self.u_minus[:, None] + z * (self.u_plus - self.u_minus)[:, None]

    @classmethod
    def from_model(cls, spec: ModelSpec, theta, series: ObservationSeries) -> "TransformSeries":
        """``(F_t(Y_t - 1 | Omega_t), F_t(Y_t | Omega_t))`` under ``theta``."""
        y = series.y
        if spec.family == "ordered":
            if series.K is not None and series.K != spec.K:
                raise DimensionError(f"series has K={series.K}, spec has K={spec.K}")
            C = ordered_cdf_matrix(
                spec, theta, series.x, series.lagged_y() if spec.dynamic else None
            )
            rows = np.arange(series.T)
            return cls(C[rows, y - 1], C[rows, y])
        lam, _ = lambda_path(spec, theta, series)
        kmax = poisson_kmax(lam)
        # observations beyond the truncation point share the top cell
        k = np.minimum(y, kmax)
        up = np.where(k >= kmax, 1.0, special.pdtr(k - 1, lam))
        um = np.where(k >= 2, special.pdtr(np.maximum(k - 2, 0), lam), 0.0)
        return cls(um, up)


@dataclass(frozen=True)
class NoiseMatrix:
    """``T x M`` uniform draws for the randomized transforms."""

    z: np.ndarray
    seed: int | None = None

    def __post_init__(self):
        z = np.asarray(self.z, dtype=float)
        if z.ndim == 1:
            z = z[:, None]
        if z.ndim != 2 or z.shape[1] < 1:
            raise DimensionError("noise must be a T x M matrix with M >= 1")
        if np.any(z < 0) or np.any(z >= 1):
            raise DomainError("noise entries must lie in [0, 1)")
        z = z.copy()
        z.setflags(write=False)
        object.__setattr__(self, "z", z)

    @property
    def M(self) -> int:
        return self.z.shape[1]

    @classmethod
    def draw(cls, T: int, M: int, rng) -> "NoiseMatrix":
        if M < 1:
            raise DomainError("M must be >= 1")
        seed = None
        if not isinstance(rng, np.random.Generator):
            seed = int(rng)
            rng = np.random.default_rng(seed)
        return cls(rng.random((T, M)), seed)

    def columns(self, M: int) -> "NoiseMatrix":
        """Leading ``M`` columns."""
        if not 1 <= M <= self.M:
            raise DomainError(f"requested M={M} from a matrix with {self.M} columns")
        return NoiseMatrix(self.z[:, :M], self.seed)


# ---------------------------------------------------------------------------
# Closed-form helper quantities for a single law
# ---------------------------------------------------------------------------


def _cell(law: ConditionalLaw, u):
    if np.any(np.asarray(u) <= 0):
        raise DomainError("u must be in (0, 1]")
    k = quantile(law, u)
    c = law.cdf_values
    return k, c[k], c[k - 1]


def delta_f(law: ConditionalLaw, u):
    """``(F(F^-1(u)) - u) / f(F^-1(u))``, in ``[0, 1)``."""
    k, Fk, Fk1 = _cell(law, u)
    return (Fk - np.asarray(u, dtype=float)) / (Fk - Fk1)


def gamma(law: ConditionalLaw, u, v):
    """``(F_k - u v v)(u ^ v - F_{k-1}) / f_k`` when ``u, v`` share the cell ``k``."""
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    ku, Fk, Fk1 = _cell(law, u)
    kv = quantile(law, v)
    hi, lo = np.maximum(u, v), np.minimum(u, v)
    out = np.where(ku == kv, (Fk - hi) * (lo - Fk1) / (Fk - Fk1), 0.0)
    return float(out) if out.ndim == 0 else out


def transform_on_support(law: ConditionalLaw, u) -> np.ndarray:
    """``I_F(k, u)`` for every support point ``k`` (rows) and ``u`` (columns)."""
    c = law.cdf_values
    return nonrandomized_values(c[:-1], c[1:], np.atleast_1d(u))


def discrepancy_d(G: ConditionalLaw, F: ConditionalLaw, u):
    """``G(k) - F(k) - delta_F(u) (g(k) - f(k))`` at ``k = F^-1(u)``."""
    if G.K != F.K:
        raise DomainError("G and F must share the support")
    k, Fk, Fk1 = _cell(F, u)
    Gk, Gk1 = G.cdf_values[k], G.cdf_values[k - 1]
    dF = (Fk - np.asarray(u, dtype=float)) / (Fk - Fk1)
    return Gk - Fk - dF * ((Gk - Gk1) - (Fk - Fk1))


def discrepancy_d2(G: ConditionalLaw, F: ConditionalLaw, u, v):
    """Second-moment discrepancy: ``E_G[I_F(u) I_F(v)] = u^v - delta_F(u,v) + d(G,F,u,v)``."""
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    lo, hi = np.minimum(u, v), np.maximum(u, v)
    base = discrepancy_d(G, F, lo)
    ku = quantile(F, u)
    kv = quantile(F, v)
    same = ku == kv
    corr = delta_f(F, hi) - delta_f(F, u) * delta_f(F, v)
    f = F.cdf_values[ku] - F.cdf_values[ku - 1]
    g = G.cdf_values[ku] - G.cdf_values[ku - 1]
    out = base - np.where(same, corr * (g - f), 0.0)
    return float(out) if np.ndim(out) == 0 else out


def delta_f2(law: ConditionalLaw, u, v):
    """``(delta_F(u v v) - delta_F(u) delta_F(v)) f(F^-1(u ^ v)) 1{F^-1(u) = F^-1(v)}``."""
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    lo, hi = np.minimum(u, v), np.maximum(u, v)
    k_lo = quantile(law, lo)
    same = quantile(law, u) == quantile(law, v)
    f = law.cdf_values[k_lo] - law.cdf_values[k_lo - 1]
    out = np.where(same, (delta_f(law, hi) - delta_f(law, u) * delta_f(law, v)) * f, 0.0)
    return float(out) if out.ndim == 0 else out


# ---------------------------------------------------------------------------
# Parameter drift of the transform
# ---------------------------------------------------------------------------


def cdf_gradient(spec: ModelSpec, theta, series: ObservationSeries, t: int, k) -> np.ndarray:
    """``dF_t(k | Omega_t) / dtheta`` for categories ``k`` (rows) at 0-based ``t``."""
    k = np.atleast_1d(np.asarray(k))
    theta = np.asarray(theta, dtype=float)
    if spec.family == "ordered":
        p = series.p
        beta, rho, tau = spec.split(theta, p)
        y_lag = series.lagged_y()[t]
        eta = series.x[t] @ beta + rho * y_lag
        d_eta = np.concatenate((series.x[t], [y_lag] if spec.dynamic else [], np.zeros(spec.K - 1)))
        out = np.zeros((k.size, theta.size))
        for i, kk in enumerate(k):
            if 1 <= kk <= spec.K - 1:
                dens = float(link_pdf(spec.link, tau[kk - 1] - eta))
                grad = -d_eta.copy()
                grad[p + int(spec.dynamic) + kk - 1] += 1.0
                out[i] = dens * grad
        return out
    lam, dlam = lambda_path(spec, theta, series)
    lam_t = lam[t]
    kmax = poisson_kmax(lam_t)
    # F(k) = P(Y* <= k-1) so dF(k) = -P(Y* = k-1) dlambda
    pm = np.where((k >= 1) & (k < kmax), special.pdtr(k - 1, lam_t) - special.pdtr(k - 2, lam_t), 0.0)
    pm = np.where(k == 1, np.exp(-lam_t), pm)
    pm = np.where(k >= kmax, 0.0, pm)
    return -pm[:, None] * dlam[t][None, :]


def nabla_drift(spec: ModelSpec, theta, series: ObservationSeries, t: int, u: float) -> np.ndarray:
    """``dF(k) - delta_F(u) df(k)`` at ``k = F_t^-1(u)``: first-order effect of theta on ``I_t(u)``."""
    from .model import law_at

    law = law_at(spec, theta, series, t)
    k = quantile(law, u)
    grads = cdf_gradient(spec, theta, series, t, [k, k - 1])
    dF, dF1 = grads[0], grads[1]
    return dF - float(delta_f(law, u)) * (dF - dF1)
