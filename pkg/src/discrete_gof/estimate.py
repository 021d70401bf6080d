"""Conditional maximum likelihood for ordered choice and Poisson specifications."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy import special

from .errors import (
    IdentificationError,
    InvalidLikelihoodError,
    InvalidParameterError,
    InvalidStateError,
    SeparationError,
)
from .model import (
    ModelSpec,
    ObservationSeries,
    OrderedChoiceSpec,
    PoissonSpec,
    lambda_path,
    link_cdf,
    link_dpdf,
    link_pdf,
)

# ---------------------------------------------------------------------------
# Log-likelihood and derivatives
# ---------------------------------------------------------------------------


def _ordered_pieces(spec: OrderedChoiceSpec, theta, series: ObservationSeries):
    """Cell bounds ``a_t < b_t`` of the observed category and their theta-gradients."""
    p = series.p
    spec.validate(theta, p)
    beta, rho, tau = spec.split(theta, p)
    lag = series.lagged_y().astype(float)
    eta = series.x @ beta + (rho * lag if spec.dynamic else 0.0)
    cuts = np.concatenate(([-np.inf], tau, [np.inf]))
    y = series.y
    a = cuts[y - 1] - eta
    b = cuts[y] - eta
    d = theta.size
    T = series.T
    d_eta = np.zeros((T, d))
    d_eta[:, :p] = series.x
    if spec.dynamic:
        d_eta[:, p] = lag
    off = p + int(spec.dynamic)
    da = -d_eta.copy()
    db = -d_eta.copy()
    rows = np.arange(T)
    lower = y >= 2
    upper = y <= spec.K - 1
    da[rows[lower], off + y[lower] - 2] += 1.0
    db[rows[upper], off + y[upper] - 1] += 1.0
    return a, b, da, db


def _cell_prob(link: str, a, b):
    """``F(b) - F(a)`` computed on the more accurate side of the distribution."""
    upper = a > 0
    return np.where(
        upper,
        link_cdf(link, -a) - link_cdf(link, -b),
        link_cdf(link, b) - link_cdf(link, a),
    )


def _derivatives(spec: ModelSpec, theta, series: ObservationSeries, order: int):
    """Log-likelihood (``order=0``), plus score (1) and Hessian (2)."""
    theta = np.asarray(theta, dtype=float)
    if spec.family == "ordered":
        a, b, da, db = _ordered_pieces(spec, theta, series)
        f = _cell_prob(spec.link, a, b)
        if np.any(f <= 0):
            raise InvalidLikelihoodError("an observed category has zero probability")
        ll = float(np.sum(np.log(f)))
        if order == 0:
            return ll, None, None
        pa, pb = link_pdf(spec.link, a), link_pdf(spec.link, b)
        df = pb[:, None] * db - pa[:, None] * da
        s = df / f[:, None]
        score = s.sum(axis=0)
        if order == 1:
            return ll, score, None
        qa, qb = link_dpdf(spec.link, a), link_dpdf(spec.link, b)
        d2f = np.einsum("t,ti,tj->ij", qb / f, db, db) - np.einsum("t,ti,tj->ij", qa / f, da, da)
        hess = d2f - s.T @ s
        return ll, score, hess

    counts = (series.y - 1).astype(float)
    if spec.link == "identity-ar":
        spec.validate(theta, series.p)
    want_hess = order == 2 and spec.link != "log-ar"
    path = lambda_path(spec, theta, series, hessian=want_hess)
    lam, dlam = path[0], path[1]
    if np.any(lam <= 0):
        raise InvalidStateError("nonpositive intensity")
    ll = float(np.sum(counts * np.log(lam) - lam - special.gammaln(counts + 1)))
    if order == 0:
        return ll, None, None
    w = counts / lam - 1.0
    score = dlam.T @ w
    if order == 1:
        return ll, score, None
    if spec.link == "log-ar":
        return ll, score, -_fd_info(spec, theta, series)
    d2lam = path[2]
    hess = np.einsum("t,tij->ij", w, d2lam) - np.einsum("t,ti,tj->ij", counts / lam**2, dlam, dlam)
    return ll, score, hess


def _fd_info(spec: ModelSpec, theta, series: ObservationSeries, h: float = 1e-6) -> np.ndarray:
    """Negative central-difference Jacobian of the analytic score."""
    theta = np.asarray(theta, dtype=float)
    d = theta.size
    J = np.empty((d, d))
    for i in range(d):
        step = h * max(1.0, abs(theta[i]))
        e = np.zeros(d)
        e[i] = step
        J[:, i] = (score(spec, theta + e, series) - score(spec, theta - e, series)) / (2 * step)
    return -(J + J.T) / 2


def loglik(spec: ModelSpec, theta, series: ObservationSeries) -> float:
    """``sum_t log f_t(Y_t | Omega_t)``."""
    return _derivatives(spec, theta, series, 0)[0]


def score(spec: ModelSpec, theta, series: ObservationSeries) -> np.ndarray:
    """Analytic gradient of ``loglik``."""
    return _derivatives(spec, theta, series, 1)[1]


def info(spec: ModelSpec, theta, series: ObservationSeries) -> np.ndarray:
    """Observed information: minus the analytic Hessian of ``loglik``."""
    H = _derivatives(spec, theta, series, 2)[2]
    return -(H + H.T) / 2


def fisher_info(spec: ModelSpec, theta, series: ObservationSeries) -> np.ndarray:
    """Conditional information ``sum_t sum_k fdot_t(k) fdot_t(k)' / f_t(k)``."""
    theta = np.asarray(theta, dtype=float)
    if spec.family == "ordered":
        total = np.zeros((theta.size, theta.size))
        for k in range(1, spec.K + 1):
            s = series.with_y(np.full(series.T, k))
            a, b, da, db = _ordered_pieces(spec, theta, s)
            f = _cell_prob(spec.link, a, b)
            df = link_pdf(spec.link, b)[:, None] * db - link_pdf(spec.link, a)[:, None] * da
            total += (df / f[:, None]).T @ df
        return total
    lam, dlam = lambda_path(spec, theta, series)
    return (dlam / lam[:, None]).T @ dlam


# ---------------------------------------------------------------------------
# Reparameterization
# ---------------------------------------------------------------------------


def _softplus(v):
    return np.logaddexp(0.0, v)


def _softplus_inv(a):
    return a + np.log(-np.expm1(-a))


def to_unconstrained(spec: ModelSpec, theta, p: int) -> np.ndarray:
    """Map admissible ``theta`` to an unconstrained vector."""
    theta = np.asarray(theta, dtype=float)
    spec.validate(theta, p)
    if spec.family == "ordered":
        off = p + int(spec.dynamic)
        tau = theta[off:]
        return np.concatenate((theta[:off], tau[:1], np.log(np.diff(tau))))
    if spec.link == "identity-ar":
        a0, a1, rho = theta
        rest = 1.0 - a1 - rho
        if a1 <= 0 or rho <= 0:
            raise InvalidParameterError("interior point required for the unconstrained map")
        return np.array([_softplus_inv(a0), np.log(a1 / rest), np.log(rho / rest)])
    return theta.copy()


def from_unconstrained(spec: ModelSpec, phi, p: int) -> tuple[np.ndarray, np.ndarray]:
    """Inverse map and its Jacobian ``d theta / d phi``."""
    phi = np.asarray(phi, dtype=float)
    d = phi.size
    if spec.family == "ordered":
        off = p + int(spec.dynamic)
        gaps = np.exp(phi[off + 1 :])
        tau = phi[off] + np.concatenate(([0.0], np.cumsum(gaps)))
        J = np.zeros((d, d))
        J[:off, :off] = np.eye(off)
        J[off:, off] = 1.0
        for j, g in enumerate(gaps):
            J[off + 1 + j :, off + 1 + j] = g
        return np.concatenate((phi[:off], tau)), J
    if spec.link == "identity-ar":
        a0 = float(_softplus(phi[0]))
        z = np.array([phi[1], phi[2], 0.0])
        w = np.exp(z - z.max())
        w /= w.sum()
        a1, rho = w[0], w[1]
        J = np.zeros((3, 3))
        J[0, 0] = special.expit(phi[0])
        J[1:, 1:] = np.diag(w[:2]) - np.outer(w[:2], w[:2])
        return np.array([a0, a1, rho]), J
    return phi.copy(), np.eye(d)


# ---------------------------------------------------------------------------
# Fitting
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class FitOptions:
    gtol: float = 1e-6
    max_iter: int = 200
    theta0: tuple | None = None


@dataclass
class FitResult:
    theta: np.ndarray
    loglik: float
    score: np.ndarray
    info: np.ndarray
    se: np.ndarray
    converged: bool
    iterations: int
    info_pd: bool
    names: list[str] = field(default_factory=list)
    message: str = ""

    def table(self) -> list[tuple[str, float, float]]:
        return list(zip(self.names, self.theta.tolist(), self.se.tolist()))


def _check_identified(spec: ModelSpec, series: ObservationSeries) -> None:
    if spec.family == "ordered":
        if series.K is not None and series.K != spec.K:
            raise IdentificationError(f"series has K={series.K}, spec has K={spec.K}")
        seen = np.unique(series.y)
        missing = sorted(set(range(1, spec.K + 1)) - set(seen.tolist()))
        if missing:
            raise SeparationError(f"categories {missing} are never observed")
        cols = [series.x]
        if spec.dynamic:
            cols.append(series.lagged_y()[:, None].astype(float))
        cols.append(np.ones((series.T, 1)))
        design = np.hstack(cols)
        if np.linalg.matrix_rank(design) < design.shape[1]:
            raise IdentificationError(
                "design [x, lagged y, constant] is rank deficient; thresholds absorb any intercept"
            )
        return
    counts = series.y - 1
    if np.var(counts) == 0:
        raise SeparationError("counts are constant")
    if spec.link != "identity-ar" and np.linalg.matrix_rank(series.x) < series.p:
        raise IdentificationError("covariate matrix is rank deficient")


def _initial(spec: ModelSpec, series: ObservationSeries) -> np.ndarray:
    p = series.p
    if spec.family == "ordered":
        freq = np.cumsum(np.bincount(series.y, minlength=spec.K + 1)[1:])[:-1] / series.T
        freq = np.clip(freq, 1e-4, 1 - 1e-4)
        tau = special.ndtri(freq) if spec.link == "probit" else special.logit(freq)
        tau = tau + 1e-3 * np.arange(tau.size)  # strictly increasing even with tied frequencies
        return np.concatenate((np.zeros(p + int(spec.dynamic)), tau))
    counts = (series.y - 1).astype(float)
    if spec.link == "identity-ar":
        mu = counts.mean()
        c = counts - mu
        denom = np.dot(c, c)
        r1 = np.dot(c[1:], c[:-1]) / denom
        r2 = np.dot(c[2:], c[:-2]) / denom if series.T > 2 else 0.0
        rho = float(np.clip(r1, 0.05, 0.6))
        persistence = float(np.clip(r2 / r1, rho + 0.05, 0.95)) if r1 > 0.05 else rho + 0.1
        a1 = float(np.clip(persistence - rho, 0.05, 0.9 - rho))
        return np.array([max(mu * (1 - a1 - rho), 1e-3), a1, rho])
    beta, *_ = np.linalg.lstsq(series.x, np.log(counts + 0.5), rcond=None)
    if spec.link == "log-ar":
        return np.concatenate((beta, [0.0]))
    return beta


BOUNDARY_TOL = 1e-6


def _boundary_fit(spec: ModelSpec, series: ObservationSeries, theta, fixed, options: FitOptions):
    """Newton ascent over the free components with ``theta[fixed] = 0``.

    Returns ``(theta, loglik, score, hessian, iterations)`` when the
    Kuhn-Tucker conditions hold (free score ~ 0, fixed score <= 0), else None.
    """
    theta = np.asarray(theta, dtype=float).copy()
    theta[fixed] = 0.0
    free = np.setdiff1d(np.arange(theta.size), fixed)

    def value(th):
        try:
            ll = _derivatives(spec, th, series, 0)[0]
        except (InvalidParameterError, InvalidStateError, InvalidLikelihoodError, FloatingPointError):
            return -np.inf
        return ll if np.isfinite(ll) else -np.inf

    try:
        ll, g, H = _derivatives(spec, theta, series, 2)
    except (InvalidParameterError, InvalidStateError, InvalidLikelihoodError):
        return None
    for it in range(1, options.max_iter + 1):
        gf = g[free]
        if np.max(np.abs(gf)) <= options.gtol:
            break
        direction = None
        for curvature in (lambda: -H[np.ix_(free, free)], lambda: fisher_info(spec, theta, series)[np.ix_(free, free)]):
            try:
                L = np.linalg.cholesky(curvature())
                direction = np.linalg.solve(L.T, np.linalg.solve(L, gf))
                break
            except np.linalg.LinAlgError:
                continue
        if direction is None:
            direction = gf / max(1.0, np.max(np.abs(gf)))
        step, slope = 1.0, float(gf @ direction)
        for _ in range(40):
            cand = theta.copy()
            cand[free] += step * direction
            ll_new = value(cand)
            if ll_new >= ll + 1e-4 * step * slope:
                break
            step /= 2
        else:
            return None
        theta = cand
        ll, g, H = _derivatives(spec, theta, series, 2)
    else:
        return None
    if np.max(np.abs(g[free])) > options.gtol or np.any(g[fixed] > options.gtol):
        return None
    return theta, ll, g, H, it


def fit_mle(spec: ModelSpec, series: ObservationSeries, options: FitOptions | None = None) -> FitResult:
    """Damped Newton ascent in an unconstrained parameterization.

    The information is mapped by the Jacobian of the reparameterization; when
    it is not positive definite the expected (outer-product) information is
    tried, and a scaled gradient step is the last resort.
    Convergence is declared on the sup-norm of the score in the original
    parameterization.
    """
    options = options or FitOptions()
    _check_identified(spec, series)
    p = series.p
    theta = np.asarray(options.theta0, dtype=float) if options.theta0 is not None else _initial(spec, series)
    phi = to_unconstrained(spec, theta, p)

    def evaluate(phi_, order):
        th, J = from_unconstrained(spec, phi_, p)
        ll, g, H = _derivatives(spec, th, series, order)
        return th, J, ll, g, H

    def safe_loglik(phi_):
        try:
            th, _ = from_unconstrained(spec, phi_, p)
            ll = _derivatives(spec, th, series, 0)[0]
        except (InvalidParameterError, InvalidStateError, InvalidLikelihoodError, FloatingPointError):
            return -np.inf
        return ll if np.isfinite(ll) else -np.inf

    theta, J, ll, g, H = evaluate(phi, 2)
    converged = False
    message = ""
    it = 0
    for it in range(1, options.max_iter + 1):
        if np.max(np.abs(g)) <= options.gtol:
            converged = True
            it -= 1
            break
        g_phi = J.T @ g
        A = -(J.T @ H @ J)
        direction = None
        # Newton on the observed information, then Fisher scoring, then the gradient
        for curvature in (lambda: A, lambda: J.T @ fisher_info(spec, theta, series) @ J):
            try:
                L = np.linalg.cholesky(curvature())
                direction = np.linalg.solve(L.T, np.linalg.solve(L, g_phi))
                break
            except np.linalg.LinAlgError:
                continue
        if direction is None:
            direction = g_phi / max(1.0, np.max(np.abs(g_phi)))
        step = 1.0
        slope = float(g_phi @ direction)
        accepted = False
        for _ in range(40):
            cand = phi + step * direction
            ll_new = safe_loglik(cand)
            if ll_new >= ll + 1e-4 * step * slope or (ll_new >= ll and step < 1e-6):
                accepted = True
                break
            step /= 2
        if not accepted:
            message = "line search failed"
            break
        phi = cand
        theta, J, ll, g, H = evaluate(phi, 2)
    else:
        message = "iteration limit reached"
    if not converged and not message:
        message = "iteration limit reached"
    if np.max(np.abs(g)) <= options.gtol:
        converged = True
        message = ""

    free = np.ones(theta.size, dtype=bool)
    if not converged and spec.family == "poisson" and spec.link == "identity-ar":
        at_bound = np.flatnonzero(theta[1:] < BOUNDARY_TOL) + 1
        if at_bound.size:
            edge = _boundary_fit(spec, series, theta, at_bound, options)
            if edge is not None:
                theta, ll, g, H, it_edge = edge
                it += it_edge
                converged = True
                free[at_bound] = False
                message = "maximum on the boundary: " + ", ".join(
                    f"{spec.param_names(p)[i]} = 0" for i in at_bound
                )

    I = -(H + H.T) / 2
    se = np.full(theta.size, np.nan)
    try:
        I_free = I[np.ix_(free, free)]
        np.linalg.cholesky(I_free)
        info_pd = True
        se[free] = np.sqrt(np.diag(np.linalg.inv(I_free)))
    except np.linalg.LinAlgError:
        info_pd = False
    return FitResult(
        theta=theta,
        loglik=ll,
        score=g,
        info=I,
        se=se,
        converged=converged,
        iterations=it,
        info_pd=info_pd,
        names=spec.param_names(p, series.columns),
        message=message,
    )
