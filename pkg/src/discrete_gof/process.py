"""Empirical processes built on the PIT transforms.

``S1``/``S2`` are the univariate and lag-1 biparameter processes of the
nonrandomized transform; they are piecewise linear (bilinear) between the
breakpoints of the ``TransformSeries``.  ``R1M``/``R2M`` are the
M-randomized analogues; they are step functions minus ``u`` (``u1 u2``).
``MarkedProcess`` is the single-index marked residual process used as a
comparison test for ordered choice models.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionError, DomainError
from .model import ObservationSeries, OrderedChoiceSpec, link_cdf
from .transform import NoiseMatrix, TransformSeries, nonrandomized_values


class EmpiricalProcess:
    """Common surface: ``kind``, ``dim``, ``structure`` and evaluation."""

    kind: str
    dim: int
    structure: str  # "linear" (S-processes) or "step" (R-processes)


class S1Process(EmpiricalProcess):
    kind = "S1"
    dim = 1
    structure = "linear"

    def __init__(self, ts: TransformSeries):
        self.ts = ts
        self.scale = np.sqrt(ts.T)

    @property
    def breakpoints(self) -> np.ndarray:
        return self.ts.breakpoints

    def evaluate(self, u) -> np.ndarray:
        u = np.atleast_1d(np.asarray(u, dtype=float))
        return (self.ts.values(u).sum(axis=0) - self.ts.T * u) / self.scale

    def knot_values(self) -> tuple[np.ndarray, np.ndarray]:
        b = self.breakpoints
        return b, self.evaluate(b)


class S2Process(EmpiricalProcess):
    kind = "S2"
    dim = 2
    structure = "linear"

    def __init__(self, ts: TransformSeries):
        if ts.T < 2:
            raise DomainError("S2 needs T >= 2")
        self.ts = ts
        self.n = ts.T - 1
        self.scale = np.sqrt(self.n)

    @property
    def breakpoints(self) -> np.ndarray:
        return self.ts.breakpoints

    def grid(self, u1, u2) -> np.ndarray:
        """Values on the tensor grid ``u1 x u2`` (rows index ``u1``)."""
        u1 = np.atleast_1d(np.asarray(u1, dtype=float))
        u2 = np.atleast_1d(np.asarray(u2, dtype=float))
        A = nonrandomized_rows(self.ts, u1, lead=True)
        B = nonrandomized_rows(self.ts, u2, lead=False)
        return (A.T @ B - self.n * np.outer(u1, u2)) / self.scale

    def evaluate(self, u1, u2):
        """Pointwise values for broadcastable ``u1``, ``u2``."""
        u1, u2 = np.broadcast_arrays(np.asarray(u1, dtype=float), np.asarray(u2, dtype=float))
        flat1, flat2 = u1.ravel(), u2.ravel()
        A = nonrandomized_rows(self.ts, flat1, lead=True)
        B = nonrandomized_rows(self.ts, flat2, lead=False)
        out = (np.einsum("tg,tg->g", A, B) - self.n * flat1 * flat2) / self.scale
        return out.reshape(u1.shape) if u1.ndim else float(out[0])


def nonrandomized_rows(ts: TransformSeries, u, lead: bool) -> np.ndarray:
    """``I_t(u)`` for ``t = 2..T`` (``lead``) or ``t = 1..T-1``."""
    sl = slice(1, None) if lead else slice(None, -1)
    return nonrandomized_values(ts.u_minus[sl], ts.u_plus[sl], u)


class R1Process(EmpiricalProcess):
    """``sqrt(T) (F^r_M(u) - u)`` from ``T x M`` randomized PITs."""

    kind = "R1M"
    dim = 1
    structure = "step"

    def __init__(self, ts: TransformSeries, noise: NoiseMatrix):
        if noise.z.shape[0] != ts.T:
            raise DimensionError(f"noise has {noise.z.shape[0]} rows, series has {ts.T}")
        self.ts = ts
        self.M = noise.M
        self.T = ts.T
        self.scale = np.sqrt(ts.T)
        self.points = np.sort(ts.randomized(noise.z).ravel())

    def evaluate(self, u) -> np.ndarray:
        u = np.atleast_1d(np.asarray(u, dtype=float))
        n = np.searchsorted(self.points, u, side="right")
        return self.scale * (n / (self.T * self.M) - u)


class R2Process(EmpiricalProcess):
    """Lag-1 biparameter process of the randomized PITs; noise column ``m`` spans all ``t``."""

    kind = "R2M"
    dim = 2
    structure = "step"

    def __init__(self, ts: TransformSeries, noise: NoiseMatrix):
        if noise.z.shape[0] != ts.T:
            raise DimensionError(f"noise has {noise.z.shape[0]} rows, series has {ts.T}")
        if ts.T < 2:
            raise DomainError("R2M needs T >= 2")
        ur = ts.randomized(noise.z)
        self.M = noise.M
        self.n = ts.T - 1
        self.scale = np.sqrt(self.n)
        self.a = ur[1:].ravel()
        self.b = ur[:-1].ravel()

    def grid(self, u1, u2) -> np.ndarray:
        u1 = np.atleast_1d(np.asarray(u1, dtype=float))
        u2 = np.atleast_1d(np.asarray(u2, dtype=float))
        ia = np.searchsorted(u1, self.a, side="left")
        ib = np.searchsorted(u2, self.b, side="left")
        keep = (ia < u1.size) & (ib < u2.size)
        H = np.zeros((u1.size, u2.size))
        np.add.at(H, (ia[keep], ib[keep]), 1.0)
        N = H.cumsum(axis=0).cumsum(axis=1)
        return (N / self.M - self.n * np.outer(u1, u2)) / self.scale

    def evaluate(self, u1, u2):
        u1, u2 = np.broadcast_arrays(np.asarray(u1, dtype=float), np.asarray(u2, dtype=float))
        f1, f2 = u1.ravel(), u2.ravel()
        N = np.array(
            [np.count_nonzero((self.a <= p) & (self.b <= q)) for p, q in zip(f1, f2)], dtype=float
        )
        out = (N / self.M - self.n * f1 * f2) / self.scale
        return out.reshape(u1.shape) if u1.ndim else float(out[0])


def s1_eval(ts: TransformSeries, u):
    out = S1Process(ts).evaluate(u)
    return float(out[0]) if np.ndim(u) == 0 else out


def s2_eval(ts: TransformSeries, u1, u2):
    return S2Process(ts).evaluate(u1, u2)


def r1m_eval(ts: TransformSeries, noise: NoiseMatrix, u):
    out = R1Process(ts, noise).evaluate(u)
    return float(out[0]) if np.ndim(u) == 0 else out


def r2m_eval(ts: TransformSeries, noise: NoiseMatrix, u1, u2):
    return R2Process(ts, noise).evaluate(u1, u2)


# ---------------------------------------------------------------------------
# Marked residual process for ordered choice (single index)
# ---------------------------------------------------------------------------


@dataclass
class MarkedProcess:
    """``Z_j(y) = T^{-1/2} sum_t 1{index_t <= y} (1{Y_t = j} - P_j(index_t))``.

    The index is ``x_t'beta + rho*Y_{t-1} - tau_1``, i.e. ``X~_t'beta~`` with
    ``X~_t = (x_t', Y_{t-1}, 1)'`` and ``beta~ = (beta', rho, -tau_1)'``.
    """

    index: np.ndarray
    marks: np.ndarray  # T x K residuals
    _order: np.ndarray = field(init=False, repr=False)
    _cum: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        self.index = np.asarray(self.index, dtype=float)
        self.marks = np.asarray(self.marks, dtype=float)
        order = np.argsort(self.index, kind="stable")
        self._order = order
        self._sorted = self.index[order]
        self._cum = np.vstack([np.zeros((1, self.marks.shape[1])), np.cumsum(self.marks[order], axis=0)])

    @classmethod
    def from_model(cls, spec: OrderedChoiceSpec, theta, series: ObservationSeries) -> "MarkedProcess":
        if spec.family != "ordered":
            raise DomainError("the marked process is defined for ordered choice models")
        p = series.p
        beta, rho, tau = spec.split(theta, p)
        lag = series.lagged_y().astype(float) if spec.dynamic else np.zeros(series.T)
        index = series.x @ beta + rho * lag - tau[0]
        cuts = np.concatenate(([-np.inf], tau - tau[0], [np.inf]))
        F = link_cdf(spec.link, cuts[None, :] - index[:, None])
        P = np.diff(F, axis=1)
        onehot = (series.y[:, None] == np.arange(1, spec.K + 1)[None, :]).astype(float)
        return cls(index=index, marks=onehot - P)

    @property
    def T(self) -> int:
        return self.index.size

    @property
    def K(self) -> int:
        return self.marks.shape[1]

    def evaluate(self, j: int, y) -> np.ndarray | float:
        """``Z_j(y)`` for category ``j`` (1-based)."""
        if not 1 <= j <= self.K:
            raise DomainError(f"category {j} outside 1..{self.K}")
        y_arr = np.atleast_1d(np.asarray(y, dtype=float))
        n = np.searchsorted(self._sorted, y_arr, side="right")
        out = self._cum[n, j - 1] / np.sqrt(self.T)
        return float(out[0]) if np.ndim(y) == 0 else out

    def at_index(self) -> np.ndarray:
        """``Z_j(index_t)`` for all ``t`` (rows) and ``j`` (columns)."""
        n = np.searchsorted(self._sorted, self.index, side="right")
        return self._cum[n] / np.sqrt(self.T)

    def statistics(self) -> tuple[float, float]:
        """Pooled ``(CvM, KS)``: ``T^-1 sum_j sum_t Z_j^2`` and ``T^-1 max_j sum_t Z_j^2``."""
        sq = (self.at_index() ** 2).sum(axis=0) / self.T
        return float(sq.sum()), float(sq.max())


def z_marked(series: ObservationSeries, spec: OrderedChoiceSpec, theta, j: int, y):
    return MarkedProcess.from_model(spec, theta, series).evaluate(j, y)
