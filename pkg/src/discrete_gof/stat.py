"""Exact Kolmogorov-Smirnov and Cramer-von Mises functionals.

The S-processes are piecewise linear (1D) or piecewise bilinear (2D) on the
breakpoint grid, so the sup is attained at knots (cell corners) and the
squared integral has a closed form through the finite-element mass matrix.
The R-processes are counting step functions minus ``u`` (``n u1 u2``); on each
constancy cell both functionals are evaluated analytically.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np
from numba import njit

from .errors import DomainError
from .process import EmpiricalProcess, R1Process, R2Process, S1Process, S2Process

GRID_SWITCH = 1024
GRID_SIZE = 101
_GAUSS_NODES, _GAUSS_WEIGHTS = np.polynomial.legendre.leggauss(6)


@dataclass(frozen=True)
class TestStatistic:
    norm: str  # "KS" or "CvM"
    dimension: int
    value: float
    argmax: tuple | None = None

    __test__ = False  # keep pytest from collecting this class

    def __post_init__(self):
        if self.value < 0:
            raise DomainError("statistics are nonnegative")


@dataclass(frozen=True)
class PiecewiseLinear:
    """Continuous piecewise linear function through ``(knots, values)``."""

    knots: np.ndarray
    values: np.ndarray

    def __call__(self, u):
        return np.interp(u, self.knots, self.values)


@dataclass(frozen=True)
class PiecewiseBilinear:
    """Tensor-product bilinear interpolant of corner values ``V[i, j]`` at ``(x[i], y[j])``."""

    x: np.ndarray
    y: np.ndarray
    values: np.ndarray


def _as_linear(process) -> PiecewiseLinear:
    if isinstance(process, PiecewiseLinear):
        return process
    if isinstance(process, S1Process):
        return PiecewiseLinear(*process.knot_values())
    raise DomainError(f"expected a 1D piecewise linear process, got {type(process).__name__}")


def _as_bilinear(process, mode: str = "exact", grid_size: int = GRID_SIZE) -> PiecewiseBilinear:
    if isinstance(process, PiecewiseBilinear):
        return process
    if isinstance(process, S2Process):
        b = process.breakpoints if mode == "exact" else np.linspace(0.0, 1.0, grid_size)
        return PiecewiseBilinear(b, b, process.grid(b, b))
    raise DomainError(f"expected a 2D piecewise bilinear process, got {type(process).__name__}")


def _weighted_gauss_1d(f: Callable, lo: np.ndarray, hi: np.ndarray, weight: Callable) -> float:
    half = (hi - lo)[:, None] / 2
    nodes = (lo + hi)[:, None] / 2 + half * _GAUSS_NODES[None, :]
    return float(np.sum(half * _GAUSS_WEIGHTS[None, :] * f(nodes) ** 2 * weight(nodes)))


# ---------------------------------------------------------------------------
# One dimension
# ---------------------------------------------------------------------------


def ks_1d(process) -> TestStatistic:
    """``sup_u |process(u)|``."""
    if isinstance(process, R1Process):
        return _ks_step_1d(process)
    f = _as_linear(process)
    a = np.abs(f.values)
    i = int(np.argmax(a))
    return TestStatistic("KS", 1, float(a[i]), (float(f.knots[i]),))


def cvm_1d(process, weight: Callable | None = None) -> TestStatistic:
    """``int_0^1 process(u)^2 w(u) du``; Lebesgue unless ``weight`` is a density."""
    if isinstance(process, R1Process):
        return _cvm_step_1d(process, weight)
    f = _as_linear(process)
    x, v = f.knots, f.values
    if weight is None:
        h = np.diff(x)
        a, b = v[:-1], v[1:]
        value = float(np.sum(h * (a * a + a * b + b * b)) / 3.0)
    else:
        value = _weighted_gauss_1d(f, x[:-1], x[1:], weight)
    return TestStatistic("CvM", 1, max(value, 0.0))


def _step_knots_1d(proc: R1Process):
    """Distinct jump points with counts at and strictly below them."""
    pts, counts = np.unique(proc.points, return_counts=True)
    at = np.cumsum(counts)
    return pts, at - counts, at


def _ks_step_1d(proc: R1Process) -> TestStatistic:
    N = proc.T * proc.M
    pts, below, at = _step_knots_1d(proc)
    right = at / N - pts  # value at the jump
    left = pts - below / N  # minus the left limit
    cand = np.maximum(np.abs(right), left)
    if cand.size == 0:
        return TestStatistic("KS", 1, 0.0, (0.0,))
    i = int(np.argmax(cand))
    return TestStatistic("KS", 1, float(proc.scale * cand[i]), (float(pts[i]),))


def _cvm_step_1d(proc: R1Process, weight: Callable | None) -> TestStatistic:
    N = proc.T * proc.M
    pts, _, at = _step_knots_1d(proc)
    lo = np.concatenate(([0.0], pts))
    hi = np.concatenate((pts, [1.0]))
    level = np.concatenate(([0.0], at / N))
    if lo[0] == hi[0]:
        lo, hi, level = lo[1:], hi[1:], level[1:]
    if weight is None:
        value = np.sum(((hi - level) ** 3 - (lo - level) ** 3) / 3.0)
    else:
        half = (hi - lo)[:, None] / 2
        nodes = (lo + hi)[:, None] / 2 + half * _GAUSS_NODES[None, :]
        value = np.sum(half * _GAUSS_WEIGHTS * (level[:, None] - nodes) ** 2 * weight(nodes))
    return TestStatistic("CvM", 1, float(max(proc.T * value, 0.0)))


# ---------------------------------------------------------------------------
# Two dimensions
# ---------------------------------------------------------------------------


def ks_2d(process) -> TestStatistic:
    """``sup |process(u1, u2)|`` over the unit square (ties go to the lexicographically smallest corner)."""
    if isinstance(process, R2Process):
        return _ks_step_2d(process)
    f = _as_bilinear(process)
    a = np.abs(f.values)
    i, j = np.unravel_index(int(np.argmax(a)), a.shape)
    return TestStatistic("KS", 2, float(a[i, j]), (float(f.x[i]), float(f.y[j])))


def _mass_apply(x: np.ndarray, V: np.ndarray) -> np.ndarray:
    """``M @ V`` for the 1D linear-element mass matrix on knots ``x``."""
    h = np.diff(x)
    out = np.zeros_like(V)
    out[:-1] += (h / 3)[:, None] * V[:-1] + (h / 6)[:, None] * V[1:]
    out[1:] += (h / 3)[:, None] * V[1:] + (h / 6)[:, None] * V[:-1]
    return out


def cvm_2d(
    process, weight: Callable | None = None, mode: str = "auto", grid_size: int = GRID_SIZE
) -> TestStatistic:
    """``int int process^2 w``.

    ``mode`` is ``"exact"``, ``"grid"`` (bilinear interpolant on a uniform
    ``grid_size x grid_size`` grid, 101 by default) or ``"auto"`` which
    switches to the grid once the breakpoint count exceeds 1024.
    """
    if isinstance(process, R2Process):
        if weight is not None:
            raise DomainError("weighted CvM is not available for the 2D randomized process")
        return _cvm_step_2d(process)
    if mode == "auto":
        n = process.breakpoints.size if isinstance(process, S2Process) else 0
        mode = "grid" if n > GRID_SWITCH else "exact"
    if mode not in ("exact", "grid"):
        raise DomainError(f"unknown mode {mode!r}")
    f = _as_bilinear(process, mode, grid_size)
    V = f.values
    if weight is None:
        # int int V^2 = sum((Mx V) * (V My)) for tensor linear elements
        value = float(np.sum(_mass_apply(f.x, V) * _mass_apply(f.y, V.T).T))
    else:
        value = _weighted_gauss_2d(f, weight)
    return TestStatistic("CvM", 2, max(value, 0.0))


def _weighted_gauss_2d(f: PiecewiseBilinear, weight: Callable) -> float:
    gx, gw = _GAUSS_NODES, _GAUSS_WEIGHTS
    s = (gx + 1) / 2
    w = gw / 2
    hx, hy = np.diff(f.x), np.diff(f.y)
    V = f.values
    total = 0.0
    for a in range(s.size):
        for b in range(s.size):
            val = (
                V[:-1, :-1] * (1 - s[a]) * (1 - s[b])
                + V[1:, :-1] * s[a] * (1 - s[b])
                + V[:-1, 1:] * (1 - s[a]) * s[b]
                + V[1:, 1:] * s[a] * s[b]
            )
            u1 = (f.x[:-1] + s[a] * hx)[:, None]
            u2 = (f.y[:-1] + s[b] * hy)[None, :]
            total += w[a] * w[b] * np.sum(hx[:, None] * hy[None, :] * val**2 * weight(u1, u2))
    return float(total)


@njit(cache=True)
def _step_sweep(x, y, ia, ib, M, n):
    """Visit every constancy cell of ``N(u1, u2)/M - n u1 u2`` once.

    ``N(x_i, y_j) = #{a <= x_i, b <= y_j}`` is constant on
    ``[x_i, x_{i+1}) x [y_j, y_{j+1})``; points arrive sorted by row ``ia``.
    Returns the sup of the absolute deviation with its lower-left corner and
    the exact integral of the squared deviation.
    """
    nx, ny = x.size, y.size
    y_next = np.empty(ny)
    y_next[:-1] = y[1:]
    y_next[-1] = 1.0
    dy = y_next - y
    dy2 = y_next * y_next - y * y
    qy = np.sum(y_next**3 - y**3) / 3.0
    col = np.zeros(ny)
    best = -1.0
    bi = 0
    bj = 0
    total = 0.0
    k = 0
    npts = ia.size
    for i in range(nx):
        while k < npts and ia[k] == i:
            col[ib[k]] += 1.0
            k += 1
        xl = x[i]
        xh = x[i + 1] if i + 1 < nx else 1.0
        a_lo = n * xl
        a_hi = n * xh
        hx = xh - xl
        sx = n * (xh * xh - xl * xl) / 2.0
        c = 0.0
        row = 0.0
        for j in range(ny):
            c += col[j]
            level = c / M
            up = abs(level - a_lo * y[j])
            lo = a_hi * y_next[j] - level
            cand = up if up > lo else lo
            if cand > best:
                best = cand
                bi = i
                bj = j
            row += level * (level * hx * dy[j] - sx * dy2[j])
        total += row + n * n * (xh**3 - xl**3) / 3.0 * qy
    return best, bi, bj, total


def _step_norms_2d(proc: R2Process) -> tuple[TestStatistic, TestStatistic]:
    """Both norms from a single sweep of the count matrix (cached on the handle)."""
    cached = getattr(proc, "_norms", None)
    if cached is not None:
        return cached
    x = np.unique(np.concatenate(([0.0], proc.a, [1.0])))
    y = np.unique(np.concatenate(([0.0], proc.b, [1.0])))
    ia = np.searchsorted(x, proc.a)
    ib = np.searchsorted(y, proc.b)
    order = np.argsort(ia, kind="stable")
    best, i, j, total = _step_sweep(x, y, ia[order], ib[order], float(proc.M), float(proc.n))
    out = (
        TestStatistic("KS", 2, best / proc.scale, (float(x[i]), float(y[j]))),
        TestStatistic("CvM", 2, max(total / proc.n, 0.0)),
    )
    proc._norms = out
    return out


def _ks_step_2d(proc: R2Process) -> TestStatistic:
    return _step_norms_2d(proc)[0]


def _cvm_step_2d(proc: R2Process) -> TestStatistic:
    return _step_norms_2d(proc)[1]


def ks(process: EmpiricalProcess) -> TestStatistic:
    return ks_2d(process) if process.dim == 2 else ks_1d(process)


def cvm(process: EmpiricalProcess, weight: Callable | None = None, mode: str = "auto") -> TestStatistic:
    return cvm_2d(process, weight, mode) if process.dim == 2 else cvm_1d(process, weight)
