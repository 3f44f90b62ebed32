"""Singular-integral quadrature on truncated-line grids.

All sums over node pairs are Toeplitz and are evaluated with cached FFT
plans, so one operator application costs O(n log n).

Odd kernels (Hilbert transform, fractional drift) use the subtracted form
``sum_j w_j (theta_j - theta_i) K(x_j - x_i)`` plus a generalized
Euler-Maclaurin (Navot) correction for the diagonal singularity. The even
hypersingular kernel of ``Lambda^gamma`` is handled the same way, with the
correction driven by ``theta''``.
"""

from __future__ import annotations

from functools import lru_cache

import numpy as np
import scipy.fft as sfft
from scipy.special import zeta

from ..core_fields import Field, Grid1D, derivative, exterior_nodes


class ToeplitzPlan:
    """``out_i = sum_j data_j k[j - i]`` for a fixed lag kernel ``k``."""

    def __init__(self, lag_kernel, n: int):
        # lag_kernel(m) for m = -(n-1) .. n-1
        self.n = n
        self.size = sfft.next_fast_len(3 * n - 2, real=True)
        m = np.arange(-(n - 1), n)
        k = np.asarray(lag_kernel(m), dtype=float)
        # convolution with the reversed kernel gives the correlation
        self._kf = sfft.rfft(k[::-1], self.size)

    def __call__(self, data):
        out = sfft.irfft(sfft.rfft(data, self.size) * self._kf, self.size)
        return out[self.n - 1 : 2 * self.n - 1]


def _odd_lag(h: float, s: float):
    def k(m):
        m = np.asarray(m, dtype=float)
        with np.errstate(divide="ignore", invalid="ignore"):
            out = np.sign(m) * np.abs(m * h) ** (-1.0 - s)
        out[m == 0] = 0.0
        return out

    return k


def _even_lag(h: float, gamma: float):
    def k(m):
        m = np.asarray(m, dtype=float)
        with np.errstate(divide="ignore"):
            out = np.abs(m * h) ** (-1.0 - gamma)
        out[m == 0] = 0.0
        return out

    return k


@lru_cache(maxsize=64)
def odd_plan(n: int, h: float, s: float) -> ToeplitzPlan:
    return ToeplitzPlan(_odd_lag(h, s), n)


@lru_cache(maxsize=64)
def even_plan(n: int, h: float, gamma: float) -> ToeplitzPlan:
    return ToeplitzPlan(_even_lag(h, gamma), n)


@lru_cache(maxsize=64)
def _row_sums(kind: str, n: int, h: float, p: float) -> np.ndarray:
    w = np.full(n, h)
    w[0] = w[-1] = 0.5 * h
    plan = odd_plan(n, h, p) if kind == "odd" else even_plan(n, h, p)
    out = plan(w)
    out.setflags(write=False)
    return out


@lru_cache(maxsize=16)
def _exterior(L: float, h: float):
    y, w = exterior_nodes(L, h)
    y.setflags(write=False)
    w.setflags(write=False)
    return y, w


def _far_edge(L: float, h: float) -> float:
    # panel weights sum to the covered length
    return float(L + _exterior(L, h)[1].sum())


def _chunks(n, size=512):
    for a in range(0, n, size):
        yield slice(a, min(n, a + size))


def odd_kernel_sum(f: Field, s: float, corrected: bool = True):
    """``pv int (theta(y) - theta(x)) sgn(y-x)|y-x|^{-1-s} dy`` on the nodes.

    Returns ``(values, tail_bias)`` where ``tail_bias`` bounds the part of
    the exterior contribution dropped by the constant-tail finite part.
    """
    grid = f.grid
    n, h, L = grid.n, grid.h, grid.L
    v = f.values
    w = grid.weights
    plan = odd_plan(n, h, s)
    out = plan(w * v) - v * _row_sums("odd", n, h, s)
    if corrected:
        dv = derivative(v, grid)
        out -= 2.0 * _zeta(s) * h ** (1.0 - s) * dv
    x = grid.x
    bias = 0.0
    if f.tail is None:
        cp, cm = v[-1], v[0]
        out += (cp - v) * _G(L - x, s) - (cm - v) * _G(L + x, s)
        bias = abs(cp - cm)
    else:
        y, wy = _exterior(L, h)
        Tp, Tm = f.tail_values(y), f.tail_values(-y)
        for sl in _chunks(n):
            xs, vs = x[sl, None], v[sl, None]
            out[sl] += ((Tp[None, :] - vs) * (y[None, :] - xs) ** (-1.0 - s)) @ wy
            out[sl] -= ((Tm[None, :] - vs) * (y[None, :] + xs) ** (-1.0 - s)) @ wy
        # beyond the last panel the tail is frozen at its end values
        Y = _far_edge(L, h)
        out += (Tp[-1] - v) * _G(Y - x, s) - (Tm[-1] - v) * _G(Y + x, s)
        bias = abs(Tp[-1] - Tm[-1]) * float(_G(np.array([Y]), s)[0]) if s <= 0 else 0.0
    return out, bias


def _zeta(s: float) -> float:
    return -0.5 if s == 0 else float(zeta(s))


def _G(a, s):
    """Finite part of ``int_a^inf r^{-1-s} dr``; zero where ``a = 0``."""
    a = np.asarray(a, dtype=float)
    out = np.zeros_like(a)
    pos = a > 0
    if s == 0:
        out[pos] = -np.log(a[pos])
    else:
        out[pos] = a[pos] ** (-s) / s
    return out


class _HalfLinePlan:
    """Cached Toeplitz and Hankel kernels on the half grid ``y_j = j h``."""

    def __init__(self, m: int, h: float):
        self.w = np.full(m, h)
        self.w[0] = self.w[-1] = 0.5 * h
        self.m = m
        self.toe = odd_plan(m, h, 0.0)
        self.size = sfft.next_fast_len(3 * m, real=True)
        kk = np.zeros(2 * m)
        kk[1:] = 1.0 / (np.arange(1, 2 * m) * h)
        self._kf = sfft.rfft(kk, self.size)
        self.toe_w = self.toe(self.w)
        self.hank_w = self.hank(self.w)

    def hank(self, d):
        m = self.m
        return sfft.irfft(sfft.rfft(d[::-1], self.size) * self._kf, self.size)[m - 1 : 2 * m - 1]


@lru_cache(maxsize=16)
def _half_plan(m: int, h: float) -> _HalfLinePlan:
    return _HalfLinePlan(m, h)


def even_hilbert_sum(f: Field):
    """``2x int_0^inf (theta(y)-theta(x))/(y^2-x^2) dy`` for even fields.

    Evaluated on the half grid ``y >= 0`` as a Toeplitz part ``1/(y-x)`` and
    a Hankel part ``1/(y+x)``; the result is mirrored to be exactly odd.
    """
    grid = f.grid
    n, h, L = grid.n, grid.h, grid.L
    o = grid.origin
    v = f.values[o:]
    x = grid.x[o:]
    m = v.size
    plan = _half_plan(m, h)
    dv = derivative(f.values, grid)[o:]
    part1 = plan.toe(plan.w * v) - v * plan.toe_w + h * dv
    # Hankel part sum_j w_j (v_j - v_i)/(y_j + x_i) with y_j + x_i = (i+j)h
    part2 = plan.hank(plan.w * v) - v * plan.hank_w
    part2[0] = 0.0
    half = part1 - part2
    if f.tail is None:
        c = f.values[-1]
        with np.errstate(divide="ignore", invalid="ignore"):
            ext = (c - v) * np.log((L + x) / (L - x))
        ext[-1] = 0.0
        ext[0] = 0.0
    else:
        y, wy = _exterior(L, h)
        T = f.tail_values(y)
        ext = np.zeros(m)
        for sl in _chunks(m):
            xs, vs = x[sl, None], v[sl, None]
            ext[sl] = ((T[None, :] - vs) * (1.0 / (y[None, :] - xs) - 1.0 / (y[None, :] + xs))) @ wy
    half = half + ext
    half[0] = 0.0
    out = np.empty(n)
    out[o:] = half
    out[:o] = -half[1:][::-1]
    return out


def frac_laplacian_sum(f: Field, gamma: float):
    """``pv int (theta(x) - theta(y)) |x-y|^{-1-gamma} dy`` on the nodes."""
    grid = f.grid
    n, h, L = grid.n, grid.h, grid.L
    v = f.values
    plan = even_plan(n, h, gamma)
    out = v * _row_sums("even", n, h, gamma) - plan(grid.weights * v)
    d2 = derivative(v, grid, order=2)
    out += _zeta(gamma - 1.0) * h ** (2.0 - gamma) * d2
    x = grid.x
    if f.tail is None:
        cp, cm = v[-1], v[0]
        with np.errstate(divide="ignore", invalid="ignore"):
            out += np.where(L - x > 0, (v - cp) * (L - x) ** (-gamma), 0.0) / gamma
            out += np.where(L + x > 0, (v - cm) * (L + x) ** (-gamma), 0.0) / gamma
    else:
        y, wy = _exterior(L, h)
        Tp, Tm = f.tail_values(y), f.tail_values(-y)
        for sl in _chunks(n):
            xs, vs = x[sl, None], v[sl, None]
            out[sl] += ((vs - Tp[None, :]) * (y[None, :] - xs) ** (-1.0 - gamma)) @ wy
            out[sl] += ((vs - Tm[None, :]) * (y[None, :] + xs) ** (-1.0 - gamma)) @ wy
        Y = _far_edge(L, h)
        out += ((v - Tp[-1]) * (Y - x) ** (-gamma) + (v - Tm[-1]) * (Y + x) ** (-gamma)) / gamma
    return out


def frac_laplacian_diagonal(grid: Grid1D, gamma: float) -> np.ndarray:
    """Diagonal coefficient of the discrete ``pv`` sum (used for stability bounds)."""
    n, h, L = grid.n, grid.h, grid.L
    x = grid.x
    d = np.array(_row_sums("even", n, h, gamma)) + 2.0 * abs(_zeta(gamma - 1.0)) * h ** (-gamma)
    with np.errstate(divide="ignore"):
        d += np.where(L - x > 0, (L - x) ** (-gamma), 0.0) / gamma
        d += np.where(L + x > 0, (L + x) ** (-gamma), 0.0) / gamma
    return d
