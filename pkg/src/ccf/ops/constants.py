"""Analytic and derived constants, each tagged with how it was obtained."""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from functools import lru_cache
from typing import Optional

import numpy as np
from scipy.integrate import quad
from scipy.optimize import minimize_scalar

from .operators import drift_prefactor, riesz_constant

CLOSED_FORM = "closed-form"
DERIVED = "derived-oracle"
MEASURED = "measured"


@dataclass(frozen=True)
class ConstantValue:
    name: str
    value: float
    provenance: str
    oracle: Optional[float] = None
    note: str = ""

    def as_dict(self) -> dict:
        return {"name": self.name, "value": self.value, "provenance": self.provenance,
                "oracle": self.oracle, "note": self.note}


# --------------------------------------------------------------------------
# weights of the Lyapunov functional


def eta(x, alpha: float, variant: str = "inviscid"):
    """Weight ``eta``: ``x^{-alpha}`` (inviscid) or ``x^{-1-alpha}`` (dissipative)
    on ``(0, 1)`` and ``x^{-2-alpha}`` beyond."""
    x = np.asarray(x, dtype=float)
    inner = -alpha if variant == "inviscid" else -1.0 - alpha
    with np.errstate(divide="ignore"):
        return np.where(x < 1.0, x**inner, x ** (-2.0 - alpha))


def phi(x, alpha: float, variant: str = "inviscid"):
    """``phi(x) = int_x^inf eta``, so that ``eta = -phi'`` away from ``x = 1``."""
    x = np.asarray(x, dtype=float)
    outer = x ** (-1.0 - alpha) / (1.0 + alpha)
    with np.errstate(divide="ignore"):
        if variant == "inviscid":
            inner = 1.0 / (1.0 + alpha) + (1.0 - x ** (1.0 - alpha)) / (1.0 - alpha)
        else:
            inner = 1.0 / (1.0 + alpha) + (x ** (-alpha) - 1.0) / alpha
    return np.where(x < 1.0, inner, outer)


def c_alpha_exact(alpha: float, s: float = 0.0, variant: str = "inviscid", kmax: int = 1000) -> float:
    """``sum_k phi(2^k)^2 / (eta(2^{k+1}) 2^{-k s})`` summed until negligible."""
    if not 0.0 < alpha < 1.0:
        raise ValueError("alpha must lie in (0, 1)")
    if alpha <= abs(s):
        raise ValueError("the dyadic sum diverges unless alpha > |s|")
    k = np.arange(-kmax, kmax + 1, dtype=float)
    with np.errstate(all="ignore"):
        terms = phi(2.0**k, alpha, variant) ** 2 / (eta(2.0 ** (k + 1), alpha, variant) * 2.0 ** (-k * s))
    terms = terms[np.isfinite(terms)]
    return float(np.sum(np.sort(terms)))


def c_alpha_formula(alpha: float) -> float:
    """Closed-form bound ``2^{1+a}/(1-a^2) sum_{k<0} 2^{ak} + 2^{2+a}/(1+a)^2 sum_{k>=0} 2^{-ak}``."""
    if not 0.0 < alpha < 1.0:
        raise ValueError("alpha must lie in (0, 1)")
    neg = 2.0 ** (-alpha) / (1.0 - 2.0 ** (-alpha))
    pos = 1.0 / (1.0 - 2.0 ** (-alpha))
    return 2.0 ** (1 + alpha) / (1 - alpha**2) * neg + 2.0 ** (2 + alpha) / (1 + alpha) ** 2 * pos


def c_alpha_formula_direct(alpha: float, kmax: int = 4000) -> float:
    """The same bound by direct summation of the two geometric series."""
    k = np.arange(1, kmax + 1, dtype=float)
    neg = np.sum(2.0 ** (-alpha * k))
    pos = np.sum(2.0 ** (-alpha * np.arange(0, kmax + 1, dtype=float)))
    return 2.0 ** (1 + alpha) / (1 - alpha**2) * neg + 2.0 ** (2 + alpha) / (1 + alpha) ** 2 * pos


# --------------------------------------------------------------------------
# barrier constant


def _c0_integrand(z):
    return (np.sqrt(z) - 1.0) / (z * z - 1.0)


def c0_quadrature() -> float:
    """``c0 = (2/pi) int_1^2 (z^{1/2} - 1)/(z^2 - 1) dz``."""
    return 2.0 / np.pi * quad(_c0_integrand, 1.0, 2.0, epsabs=1e-14, epsrel=1e-13)[0]


def c0_closed_form() -> float:
    """Substituting ``z = w^2`` gives ``(2/pi)[-ln(1+w) + ln(1+w^2)/2 + arctan w]`` on ``[1, sqrt 2]``."""

    def F(w):
        return -np.log1p(w) + 0.5 * np.log1p(w * w) + np.arctan(w)

    return float(2.0 / np.pi * (F(np.sqrt(2.0)) - F(1.0)))


def drift_ratio(s: float) -> float:
    """``s / ((1 - s) c_s)``, bounded between roughly 1/4 and 1/2 on ``(-1, 1)``."""
    return drift_prefactor(s) / (1.0 - s)


# --------------------------------------------------------------------------
# exact-solution constants


def _semicircle_amplitude(n: int) -> float:
    from ..core_fields import make_grid
    from ..exact_solutions import expanding_semicircle, pde_residual

    grid = make_grid("line", n, L=2.0)
    region = lambda x: np.abs(x) <= 0.9

    def loss(C):
        r = pde_residual(expanding_semicircle(C), 1.0, grid)
        m = r.valid & region(grid.x)
        return float(np.mean(r.field.values[m] ** 2))

    return float(minimize_scalar(loss, bounds=(0.25, 4.0), method="bounded", options={"xatol": 1e-8}).x)


def _cusp_speed(n: int) -> float:
    from ..core_fields import make_grid
    from ..exact_solutions import pde_residual, translating_cusp

    grid = make_grid("line", n, L=10.0)
    region = lambda x: (np.abs(x) >= 0.1) & (np.abs(x) <= 8.0)

    def loss(C1):
        r = pde_residual(translating_cusp(C1), 0.3, grid)
        m = r.valid & region(grid.x)
        return float(np.mean(r.field.values[m] ** 2))

    return float(minimize_scalar(loss, bounds=(0.0, 2.0), method="bounded", options={"xatol": 1e-8}).x)


@dataclass(frozen=True)
class Constants:
    """Table of constants with provenance; ``c_s`` is available as a method."""

    values: dict = field(default_factory=dict)

    def __getitem__(self, name: str) -> ConstantValue:
        return self.values[name]

    def value(self, name: str) -> float:
        return self.values[name].value

    @staticmethod
    def c_s(s: float) -> float:
        return riesz_constant(s)

    @property
    def A(self) -> float:
        return self.value("A")

    @property
    def c0(self) -> float:
        return self.value("c0")

    def c_alpha(self, alpha: float = 0.5, s: float = 0.0, variant: str = "inviscid") -> float:
        """Exact dyadic constant used by the certificates."""
        return c_alpha_exact(alpha, s, variant)

    def with_value(self, cv: ConstantValue) -> "Constants":
        vals = dict(self.values)
        vals[cv.name] = cv
        return replace(self, values=vals)

    def table(self) -> list:
        return [self.values[k].as_dict() for k in sorted(self.values)]


def _put(vals: dict, name, value, prov, oracle=None, note=""):
    vals[name] = ConstantValue(name, float(value), prov, None if oracle is None else float(oracle), note)


def stationary_holder_constant(s: float = 0.0) -> float:
    """Hoelder constant for stationary monotone solutions of ``u theta_x = f``.

    ``2(1 + sqrt 2)/log 3`` at ``s = 0``; ``8 / ((1-s)(1-3^{-s})/s)^{1/2}`` otherwise.
    """
    if s == 0.0:
        return 2.0 * (1.0 + np.sqrt(2.0)) / np.log(3.0)
    return 8.0 / np.sqrt((1.0 - s) * (1.0 - 3.0 ** (-s)) / s)


def local_flux_constant(s: float = 0.0) -> float:
    """Prefactor of the dyadic flux bound on ``(2^k, 2^{k+1})``.

    ``log 3/(4 pi)`` at ``s = 0``, ``(1-s)(1-3^{-s})/(16 s)`` otherwise.
    """
    if s == 0.0:
        return np.log(3.0) / (4.0 * np.pi)
    return (1.0 - s) * (1.0 - 3.0 ** (-s)) / (16.0 * s)


@lru_cache(maxsize=1)
def analytic_constants() -> Constants:
    """Constants that need no solver run (cheap; used by the certificates)."""
    vals: dict = {}
    _put(vals, "c_alpha_formula(0.5)", c_alpha_formula(0.5), CLOSED_FORM, c_alpha_formula_direct(0.5),
         "closed bound; oracle is the direct geometric summation")
    _put(vals, "c_alpha(0.5)", c_alpha_exact(0.5), DERIVED, c_alpha_formula(0.5),
         "exact dyadic sum; oracle column holds the closed bound it is compared with")
    for s in (-0.5, 0.5):
        _put(vals, f"c_s({s:g})", riesz_constant(s), CLOSED_FORM, None, "Riesz potential normalisation")
        _put(vals, f"drift_ratio({s:g})", drift_ratio(s), CLOSED_FORM)
    _put(vals, "c0", c0_quadrature(), DERIVED, c0_closed_form(), "quadrature; oracle is the closed form")
    _put(vals, "A", 4.0 / c0_quadrature(), DERIVED, 4.0 / c0_closed_form(), "A = 4/c0")
    _put(vals, "pointwise_hilbert", 1.0 / np.pi, CLOSED_FORM, None, "-H theta(x2) >= k log(..) dtheta")
    _put(vals, "local_flux(0)", local_flux_constant(0.0), CLOSED_FORM, None, "log 3/(4 pi)")
    _put(vals, "interpolation", 3.0, CLOSED_FORM, 1.0 + 1.0 / np.pi,
         "|f|_2^2 <= k |f|_1 |f|_H; oracle is the value the proof actually reaches")
    _put(vals, "stationary_holder(0)", stationary_holder_constant(0.0), CLOSED_FORM)
    _put(vals, "log_modulus", np.sqrt(np.pi / 2.0), DERIVED, None,
         "theta(x2)-theta(x1) <= k |theta|_H log(x1/(x1-x2))^{-1/2}, four symmetric quadrants")
    _put(vals, "lambda_b_lower", 1.0 / (2.0 * np.pi), CLOSED_FORM)
    return Constants(vals)


@lru_cache(maxsize=4)
def derive_constants(n: int = 8193) -> Constants:
    """Every constant, including those fitted from exact-solution residuals.

    ``eps0`` is attached later by the decay study.
    """
    vals = dict(analytic_constants().values)
    _put(vals, "C_semicircle", _semicircle_amplitude(n), DERIVED, 1.0, "residual minimisation; oracle from H theta = C x/t")
    _put(vals, "C1_cusp", _cusp_speed(n), DERIVED, 0.5, "residual minimisation; oracle from H[-|x|^1/2] = -sgn(x)|x|^1/2")
    return Constants(vals)
