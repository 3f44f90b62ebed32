"""Closed-form reference solutions and a pointwise PDE residual evaluator.

* Expanding semicircle ``theta(t, x) = -C (1 - x^2/t^2)_+^{1/2}``, ``t > 0``.
  Inside the support ``H theta = C x / t``, so ``theta_t + H theta theta_x``
  vanishes exactly when ``C = 1``.
* Shrinking semicircle ``theta(t, x) = C (1 - x^2/t^2)_+^{1/2}``, ``t < 0``
  (time reversal ``t -> -t``, ``theta -> -theta``).
* Translating cusp ``theta(t, x) = -|x|^{1/2} - C_1 t``. Since
  ``H[-|x|^{1/2}] = -sgn(x)|x|^{1/2}``, the transport term equals ``1/2`` away
  from the origin and ``C_1 = 1/2``.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .core_fields import Field, Grid1D, Symmetry, derivative, rescale
from .ops import ResolutionWarning, drift_velocity, frac_laplacian

SEMICIRCLE_AMPLITUDE = 1.0
CUSP_SPEED = 0.5
EXCLUSION_CELLS = 8


class SingularSetError(ValueError):
    """Raised when a solution is evaluated where it is not defined."""


def semicircle(t, x, sign: str = "expanding", C: float = SEMICIRCLE_AMPLITUDE):
    """Expanding (``t > 0``) or shrinking (``t < 0``) semicircle."""
    if t == 0:
        raise SingularSetError("semicircle is singular at t = 0")
    if sign == "expanding":
        if t < 0:
            raise SingularSetError("expanding semicircle needs t > 0")
        return -C * np.sqrt(np.clip(1.0 - (np.asarray(x, dtype=float) / t) ** 2, 0.0, None))
    if sign == "shrinking":
        if t > 0:
            raise SingularSetError("shrinking semicircle needs t < 0")
        return -semicircle(-t, x, "expanding", C)
    raise ValueError(f"unknown semicircle sign {sign!r}")


def cusp(t, x, C1: float = CUSP_SPEED):
    """``-|x|^{1/2} - C_1 t``."""
    return -np.sqrt(np.abs(np.asarray(x, dtype=float))) - C1 * t


@dataclass(frozen=True)
class ReferenceSolution:
    """A space-time solution with its singular set.

    ``valid(t, x)`` is a boolean mask of points at distance more than
    ``band`` from the singular set; evaluation through :meth:`__call__` with
    ``strict=True`` refuses points outside it.
    """

    kind: str
    C: float = SEMICIRCLE_AMPLITUDE
    C1: float = CUSP_SPEED
    a: float = 1.0
    b: float = 1.0
    s: float = 0.0
    base: Optional["ReferenceSolution"] = None
    symmetry: Symmetry = Symmetry.EVEN

    def fn(self) -> Callable:
        if self.kind == "expanding":
            return lambda t, x: semicircle(t, x, "expanding", self.C)
        if self.kind == "shrinking":
            return lambda t, x: semicircle(t, x, "shrinking", self.C)
        if self.kind == "cusp":
            return lambda t, x: cusp(t, x, self.C1)
        if self.kind == "scaled":
            return rescale(self.base.fn(), a=self.a, b=self.b, s=self.s)
        raise ValueError(f"unknown solution kind {self.kind!r}")

    def singular_points(self, t: float) -> np.ndarray:
        if self.kind in ("expanding", "shrinking"):
            return np.array([-abs(t), abs(t)])
        if self.kind == "cusp":
            return np.array([0.0])
        # scaled: theta(a t, b x) is singular where b x hits the base set
        return self.base.singular_points(self.a * t) / self.b

    def valid(self, t: float, x, band: float = 0.0) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        d = np.min(np.abs(x[..., None] - self.singular_points(t)[None, :]), axis=-1)
        return d > band

    def __call__(self, t, x, strict: bool = False):
        if strict and not np.all(self.valid(t, x)):
            raise SingularSetError("evaluation on the singular set")
        return self.fn()(t, x)

    def field(self, grid: Grid1D, t: float) -> Field:
        fn = self.fn()
        tail = None if grid.periodic else (lambda y: fn(t, y))
        return Field(grid, fn(t, grid.x), self.symmetry, tail)


def expanding_semicircle(C: float = SEMICIRCLE_AMPLITUDE) -> ReferenceSolution:
    return ReferenceSolution("expanding", C=C)


def shrinking_semicircle(C: float = SEMICIRCLE_AMPLITUDE) -> ReferenceSolution:
    return ReferenceSolution("shrinking", C=C)


def translating_cusp(C1: float = CUSP_SPEED) -> ReferenceSolution:
    return ReferenceSolution("cusp", C1=C1)


def scaled(base: ReferenceSolution, a: float = 1.0, b: float = 1.0, s: float = 0.0) -> ReferenceSolution:
    return ReferenceSolution("scaled", a=a, b=b, s=s, base=base, symmetry=base.symmetry)


@dataclass(frozen=True)
class Residual:
    """Pointwise residual with the mask of nodes it is valid on."""

    field: Field
    valid: np.ndarray
    t: float
    band: float

    def max(self, region=None) -> float:
        m = self.valid.copy()
        if region is not None:
            m &= region(self.field.grid.x)
        return float(np.max(self.field.values[m])) if m.any() else 0.0


def pde_residual(solution, t: float, grid: Grid1D, spec=None, dt: Optional[float] = None,
                 band_cells: int = EXCLUSION_CELLS) -> Residual:
    """``|theta_t + (Lambda^s H theta) theta_x + kappa Lambda^gamma theta - eps theta_xx|``.

    ``solution`` is a :class:`ReferenceSolution` or a callable ``fn(t, x)``;
    for plain callables no singular set is known and every node is valid.
    Time derivatives are centred with step ``dt`` (default ``h/16``);
    nodes within ``band_cells`` cells of the singular set are excluded.

    Raises
    ------
    SingularSetError
        If the centred stencil in time crosses the singular time ``t = 0``.
    """
    from .solver import OperatorSpec

    spec = spec or OperatorSpec()
    fn = solution.fn() if isinstance(solution, ReferenceSolution) else solution
    dt = grid.h / 16 if dt is None else dt
    if isinstance(solution, ReferenceSolution) and solution.kind in ("expanding", "shrinking"):
        if abs(t) <= dt:
            raise SingularSetError("time stencil crosses t = 0")
    tail = None if grid.periodic else (lambda y: fn(t, y))
    f = Field(grid, fn(t, grid.x), Symmetry.NONE, tail)
    theta_t = (fn(t + dt, grid.x) - fn(t - dt, grid.x)) / (2 * dt)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", ResolutionWarning)
        u = drift_velocity(f, spec.s, spec.backend).values
        r = theta_t + u * derivative(f.values, grid)
        if spec.kappa > 0:
            r = r + spec.kappa * frac_laplacian(f, spec.gamma, spec.backend).values
    if spec.eps > 0:
        r = r - spec.eps * derivative(f.values, grid, order=2)
    band = band_cells * grid.h
    if isinstance(solution, ReferenceSolution):
        valid = solution.valid(t, grid.x, band)
    else:
        valid = np.ones(grid.n, dtype=bool)
    if not grid.periodic:
        # one-sided stencils at the truncation boundary
        valid[:band_cells] = False
        valid[-band_cells:] = False
    return Residual(Field(grid, np.abs(r)), valid, t, band)
