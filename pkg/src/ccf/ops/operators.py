"""Hilbert transform, fractional Laplacian and fractional drift velocity.

Sign conventions: ``H`` has Fourier multiplier ``i sgn(xi)`` (so
``H cos = -sin`` and ``H d/dx = -Lambda``), ``Lambda^gamma`` has multiplier
``|xi|^gamma`` and the drift ``Lambda^s H`` has ``i sgn(xi)|xi|^s``.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.special import gamma as Gamma

from ..core_fields import Field, Symmetry, Topology, dissipation_parts
from . import quadrature as quad

UNRESOLVED_FRACTION = 0.01


class ResolutionWarning(UserWarning):
    """Raised when a spectral field carries energy above the dealiasing cut."""


@dataclass(frozen=True)
class OperatorBackend:
    """How a nonlocal operator is discretised.

    Parameters
    ----------
    kind : {"spectral", "quadrature"}
        Spectral multipliers are only available on periodic grids.
    dealias : float
        Fraction of the spectrum kept by the spectral backend.
    pv_rule : {"auto", "corrected", "skip_node", "even"}
        Principal-value rule for the quadrature backend. ``"auto"`` uses the
        even formula for even fields and the corrected node-skipping rule
        otherwise; ``"skip_node"`` omits the diagonal correction.
    """

    kind: str = "quadrature"
    dealias: float = 2.0 / 3.0
    pv_rule: str = "auto"

    def __post_init__(self):
        if self.kind not in ("spectral", "quadrature"):
            raise ValueError(f"unknown backend kind {self.kind!r}")
        if self.pv_rule not in ("auto", "corrected", "skip_node", "even"):
            raise ValueError(f"unknown pv rule {self.pv_rule!r}")
        if not 0 < self.dealias <= 1:
            raise ValueError("dealias fraction must lie in (0, 1]")


SPECTRAL = OperatorBackend("spectral")
QUADRATURE = OperatorBackend("quadrature")


def default_backend(f: Field) -> OperatorBackend:
    return SPECTRAL if f.grid.topology == Topology.PERIODIC else QUADRATURE


def _resolve(f: Field, backend: Optional[OperatorBackend]) -> OperatorBackend:
    backend = backend or default_backend(f)
    if backend.kind == "spectral" and f.grid.topology != Topology.PERIODIC:
        raise ValueError("spectral backend requires a periodic grid")
    return backend


def riesz_constant(s: float) -> float:
    """``c_s`` in ``Lambda^s H theta = (s/c_s) pv int theta(y)/((y-x)|y-x|^s) dy``."""
    if s == 0:
        return np.inf
    return float(np.sqrt(np.pi) * 2.0 ** (1.0 - s) * Gamma((1.0 - s) / 2.0) / Gamma(s / 2.0))


def drift_prefactor(s: float) -> float:
    """``s/c_s``, continuous at ``s = 0`` where it equals ``1/pi``."""
    if s == 0:
        return 1.0 / np.pi
    return float(s * Gamma(s / 2.0) / (np.sqrt(np.pi) * 2.0 ** (1.0 - s) * Gamma((1.0 - s) / 2.0)))


def frac_laplacian_constant(gamma: float) -> float:
    """Normalisation of the singular-integral form of ``Lambda^gamma``."""
    return float(2.0**gamma * Gamma((1.0 + gamma) / 2.0) / (np.sqrt(np.pi) * abs(Gamma(-gamma / 2.0))))


def _wavenumbers(f: Field) -> np.ndarray:
    n = f.grid.n
    return 2.0 * np.pi * np.fft.fftfreq(n, d=f.grid.h)


def _spectral(f: Field, multiplier, backend: OperatorBackend):
    n = f.grid.n
    c = np.fft.fft(f.values)
    k = _wavenumbers(f)
    m = multiplier(k)
    m[n // 2] = 0.0
    flags = ()
    energy = np.abs(c) ** 2
    cut = backend.dealias * np.abs(k).max()
    total = energy.sum()
    if total > 0 and energy[np.abs(k) > cut].sum() > UNRESOLVED_FRACTION * total:
        flags = ("unresolved",)
        warnings.warn("field has more than 1% of its energy above the dealiasing cut", ResolutionWarning, stacklevel=3)
    return np.real(np.fft.ifft(m * c)), flags


def _use_even(f: Field, backend: OperatorBackend) -> bool:
    if backend.pv_rule == "even":
        if f.symmetry == Symmetry.NONE:
            raise ValueError("even pv rule requires an even field")
        return True
    return backend.pv_rule == "auto" and f.symmetry != Symmetry.NONE


def hilbert(f: Field, backend: Optional[OperatorBackend] = None) -> Field:
    """Hilbert transform ``H theta = (1/pi) pv int theta(y)/(y - x) dy``."""
    backend = _resolve(f, backend)
    if backend.kind == "spectral":
        v, flags = _spectral(f, lambda k: 1j * np.sign(k), backend)
        return Field(f.grid, v, flags=flags)
    if f.grid.topology == Topology.PERIODIC:
        return Field(f.grid, _periodic_odd(f, 0.0), flags=("quadrature",))
    if _use_even(f, backend):
        v = quad.even_hilbert_sum(f) / np.pi
        return Field(f.grid, v)
    v, bias = quad.odd_kernel_sum(f, 0.0, corrected=backend.pv_rule != "skip_node")
    return Field(f.grid, v / np.pi, flags=("tail_bias",) if bias > 0 else ())


def drift_velocity(f: Field, s: float, backend: Optional[OperatorBackend] = None) -> Field:
    """Transport velocity ``u = Lambda^s H theta`` for ``-1 < s < 1``."""
    if not -1.0 < s < 1.0:
        raise ValueError("drift exponent s must lie in (-1, 1)")
    backend = _resolve(f, backend)
    if backend.kind == "spectral":

        def mult(k):
            with np.errstate(divide="ignore", invalid="ignore"):
                m = 1j * np.sign(k) * np.abs(k) ** s
            m[k == 0] = 0.0
            return m

        v, flags = _spectral(f, mult, backend)
        return Field(f.grid, v, flags=flags)
    if s == 0:
        return hilbert(f, backend)
    if f.grid.topology == Topology.PERIODIC:
        return Field(f.grid, _periodic_odd(f, s), flags=("quadrature",))
    v, bias = quad.odd_kernel_sum(f, s, corrected=backend.pv_rule != "skip_node")
    return Field(f.grid, drift_prefactor(s) * v, flags=("tail_bias",) if bias > 0 else ())


def frac_laplacian(f: Field, gamma: float, backend: Optional[OperatorBackend] = None) -> Field:
    """``Lambda^gamma theta`` for ``0 < gamma < 2``."""
    if not 0.0 < gamma < 2.0:
        raise ValueError("gamma must lie in (0, 2)")
    backend = _resolve(f, backend)
    if backend.kind == "spectral":
        v, flags = _spectral(f, lambda k: np.abs(k) ** gamma, backend)
        return Field(f.grid, v, flags=flags)
    if f.grid.topology == Topology.PERIODIC:
        # periodic quadrature is only offered through the spectral route
        return frac_laplacian(f, gamma, SPECTRAL)
    v = frac_laplacian_constant(gamma) * quad.frac_laplacian_sum(f, gamma)
    return Field(f.grid, v)


def _periodic_odd(f: Field, s: float) -> np.ndarray:
    # periodic quadrature falls back to the exact periodised multiplier
    v, _ = _spectral(f, lambda k: 1j * np.sign(k) * np.where(k == 0, 0.0, np.abs(k) + (k == 0)) ** s, SPECTRAL)
    return v


def dissipation_density(f: Field) -> Field:
    """``D[theta](x) = (1/2pi) int (theta(x)-theta(y))^2/(x-y)^2 dy`` on the nodes."""
    d, _ = dissipation_parts(f)
    return Field(f.grid, d)
