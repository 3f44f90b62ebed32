"""Numerical gates for the operators, identities and exact solutions.

Each gate returns a :class:`~ccf.diagnostics.CertificateReport` whose
``margin`` is ``gate - residual`` and whose ``meta`` carries the residual.
"""

from __future__ import annotations

import numpy as np

from ..core_fields import Field, Symmetry, field_from_function, make_grid
from ..diagnostics import HOLDS, VIOLATED, CertificateReport
from ..exact_solutions import expanding_semicircle, pde_residual, translating_cusp
from ..ops import (
    QUADRATURE,
    SPECTRAL,
    derive_constants,
    frac_laplacian,
    hilbert,
    identity_suite,
    lambda_barrier_check,
    prop_identity_residual,
)


def gate_report(check_id: str, residual: float, gate: float, **meta) -> CertificateReport:
    residual = float(residual)
    meta.update(residual=residual, gate=gate)
    status = HOLDS if residual < gate else VIOLATED
    return CertificateReport(check_id, status, gate - residual, 0.0, None, meta)


def spectral_hilbert_gate(n: int = 256, gate: float = 1e-10) -> CertificateReport:
    """``H cos = -sin`` and ``H sin = cos`` with the spectral multiplier."""
    grid = make_grid("periodic", n)
    x = grid.x
    res = 0.0
    for k in (1, 3, 7):
        hc = hilbert(Field(grid, np.cos(k * x)), SPECTRAL).values
        hs = hilbert(Field(grid, np.sin(k * x)), SPECTRAL).values
        res = max(res, np.max(np.abs(hc + np.sin(k * x))), np.max(np.abs(hs - np.cos(k * x))))
    return gate_report("spectral_hilbert", res, gate, n=n)


def semicircle_hilbert_gate(n: int = 8193, gate: float = 1e-3) -> CertificateReport:
    """Quadrature ``H[-(1 - x^2)_+^{1/2}] = x`` on ``|x| <= 0.9``."""
    grid = make_grid("line", n, L=2.0)
    f = field_from_function(grid, lambda y: -np.sqrt(np.clip(1.0 - y * y, 0.0, None)))
    hv = hilbert(f, QUADRATURE).values
    m = np.abs(grid.x) <= 0.9
    return gate_report("semicircle_hilbert", np.max(np.abs(hv[m] - grid.x[m])), gate, n=n)


def convention_lock_gate(n_fields: int = 20, n: int = 256, gate: float = 1e-8, seed: int = 0) -> CertificateReport:
    """``H d/dx = -Lambda`` on random trigonometric polynomials."""
    rng = np.random.default_rng(seed)
    grid = make_grid("periodic", n)
    x = grid.x
    k = np.arange(1, 17)
    res = 0.0
    for _ in range(n_fields):
        a, b = rng.standard_normal((2, k.size)) / k
        f = Field(grid, np.cos(np.outer(x, k)) @ a + np.sin(np.outer(x, k)) @ b)
        df = Field(grid, -np.sin(np.outer(x, k)) @ (a * k) + np.cos(np.outer(x, k)) @ (b * k))
        lhs = hilbert(df, SPECTRAL).values
        rhs = -frac_laplacian(f, 1.0, SPECTRAL).values
        res = max(res, float(np.max(np.abs(lhs - rhs))))
    return gate_report("convention_lock", res, gate, n_fields=n_fields)


def operator_gates() -> list:
    return [spectral_hilbert_gate(), semicircle_hilbert_gate(), convention_lock_gate()]


def _test_functions(n: int, L: float) -> dict:
    grid = make_grid("line", n, L)
    return {
        "gaussian": field_from_function(grid, lambda y: np.exp(-y * y)),
        "lorentzian": field_from_function(grid, lambda y: 1.0 / (1.0 + y * y)),
    }


def identity_gates(n: int = 8193, L: float = 40.0, gate: float = 1e-6) -> list:
    out = []
    for name, g in _test_functions(n, L).items():
        for rep in identity_suite(g):
            out.append(gate_report(f"{rep.identity_id}[{name}]", rep.residual, gate, flags=list(rep.flags)))
    return out


def prop_identity_gates(n: int = 8193, L: float = 40.0, gate: float = 1e-4) -> list:
    out = []
    for name, g in _test_functions(n, L).items():
        rep = prop_identity_residual(g)
        out.append(gate_report(f"{rep.identity_id}[{name}]", rep.residual, gate,
                               unit_constant_residual=rep.extras["residual_unit_constant"]))
    return out


def barrier_lower_bound_gate() -> CertificateReport:
    rep = lambda_barrier_check()
    return CertificateReport("barrier_lower_bound", HOLDS if rep.residual == 0.0 else VIOLATED,
                             float(rep.lhs - rep.rhs), 0.0, {"x": rep.extras["argmin"]},
                             {"min_lambda_b": float(rep.lhs), "bound": float(rep.rhs)})


def semicircle_residual_gate(n: int = 8193, t: float = 1.0, gate: float = 1e-3) -> CertificateReport:
    """Expanding semicircle residual on ``|x| <= 0.9 t``."""
    grid = make_grid("line", n, L=2.0 * t)
    r = pde_residual(expanding_semicircle(), t, grid)
    return gate_report("semicircle_residual", r.max(lambda x: np.abs(x) <= 0.9 * t), gate, n=n, t=t)


def cusp_residual_gate(n: int = 8193, L: float = 10.0, t: float = 0.3, gate: float = 1e-3) -> CertificateReport:
    """Translating cusp residual on ``0.1 <= |x| <= 0.8 L``."""
    grid = make_grid("line", n, L)
    r = pde_residual(translating_cusp(), t, grid)
    region = lambda x: (np.abs(x) >= 0.1) & (np.abs(x) <= 0.8 * L)
    return gate_report("cusp_residual", r.max(region), gate, n=n, t=t)


def derived_constant_gates(n: int = 8193, gate: float = 1e-2) -> list:
    const = derive_constants(n)
    out = []
    for name, expected in (("C_semicircle", 1.0), ("C1_cusp", 0.5)):
        v = const.value(name)
        out.append(gate_report(name, abs(v - expected), gate, value=v, expected=expected))
    return out
