"""Certificates for the blow-up inequalities and measurement trackers.

Every certificate returns a :class:`CertificateReport`. A check ``Holds``
when its margin (left side minus right side of the inequality, oriented so
that a non-negative margin means the inequality is satisfied) is at least
``-tolerance``; the tolerance is a quadrature error estimate built from the
sampled data. Conjecture trackers never return ``Holds`` or ``Violated``.

Flux integrals ``int eta u theta_x`` are evaluated in Stieltjes form,
``sum_j 1/2 (u_j + u_{j+1}) (theta_{j+1} - theta_j)``, which is exact for
piecewise-linear interpolants and stays meaningful across steep fronts.
"""

from __future__ import annotations

import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .core_fields import (
    Field,
    FieldError,
    HolderEstimate,
    NormReport,
    Symmetry,
    derivative,
    exterior_nodes,
    fit_tail,
    hhalf_sq,
    holder_seminorm,
    make_grid,
    norms,
)
from .ops import ResolutionWarning, drift_velocity, frac_laplacian, hilbert
from .ops.constants import (
    MEASURED,
    Constants,
    ConstantValue,
    analytic_constants,
    c_alpha_exact,
    c_alpha_formula,
    eta as eta_fn,
    local_flux_constant,
    phi as phi_fn,
    stationary_holder_constant,
)

HOLDS = "Holds"
VIOLATED = "Violated"
NOT_APPLICABLE = "NotApplicable"

INVISCID = "inviscid"
DISSIPATIVE = "dissipative"

F_CAP = 1e12
MIN_SHELL_NODES = 8
PLATEAU_CELLS = 4
ACCEPT_FACTOR = 10.0
# a snapshot counts as resolved (classical on the grid) while no cell jump
# exceeds this fraction of the oscillation
RESOLVED_JUMP = 0.02
_REL_FLOOR = 1e-12


# --------------------------------------------------------------------------
# report types


@dataclass(frozen=True)
class CertificateReport:
    """Outcome of one check.

    ``margin`` is the worst (most negative relative to its tolerance) margin
    over all sub-checks and ``location`` is its witness, e.g. ``{"t": ...,
    "x": ...}``. ``rows`` holds one ``(t, status, margin, tolerance)`` entry
    per snapshot for trajectory-level checks.
    """

    check_id: str
    status: str
    margin: float
    tolerance: float
    location: Optional[dict] = None
    meta: dict = field(default_factory=dict)
    rows: tuple = ()

    @property
    def holds(self) -> bool:
        return self.status == HOLDS

    def within(self, factor: float = ACCEPT_FACTOR) -> bool:
        """True unless the check is violated by more than ``factor`` tolerances."""
        if self.status != VIOLATED:
            return True
        return bool(self.margin >= -factor * self.tolerance)

    def as_dict(self) -> dict:
        d = asdict(self)
        d["rows"] = [list(r) for r in self.rows]
        return d


def not_applicable(check_id: str, reason: str, **meta) -> CertificateReport:
    meta["reason"] = reason
    return CertificateReport(check_id, NOT_APPLICABLE, float("nan"), float("nan"), None, meta)


def _combine(check_id: str, checks: list, meta: Optional[dict] = None, rows=()) -> CertificateReport:
    """Fold ``(margin, tol, location)`` triples into one report."""
    meta = dict(meta or {})
    if not checks:
        return CertificateReport(check_id, HOLDS, 0.0, 0.0, None, meta, tuple(rows))
    ratios = [m / t if t > 0 else (np.inf if m >= 0 else -np.inf) for m, t, _ in checks]
    i = int(np.argmin(ratios))
    margin, tol, loc = checks[i]
    ok = all(m >= -t for m, t, _ in checks)
    meta.setdefault("n_checks", len(checks))
    return CertificateReport(check_id, HOLDS if ok else VIOLATED, float(margin), float(tol), loc, meta, tuple(rows))


def _status(margin: float, tol: float) -> str:
    return HOLDS if margin >= -tol else VIOLATED


# --------------------------------------------------------------------------
# weights and the Lyapunov functional


@dataclass(frozen=True)
class WeightPair:
    """Weight ``eta`` of the Lyapunov functional and its primitive ``phi``.

    ``variant="inviscid"`` uses ``x^{-alpha}`` on ``(0, 1)``,
    ``"dissipative"`` uses ``x^{-1-alpha}``; both decay as ``x^{-2-alpha}``.
    """

    alpha: float = 0.5
    variant: str = INVISCID

    def __post_init__(self):
        if not 0.0 < self.alpha < 1.0:
            raise ValueError("alpha must lie in (0, 1)")
        if self.variant not in (INVISCID, DISSIPATIVE):
            raise ValueError(f"unknown weight variant {self.variant!r}")

    @classmethod
    def for_dissipation(cls, gamma: float, margin: float = 0.05) -> "WeightPair":
        """``alpha = (1 - 2 gamma)/2 - margin``, which keeps ``gamma < (1 - alpha)/2``."""
        alpha = (1.0 - 2.0 * gamma) / 2.0 - margin
        if alpha <= 0.0:
            raise ValueError(f"no admissible alpha for gamma={gamma}; need gamma < 1/2")
        return cls(alpha, DISSIPATIVE)

    @property
    def inner_exponent(self) -> float:
        return -self.alpha if self.variant == INVISCID else -1.0 - self.alpha

    def eta(self, x):
        return eta_fn(x, self.alpha, self.variant)

    def phi(self, x):
        return phi_fn(x, self.alpha, self.variant)

    def l1_norm(self) -> float:
        """``int_0^inf eta``; infinite for the dissipative weight."""
        if self.variant == DISSIPATIVE:
            return np.inf
        return 1.0 / (1.0 - self.alpha) + 1.0 / (1.0 + self.alpha)


def is_resolved(f: Field, rel_jump: float = RESOLVED_JUMP) -> bool:
    """No single cell carries more than ``rel_jump`` of the oscillation."""
    v = f.values
    osc = float(v.max() - v.min())
    if osc == 0.0:
        return True
    return bool(np.max(np.abs(np.diff(v))) <= rel_jump * osc)


def _pow_int(a, b, q):
    return (b ** (q + 1.0) - a ** (q + 1.0)) / (q + 1.0)


def _is_even(f: Field, rtol: float = 1e-10) -> bool:
    if f.symmetry is not Symmetry.NONE:
        return True
    v = f.values
    scale = max(float(np.max(np.abs(v))), 1e-300)
    return bool(np.max(np.abs(v - v[f.grid.mirror])) <= rtol * scale)


def _orientation(f: Field, rtol: float = 1e-10) -> int:
    """``+1`` if non-increasing on ``x >= 0``, ``-1`` if non-decreasing, else 0."""
    o = f.grid.origin
    d = np.diff(f.values[o:])
    scale = max(float(np.max(np.abs(f.values))), 1e-300)
    if np.all(d <= rtol * scale):
        return 1
    if np.all(d >= -rtol * scale):
        return -1
    return 0


def _half_cells(grid, weights: WeightPair):
    """Cells ``[x_j, x_{j+1}]`` on ``x >= 0`` with ``int eta`` and ``int x eta`` over each.

    The cell containing ``x = 1`` is not split; on it the moments are taken
    piecewise. Entry 0 (the cell touching the origin) is left at ``nan``.
    """
    x = grid.x[grid.origin:]
    a, b = x[:-1], x[1:]
    e_in, e_out = weights.inner_exponent, -2.0 - weights.alpha
    m0 = np.empty(a.size)
    m1 = np.empty(a.size)
    with np.errstate(divide="ignore", invalid="ignore"):
        lo_a, lo_b = np.minimum(a, 1.0), np.minimum(b, 1.0)
        hi_a, hi_b = np.maximum(a, 1.0), np.maximum(b, 1.0)
        m0[:] = _pow_int(lo_a, lo_b, e_in) + _pow_int(hi_a, hi_b, e_out)
        m1[:] = _pow_int(lo_a, lo_b, e_in + 1) + _pow_int(hi_a, hi_b, e_out + 1)
    m0[0] = m1[0] = np.nan
    return a, b, m0, m1


def _weighted_deficit(f: Field, weights: WeightPair, values=None) -> float:
    """``int_0^inf eta(x) (v(0) - v(x)) dx`` by product integration.

    ``v`` is linear on each cell except the first, where the even
    expansion ``v(0) - v(x) ~ c x^2`` is integrated against ``eta`` in
    closed form. The exterior uses the field's tail (constant continuation
    when absent).
    """
    grid = f.grid
    if grid.h >= 1.0:
        raise FieldError("grid spacing must be below 1 to resolve the weight")
    v = f.values if values is None else np.asarray(values, dtype=float)
    o = grid.origin
    vh = v[o:]
    d = vh[0] - vh
    a, b, m0, m1 = _half_cells(grid, weights)
    q = (d[1:] - d[:-1]) / (b - a)
    p = d[:-1] - q * a
    inner = p[1:] * m0[1:] + q[1:] * m1[1:]
    h = grid.h
    e = weights.inner_exponent
    first = d[1] / h**2 * h ** (e + 3.0) / (e + 3.0)
    total = float(first + np.sum(inner))
    L = grid.L
    if values is None and f.tail is not None:
        y, w = exterior_nodes(L, h)
        total += float(np.sum(w * weights.eta(y) * (vh[0] - f.tail_values(y))))
    else:
        total += float(d[-1] * weights.phi(L))
    return total


def lyapunov_F(f: Field, weights: Optional[WeightPair] = None) -> float:
    """``F = int_0^inf eta(x) (theta(0) - theta(x)) dx``.

    Values above ``F_CAP`` are clipped with a ``RuntimeWarning``; the
    dissipative weight is not integrable at the origin and ``F`` is not
    known to be finite a priori.

    Raises
    ------
    FieldError
        If the field is not even, or lives on a periodic grid.
    """
    weights = weights or WeightPair()
    if f.grid.periodic:
        raise FieldError("the Lyapunov functional is defined on the line")
    if not _is_even(f):
        raise FieldError("the Lyapunov functional needs an even field")
    F = _weighted_deficit(f, weights)
    if not np.isfinite(F) or F > F_CAP:
        warnings.warn("Lyapunov functional overflow; value capped", RuntimeWarning, stacklevel=2)
        return F_CAP
    return F


def _deficit_tolerance(f: Field, weights: WeightPair, values=None) -> float:
    """Interpolation error bound ``sum_cells int eta |second difference|/8``."""
    grid = f.grid
    v = f.values if values is None else values
    vh = v[grid.origin:]
    d2 = np.zeros(vh.size - 1)
    dd = np.abs(vh[2:] - 2 * vh[1:-1] + vh[:-2])
    d2[1:] = dd
    d2[:-1] = np.maximum(d2[:-1], dd)
    _, _, m0, _ = _half_cells(grid, weights)
    e = weights.inner_exponent
    m0[0] = grid.h ** (e + 1.0) / (e + 1.0) if e > -1.0 else 0.0
    scale = max(float(np.max(np.abs(v))), 1e-300)
    return float(np.sum(m0 * d2) / 8.0) + _REL_FLOOR * scale


# --------------------------------------------------------------------------
# flux pieces


def _velocity(f: Field, s: float, backend=None) -> np.ndarray:
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", ResolutionWarning)
        return drift_velocity(f, s, backend).values


def _lambda(f: Field, gamma: float = 1.0, backend=None) -> np.ndarray:
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", ResolutionWarning)
        return frac_laplacian(f, gamma, backend).values


@dataclass(frozen=True)
class _Flux:
    x: np.ndarray  # half-line nodes
    theta: np.ndarray
    u: np.ndarray
    cells: np.ndarray  # Stieltjes contributions per cell
    op_tol: float  # operator error scale

    def integral(self, i: int, j: int) -> float:
        return float(np.sum(self.cells[i:j]))

    def tolerance(self, i: int, j: int) -> float:
        dth = np.abs(np.diff(self.theta[i : j + 1]))
        du = np.abs(np.diff(self.u[i : j + 1]))
        return float(np.sum(dth * (du + self.op_tol)))


def _flux(f: Field, u: np.ndarray) -> _Flux:
    o = f.grid.origin
    th, uh = f.values[o:], u[o:]
    cells = 0.5 * (uh[1:] + uh[:-1]) * np.diff(th)
    scale = max(float(np.max(np.abs(f.values))), 1e-300)
    op_tol = float(np.max(np.abs(np.diff(th)))) + _REL_FLOOR * scale
    return _Flux(f.grid.x[o:], th, uh, cells, op_tol)


def weighted_flux(f: Field, u: np.ndarray, weights: WeightPair) -> tuple:
    """``int_0^L eta u theta_x`` and its tolerance.

    Each Stieltjes cell term is weighted by the cell average of ``eta``; on
    the first cell ``u theta_x ~ c x^2`` is integrated against ``eta``
    exactly.
    """
    fl = _flux(f, u)
    a, b, m0, _ = _half_cells(f.grid, weights)
    w = m0 / (b - a)
    e = weights.inner_exponent
    h = f.grid.h
    w[0] = 3.0 * h**e / (e + 3.0)
    total = float(np.sum(w * fl.cells))
    dth = np.abs(np.diff(fl.theta))
    du = np.abs(np.diff(fl.u))
    tol = float(np.sum(w * dth * (du + fl.op_tol)))
    return total, tol


def dyadic_shells(grid, min_nodes: int = MIN_SHELL_NODES) -> tuple:
    """Resolved shells ``(k, 2^k, 2^{k+1})`` inside ``(0, L]`` and the skipped ``k``."""
    h, L = grid.h, grid.L
    kmax = int(np.floor(np.log2(L))) - 1
    kmin = int(np.floor(np.log2(h)))
    resolved, skipped = [], []
    for k in range(kmin, kmax + 1):
        if 2.0**k / h >= min_nodes:
            resolved.append((k, 2.0**k, 2.0 ** (k + 1)))
        else:
            skipped.append(k)
    return resolved, skipped


def _local_bound(x1: float, x2: float, s: float) -> float:
    """Coefficient of ``(theta(x2) - theta(x1))^2`` in the local flux bound."""
    if s == 0.0:
        return np.log((x1 + x2) / (x1 - x2)) / (4.0 * np.pi)
    return (1.0 - s) / (16.0 * s) * (1.0 - ((x1 - x2) / (x1 + x2)) ** s) / (x1 - x2) ** s


def _pointwise_bound(x1: float, x2: float, s: float) -> float:
    """Coefficient of ``theta(x2) - theta(x1)`` in the pointwise drift bound."""
    if s == 0.0:
        return np.log((x1 + x2) / (x1 - x2)) / np.pi
    return (1.0 - s) / (4.0 * s) * (1.0 - ((x1 - x2) / (x1 + x2)) ** s) / (x1 - x2) ** s


def riccati_coefficient(weights: WeightPair, s: float = 0.0, exact: bool = True) -> float:
    """``k`` in ``dF/dt >= k F^2``.

    ``log 3/(4 pi c_alpha)`` at ``s = 0`` and the local drift prefactor over
    ``c_{alpha,s}`` otherwise. ``exact=False`` uses the closed-form bound on
    ``c_alpha`` (only defined for the inviscid weight at ``s = 0``).
    """
    if exact:
        c = c_alpha_exact(weights.alpha, s, weights.variant)
    else:
        if s != 0.0 or weights.variant != INVISCID:
            raise ValueError("the closed-form c_alpha covers only s = 0 with the inviscid weight")
        c = c_alpha_formula(weights.alpha)
    return local_flux_constant(s) / c


def _precheck_line_even_monotone(check_id: str, f: Field):
    if f.grid.periodic:
        return not_applicable(check_id, "line grid required"), 0
    if not _is_even(f):
        return not_applicable(check_id, "field is not even"), 0
    sign = _orientation(f)
    if sign == 0:
        return not_applicable(check_id, "field is not monotone on x >= 0"), 0
    return None, sign


# --------------------------------------------------------------------------
# pointwise and local certificates


def pointwise_hilbert_certificate(
    f: Field, x1: float, x2: float, s: float = 0.0, u: Optional[np.ndarray] = None
) -> CertificateReport:
    """``-u(x2) >= K(x1, x2) (theta(x2) - theta(x1))`` for ``u = Lambda^s H theta``.

    ``K = log((x1+x2)/(x1-x2))/pi`` at ``s = 0`` and
    ``(1-s)/(4s) (1 - ((x1-x2)/(x1+x2))^s)/(x1-x2)^s`` otherwise. Points are
    snapped to the nearest nodes (recorded in ``meta``). Fields that
    increase away from the origin are handled through ``-theta``.
    """
    cid = "pointwise_hilbert"
    if not 0.0 < x2 < x1:
        raise ValueError("need 0 < x2 < x1")
    bad, sign = _precheck_line_even_monotone(cid, f)
    if bad:
        return bad
    grid = f.grid
    i1, i2 = grid.nearest(x1), grid.nearest(x2)
    xs1, xs2 = float(grid.x[i1]), float(grid.x[i2])
    meta = {"s": s, "x1": x1, "x2": x2, "x1_node": xs1, "x2_node": xs2}
    if not 0.0 < xs2 < xs1:
        return not_applicable(cid, "points collapse after snapping to the grid", **meta)
    u = _velocity(f, s) if u is None else u
    fl = _flux(f, u)
    lhs = -sign * float(u[i2])
    rhs = _pointwise_bound(xs1, xs2, s) * sign * float(f.values[i2] - f.values[i1])
    meta.update(lhs=lhs, rhs=rhs)
    margin = lhs - rhs
    return CertificateReport(cid, _status(margin, fl.op_tol), margin, fl.op_tol, {"x": xs2}, meta)


def telescoping_certificate(
    f: Field,
    weights: Optional[WeightPair] = None,
    s: float = 0.0,
    u: Optional[np.ndarray] = None,
    constants: Optional[Constants] = None,
) -> CertificateReport:
    """Local dyadic flux bounds and the assembled Riccati inequality.

    (i) On every resolved shell ``(x2, x1) = (2^k, 2^{k+1})``:
    ``int_{x2}^{x1} u theta_x >= K (theta(x2) - theta(x1))^2``.
    (ii) ``int_0^L eta u theta_x >= k F^2`` with ``k`` from
    :func:`riccati_coefficient`; requires ``alpha > |s|`` (skipped and noted
    otherwise, the dyadic constant being infinite).
    """
    cid = "telescoping"
    weights = weights or WeightPair()
    bad, _ = _precheck_line_even_monotone(cid, f)
    if bad:
        return bad
    grid = f.grid
    u = _velocity(f, s) if u is None else u
    fl = _flux(f, u)
    o = grid.origin
    shells, skipped = dyadic_shells(grid)
    checks = []
    shell_rows = []
    for k, x2, x1 in shells:
        i2, i1 = grid.nearest(x2) - o, grid.nearest(x1) - o
        xs2, xs1 = float(fl.x[i2]), float(fl.x[i1])
        lhs = fl.integral(i2, i1)
        rhs = _local_bound(xs1, xs2, s) * float(fl.theta[i2] - fl.theta[i1]) ** 2
        tol = fl.tolerance(i2, i1) + _REL_FLOOR * max(abs(lhs), abs(rhs), 1e-300)
        checks.append((lhs - rhs, tol, {"k": k, "x2": xs2, "x1": xs1}))
        shell_rows.append((k, lhs, rhs))
    meta = {"s": s, "alpha": weights.alpha, "skipped_shells": skipped, "shells": shell_rows}
    if weights.alpha > abs(s) and weights.variant == INVISCID:
        F = lyapunov_F(f, weights)
        flux, flux_tol = weighted_flux(f, u, weights)
        kcoef = riccati_coefficient(weights, s)
        rhs = kcoef * F * F
        tol = flux_tol + 2.0 * kcoef * F * _deficit_tolerance(f, weights)
        checks.append((flux - rhs, tol, {"assembled": True}))
        meta.update(F=F, flux=flux, riccati_rhs=rhs, riccati_k=kcoef)
        if not grid.periodic and f.tail is not None and f.tail_size() > 1e-6:
            meta["exterior_flux_omitted"] = True
    else:
        meta["assembled"] = "skipped: needs the inviscid weight with alpha > |s|"
    return _combine(cid, checks, meta)


# --------------------------------------------------------------------------
# trajectory helpers


def _workers() -> int:
    from .solver import _workers as w

    return w()


def _pmap(fn: Callable, items: Sequence) -> list:
    """Ordered map over snapshots; each call is pure."""
    items = list(items)
    n = min(len(items), _workers())
    if n <= 1:
        return [fn(it) for it in items]
    with ThreadPoolExecutor(n) as pool:
        return list(pool.map(fn, items))


def _snapshots(traj):
    return list(zip(traj.times, traj.snapshots))


def _spec_s(traj) -> float:
    return float(getattr(getattr(traj, "spec", None), "s", 0.0))


def _spec_backend(traj):
    return getattr(getattr(traj, "spec", None), "backend", None)


def fold_reports(check_id: str, items: Sequence) -> CertificateReport:
    """Fold per-snapshot ``(t, report)`` pairs into one report with rows.

    Snapshots whose report is ``NotApplicable`` are listed in
    ``meta["not_applicable"]``; if every snapshot is, so is the result.
    """
    rows, checks, na = [], [], []
    for t, r in items:
        rows.append((float(t), r.status, float(r.margin), float(r.tolerance)))
        if r.status == NOT_APPLICABLE:
            na.append((float(t), r.meta.get("reason", "")))
            continue
        loc = dict(r.location or {})
        loc["t"] = float(t)
        checks.append((r.margin, r.tolerance, loc))
    if not checks:
        return not_applicable(check_id, "no applicable snapshot", not_applicable=na)
    return _combine(check_id, checks, {"not_applicable": na}, rows)


def shell_pairs(f: Field) -> list:
    """Node pairs ``(x1, x2) = (2^{k+1}, 2^k)`` and ``(3 2^{k-1}, 2^k)`` on resolved shells."""
    shells, _ = dyadic_shells(f.grid)
    pairs = []
    for _, x2, x1 in shells:
        pairs.append((x1, x2))
        pairs.append((0.75 * x1, x2))
    return pairs


def pointwise_trajectory_certificate(traj, s: Optional[float] = None) -> CertificateReport:
    """:func:`pointwise_hilbert_certificate` on every snapshot and shell pair."""
    s = _spec_s(traj) if s is None else s

    def one(item):
        t, f = item
        u = _velocity(f, s)
        reps = [(t, pointwise_hilbert_certificate(f, x1, x2, s, u)) for x1, x2 in shell_pairs(f)]
        return t, fold_reports("pointwise_hilbert", reps)

    return fold_reports("pointwise_hilbert", _pmap(one, _snapshots(traj)))


def telescoping_trajectory_certificate(
    traj, weights: Optional[WeightPair] = None, s: Optional[float] = None, constants: Optional[Constants] = None
) -> CertificateReport:
    """:func:`telescoping_certificate` on every snapshot."""
    s = _spec_s(traj) if s is None else s
    reps = _pmap(lambda it: (it[0], telescoping_certificate(it[1], weights, s, None, constants)), _snapshots(traj))
    return fold_reports("telescoping", reps)


# --------------------------------------------------------------------------
# Riccati inequality for F along a run


def riccati_F_certificate(
    traj,
    weights: Optional[WeightPair] = None,
    constants: Optional[Constants] = None,
) -> CertificateReport:
    """Per-snapshot ``dF/dt >= k F^2`` with ``dF/dt`` from the flux form.

    The flux ``int eta u theta_x`` is evaluated on each snapshot, never by
    differencing ``F`` in time. The forecast ``T* <= 1/(k F(0))`` is
    recorded with ``c_alpha`` both from the exact dyadic sum (the gate) and
    from the closed-form bound.

    With the dissipative weight and ``kappa > 0`` the full
    ``dF/dt = flux + kappa int eta (Lambda^gamma theta - Lambda^gamma theta(0))``
    is tabulated and the smallest ``C`` with
    ``dF/dt >= F^2/C - C F - C |theta_0|_inf`` is reported; the status is
    ``NotApplicable`` because the constant is not explicit.
    """
    weights = weights or WeightPair()
    spec = getattr(traj, "spec", None)
    s = _spec_s(traj)
    snaps = _snapshots(traj)
    if not snaps:
        return not_applicable("riccati_F", "empty trajectory")
    if weights.variant == DISSIPATIVE:
        return _riccati_dissipative(traj, weights)
    cid = "riccati_F"
    if weights.alpha <= abs(s):
        return not_applicable(cid, "alpha <= |s|: the dyadic constant diverges", alpha=weights.alpha, s=s)
    kcoef = riccati_coefficient(weights, s)
    backend = _spec_backend(traj)

    def one(item):
        t, f = item
        if not _is_even(f) or _orientation(f) == 0:
            return t, None
        u = _velocity(f, s, backend)
        F = lyapunov_F(f, weights)
        flux, ftol = weighted_flux(f, u, weights)
        rhs = kcoef * F * F
        tol = ftol + 2.0 * kcoef * F * _deficit_tolerance(f, weights)
        return t, (F, flux, rhs, tol)

    out = _pmap(one, snaps)
    checks, rows, series = [], [], []
    for t, r in out:
        if r is None:
            rows.append((t, NOT_APPLICABLE, float("nan"), float("nan")))
            continue
        F, flux, rhs, tol = r
        m = flux - rhs
        checks.append((m, tol, {"t": t}))
        rows.append((t, _status(m, tol), m, tol))
        series.append((t, F, flux, rhs))
    meta = {"alpha": weights.alpha, "s": s, "riccati_k": kcoef, "series": series}
    F0 = series[0][1] if series else 0.0
    if F0 > 0:
        meta["forecast_exact"] = 1.0 / (kcoef * F0)
        if s == 0.0:
            meta["forecast_formula"] = 1.0 / (riccati_coefficient(weights, 0.0, exact=False) * F0)
    else:
        meta["forecast_exact"] = np.inf
    verdict = getattr(traj, "verdict", None)
    if verdict is not None and verdict.kind == "blowup":
        meta["observed_blowup"] = verdict.t - traj.times[0]
        bound = meta.get("forecast_formula", meta["forecast_exact"])
        meta["forecast_consistent"] = bool(meta["observed_blowup"] <= bound)
    if spec is not None and spec.eps > 0:
        meta["eps"] = spec.eps
    return _combine(cid, checks, meta, rows)


def _best_fit_C(F: float, dFdt: float, M: float) -> float:
    """Smallest ``C > 0`` with ``dFdt >= F^2/C - C F - C M``."""
    a = F + M
    if a <= 0:
        return 0.0 if dFdt >= 0 else np.inf
    return float((-dFdt + np.sqrt(dFdt * dFdt + 4.0 * a * F * F)) / (2.0 * a))


def _riccati_dissipative(traj, weights: WeightPair) -> CertificateReport:
    cid = "riccati_F_dissipative"
    spec = traj.spec
    if spec.kappa > 0 and not spec.gamma < (1.0 - weights.alpha) / 2.0:
        return not_applicable(cid, "gamma < (1 - alpha)/2 is required for the dissipative weight",
                              gamma=spec.gamma, alpha=weights.alpha)
    s = _spec_s(traj)
    backend = _spec_backend(traj)
    M = float(np.max(np.abs(traj.snapshots[0].values)))

    def one(item):
        t, f = item
        u = _velocity(f, s, backend)
        F = lyapunov_F(f, weights)
        flux, _ = weighted_flux(f, u, weights)
        diss = 0.0
        if spec.kappa > 0:
            lg = _lambda(f, spec.gamma, backend)
            diss = -spec.kappa * _weighted_deficit(f, weights, lg)
        dFdt = flux + diss
        return (t, F, flux, diss, dFdt, _best_fit_C(F, dFdt, M))

    series = _pmap(one, _snapshots(traj))
    C = max((r[5] for r in series), default=0.0)
    rep = not_applicable(cid, "C_{alpha,gamma} is not explicit; best-fit constant reported",
                         alpha=weights.alpha, gamma=spec.gamma, kappa=spec.kappa, best_fit_C=C)
    rep.meta["series"] = series
    return rep


# --------------------------------------------------------------------------
# De Giorgi truncations


def truncation_levels(k_max: int) -> np.ndarray:
    return 1.0 - 2.0 ** (-np.arange(k_max + 1, dtype=float))


def truncations(f: Field, k_max: int) -> list:
    """``theta_k = (theta - (1 - 2^{-k}))_+`` for ``k = 0..k_max``."""
    return [Field(f.grid, np.maximum(f.values - c, 0.0)) for c in truncation_levels(k_max)]


def _mass(f: Field) -> float:
    return float(np.dot(f.grid.weights, f.values))


def degiorgi_levels(f: Field, k_max: int) -> np.ndarray:
    """Masses ``a_k = int theta_k``."""
    return np.array([_mass(g) for g in truncations(f, k_max)])


def interpolation_certificate(f: Field, constants: Optional[Constants] = None) -> CertificateReport:
    """``|f|_2^2 <= C |f|_1 |f|_{H^1/2}`` with ``C = 3``."""
    C = (constants or analytic_constants()).value("interpolation")
    w = f.grid.weights
    l2 = float(np.dot(w, f.values**2))
    l1 = float(np.dot(w, np.abs(f.values)))
    hh = np.sqrt(max(hhalf_sq(f), 0.0))
    rhs = C * l1 * hh
    tol = 1e-8 * max(l2, rhs) + 1e-300
    m = rhs - l2
    return CertificateReport("interpolation", _status(m, tol), m, tol, None,
                             {"l2_sq": l2, "l1": l1, "hhalf": hh, "ratio": l2 / (l1 * hh) if l1 * hh > 0 else 0.0})


def degiorgi_certificate(
    traj, k_max: int = 8, constants: Optional[Constants] = None, measure_eps0: bool = False, **eps0_kw
) -> CertificateReport:
    """Truncation ladder, truncated dissipation and interpolation on a run.

    (i) ``a_k`` non-increasing in ``k`` at every snapshot. (ii) Between
    consecutive snapshots ``a_k(t2) - a_k(t1) <= -int |theta_k|^2`` with the
    time integral by the trapezoid rule; the tolerance is the trapezoid
    spread ``dt |Delta |theta_k|^2| / 2``; intervals touching a snapshot that
    fails :func:`is_resolved` are listed in ``meta["under_resolved"]`` and
    skipped, since past the singularity the seminorm is infinite in the
    continuum and the identity no longer applies. (iii) interpolation with ``C = 3``
    on every ``theta_k``. With ``measure_eps0`` the unit-scale mass
    threshold is bracketed by :func:`measure_eps0` and stored in ``meta``.
    """
    cid = "degiorgi"
    snaps = _snapshots(traj)
    if not snaps:
        return not_applicable(cid, "empty trajectory")
    scale = max(float(np.max(np.abs(snaps[0][1].values))), 1e-300)
    if any(float(f.values.min()) < -1e-10 * scale for _, f in snaps):
        return not_applicable(cid, "negative data")
    const = constants or analytic_constants()

    def one(item):
        t, f = item
        tr = truncations(f, k_max)
        a = np.array([_mass(g) for g in tr])
        hh = np.array([hhalf_sq(g) for g in tr])
        interp = [interpolation_certificate(g, const) for g in tr]
        return t, a, hh, interp, is_resolved(f)

    out = _pmap(one, snaps)
    checks, rows = [], []
    ladder = []
    for t, a, hh, interp, _ in out:
        da = np.diff(a)
        tol = 1e-12 * max(a[0], 1e-300)
        m = float(-np.max(da)) if da.size else 0.0
        checks.append((m, tol, {"t": t, "check": "ladder"}))
        for k, r in enumerate(interp):
            checks.append((r.margin, r.tolerance, {"t": t, "k": k, "check": "interpolation"}))
        ladder.append((t, a.tolist()))
    skipped = []
    for (t1, a1, h1, _, ok1), (t2, a2, h2, _, ok2) in zip(out, out[1:]):
        dt = t2 - t1
        if not (ok1 and ok2):
            # the dissipation identity needs a classical solution
            skipped.append(t2)
            rows.append((t2, NOT_APPLICABLE, float("nan"), float("nan")))
            continue
        worst = None
        for k in range(k_max + 1):
            lhs = a2[k] - a1[k]
            rhs = -0.5 * dt * (h1[k] + h2[k])
            tol = 0.5 * dt * abs(h2[k] - h1[k]) + 1e-10 * max(a1[0], 1e-300)
            m = rhs - lhs
            checks.append((m, tol, {"t": t2, "k": k, "check": "dissipation"}))
            if worst is None or m / tol < worst[0] / worst[1]:
                worst = (m, tol)
        rows.append((t2, _status(*worst), worst[0], worst[1]))
    meta = {"k_max": k_max, "ladder": ladder, "under_resolved": skipped}
    if measure_eps0:
        cv = measure_eps0(**eps0_kw)
        meta["eps0"] = cv.as_dict()
    return _combine(cid, checks, meta, rows)


def measure_eps0(
    eps: float = 1e-3,
    n: int = 1025,
    L: float = 8.0,
    m_max: float = 256.0,
    iterations: int = 6,
    record_every: float = 0.25,
) -> ConstantValue:
    """Bracket the smallest mass of ``m exp(-pi x^2)`` for which ``max theta(1) > 1``.

    The profile has unit mass per unit ``m``. Masses up to 1 satisfy the
    bound by the maximum principle, so the search starts there and doubles
    until a failure is found, then bisects. Returns the largest passing
    mass with the bracket in ``note`` (tag ``measured``).
    """
    from .solver import OperatorSpec, SchemeConfig, run

    grid = make_grid("line", n, L)

    def fails(m):
        f0 = Field(grid, m * np.exp(-np.pi * grid.x**2), Symmetry.EVEN)
        tr = run(f0, OperatorSpec(eps=eps), SchemeConfig(grad_max=np.inf), 1.0, record_every)
        return float(tr.snapshots[-1].values.max()) > 1.0

    lo, hi = 1.0, 2.0
    while not fails(hi):
        lo, hi = hi, 2.0 * hi
        if hi > m_max:
            return ConstantValue("eps0", lo, MEASURED, None, f"no failure up to mass {m_max:g} (eps={eps:g}, n={n})")
    for _ in range(iterations):
        mid = 0.5 * (lo + hi)
        if fails(mid):
            hi = mid
        else:
            lo = mid
    return ConstantValue("eps0", lo, MEASURED, hi,
                         f"bracket [{lo:.4g}, {hi:.4g}] for m exp(-pi x^2), eps={eps:g}, n={n}, L={L:g}")


# --------------------------------------------------------------------------
# L-infinity decay


def _decay_constant(traj) -> tuple:
    f0 = traj.snapshots[0]
    t0 = traj.times[0]
    m0 = float(np.dot(f0.grid.weights, np.abs(f0.values)))
    mon = traj.monitor_array() if hasattr(traj, "monitor_array") and traj.monitor else None
    if mon is not None and len(mon):
        t = mon[:, 0] - t0
        sup = np.maximum(np.abs(mon[:, 2]), np.abs(mon[:, 3]))
    else:
        t = np.asarray(traj.times) - t0
        sup = np.array([np.max(np.abs(f.values)) for f in traj.snapshots])
    keep = t > 0
    if m0 == 0 or not keep.any():
        return 0.0, None
    vals = sup[keep] * np.sqrt(t[keep] / m0)
    i = int(np.argmax(vals))
    return float(vals[i]), float(t[keep][i] + t0)


def linfty_decay_certificate(trajectories, spread: float = 2.0) -> CertificateReport:
    """``K = sup_T |theta(T)|_inf (T/|theta_0|_1)^{1/2}`` per run.

    Holds iff ``max K / min K < spread`` over all runs; accepts a list of
    trajectories or sweep results (flattened). Times are measured from each
    run's start and ``T = 0`` is excluded.
    """
    cid = "linfty_decay"
    runs = []
    for item in trajectories:
        if hasattr(item, "trajectories"):
            runs.extend(item.trajectories)
        else:
            runs.append(item)
    if not runs:
        return not_applicable(cid, "no runs")
    Ks, where = [], []
    for r in runs:
        K, t = _decay_constant(r)
        Ks.append(K)
        where.append(t)
    Ks = np.asarray(Ks)
    meta = {"constants": Ks.tolist(), "argmax_t": where,
            "eps": [getattr(getattr(r, "spec", None), "eps", None) for r in runs]}
    if np.all(Ks == 0):
        return CertificateReport(cid, HOLDS, spread, 0.0, None, dict(meta, constant=0.0, ratio=0.0))
    ratio = float(Ks.max() / Ks.min()) if Ks.min() > 0 else np.inf
    meta.update(constant=float(Ks.max()), ratio=ratio)
    m = spread - ratio
    return CertificateReport(cid, HOLDS if m > 0 else VIOLATED, m, 0.0, {"run": int(np.argmax(Ks))}, meta)


# --------------------------------------------------------------------------
# barrier


def barrier_profile(x, t: float, h: float, A: float, s: float = 0.0):
    """``h + (A/t)(1 - |x|^{(1+s)/2})_+``."""
    x = np.asarray(x, dtype=float)
    return h + (A / t) * np.clip(1.0 - np.abs(x) ** ((1.0 + s) / 2.0), 0.0, None)


def barrier_certificate(traj, A: Optional[float] = None, constants: Optional[Constants] = None) -> CertificateReport:
    """``theta(t, x) <= h + (A/t)(1 - |x|^{(1+s)/2})_+`` at every snapshot with ``t > 0``.

    ``h = theta(0, 1/2)`` is read from the first snapshot at the node
    nearest ``x = 1/2``; ``t`` is measured from the first snapshot.
    ``A`` defaults to ``4/c0``. A violation reports the earliest snapshot
    and node.
    """
    cid = "barrier"
    snaps = _snapshots(traj)
    if not snaps:
        return not_applicable(cid, "empty trajectory")
    const = constants or analytic_constants()
    A = const.A if A is None else float(A)
    s = _spec_s(traj)
    t0, f0 = snaps[0]
    grid = f0.grid
    i_half = grid.nearest(0.5)
    h = float(f0.values[i_half])
    scale = max(float(np.max(np.abs(f0.values))), 1e-300)
    meta = {"A": A, "h": h, "s": s, "half_node": float(grid.x[i_half])}
    if not _is_even(f0) or _orientation(f0) != 1:
        return not_applicable(cid, "initial data is not even and non-increasing", **meta)
    tol = float(np.max(np.abs(np.diff(f0.values)))) + _REL_FLOOR * scale
    checks, rows = [], []
    first_violation = None
    for t, f in snaps[1:]:
        tau = t - t0
        if tau <= 0:
            continue
        gap = barrier_profile(f.grid.x, tau, h, A, s) - f.values
        j = int(np.argmin(gap))
        m = float(gap[j])
        checks.append((m, tol, {"t": t, "x": float(f.grid.x[j])}))
        rows.append((t, _status(m, tol), m, tol))
        if m < -tol and first_violation is None:
            first_violation = {"t": t, "x": float(f.grid.x[j]), "margin": m}
    meta["first_violation"] = first_violation
    rep = _combine(cid, checks, meta, rows)
    if first_violation is not None:
        # the witness is the earliest violation, not the worst one
        rep = CertificateReport(cid, VIOLATED, rep.margin, rep.tolerance,
                                {"t": first_violation["t"], "x": first_violation["x"]}, meta, rep.rows)
    return rep


# --------------------------------------------------------------------------
# tracked maximum


def _argmax_refined(f: Field):
    """Sub-grid argmax by a parabola through the top node and its neighbours.

    Returns ``(X, i, plateau_width)``.
    """
    v = f.values
    i = int(np.argmax(v))
    scale = max(float(np.max(np.abs(v))), 1e-300)
    top = v >= v[i] - 1e-12 * scale
    lo = i
    while lo > 0 and top[lo - 1]:
        lo -= 1
    hi = i
    while hi < v.size - 1 and top[hi + 1]:
        hi += 1
    width = (hi - lo) * f.grid.h
    if lo != hi:
        i = (lo + hi) // 2
    x = f.grid.x
    if 0 < i < v.size - 1:
        den = v[i - 1] - 2 * v[i] + v[i + 1]
        off = 0.5 * (v[i - 1] - v[i + 1]) / den if den < 0 else 0.0
        return float(x[i] + np.clip(off, -0.5, 0.5) * f.grid.h), i, width
    return float(x[i]), i, width


def _quad_interp(values: np.ndarray, grid, i: int, X: float) -> float:
    if not 0 < i < values.size - 1:
        return float(values[i])
    r = (X - grid.x[i]) / grid.h
    a, b, c = values[i - 1], values[i], values[i + 1]
    return float(b + 0.5 * r * (c - a) + 0.5 * r * r * (a - 2 * b + c))


def _evolution_rhs(f: Field, i: int, backend=None) -> float:
    """``-theta_x^2/2 + (Lambda theta)^2/2 + (1/pi)|(H theta - H theta(X))/(x - X)|^2`` at node ``i``."""
    grid = f.grid
    x = grid.x
    Hf = hilbert(f, backend).values
    Lt = _lambda(f, 1.0, backend)
    dx = derivative(f.values, grid)
    with np.errstate(divide="ignore", invalid="ignore"):
        g = (Hf - Hf[i]) / (x - x[i])
    g[i] = derivative(Hf, grid)[i]
    gf = Field(grid, g)
    if not grid.periodic:
        gf = fit_tail(gf)
    return float(-0.5 * dx[i] ** 2 + 0.5 * Lt[i] ** 2 + hhalf_sq(gf) / np.pi)


def maxflow_tracker(traj, identity: bool = True) -> CertificateReport:
    """Track ``X(t) = argmax theta`` and ``y(t) = Lambda theta(t, X(t))``.

    Checks ``1/y(t1) - 1/y(t2) >= (t2 - t1)/2`` between consecutive
    snapshots with ``y > 0``, i.e. the integrated form of
    ``dy/dt >= y^2/2``. The tolerance propagates an operator error
    ``delta_y`` (one cell's worth of second differences) into ``1/y``.
    Snapshots failing :func:`is_resolved` are excluded from the check.
    The full evolution identity is evaluated at ``X`` and its residual
    against the centred time difference of ``y`` is reported.
    """
    cid = "maxflow"
    snaps = _snapshots(traj)
    if not snaps:
        return not_applicable(cid, "empty trajectory")
    backend = _spec_backend(traj)

    def one(item):
        t, f = item
        X, i, width = _argmax_refined(f)
        if width > PLATEAU_CELLS * f.grid.h:
            return t, X, np.nan, width, np.nan, np.nan
        Lt = _lambda(f, 1.0, backend)
        y = _quad_interp(Lt, f.grid, i, X)
        d2 = np.abs(np.diff(f.values, 2))
        dy = float(np.max(d2)) / f.grid.h if d2.size else 0.0
        rhs = _evolution_rhs(f, i, backend) if identity else np.nan
        if not is_resolved(f):
            dy = np.nan
        return t, X, y, width, dy, rhs

    out = _pmap(one, snaps)
    plateaus = [(t, w) for t, _, _, w, _, _ in out if w > PLATEAU_CELLS * snaps[0][1].grid.h]
    path = [(t, X, y) for t, X, y, _, _, _ in out]
    if plateaus:
        return not_applicable(cid, "argmax plateau wider than 4h", plateau=plateaus[0], path=path)
    checks, rows, ident = [], [], []
    for (t1, _, y1, _, d1, r1), (t2, X2, y2, _, d2, r2) in zip(out, out[1:]):
        dt = t2 - t1
        if not (y1 > 0 and y2 > 0) or dt <= 0 or np.isnan(d1 + d2):
            rows.append((t2, NOT_APPLICABLE, float("nan"), float("nan")))
            continue
        m = (1.0 / y1 - 1.0 / y2) - 0.5 * dt
        tol = d1 / y1**2 + d2 / y2**2
        checks.append((m, tol, {"t": t2, "X": X2}))
        rows.append((t2, _status(m, tol), m, tol))
        if identity:
            lhs = (y2 - y1) / dt
            rhs = 0.5 * (r1 + r2)
            ident.append((0.5 * (t1 + t2), lhs, rhs, abs(lhs - rhs) / max(abs(rhs), 1e-300)))
    meta = {"path": path, "identity": ident,
            "under_resolved": [t for t, _, _, _, dy, _ in out if np.isnan(dy)]}
    if ident:
        meta["identity_max_rel_residual"] = max(r[3] for r in ident)
    return _combine(cid, checks, meta, rows)


# --------------------------------------------------------------------------
# conjecture trackers (measurement only)


def holder_consistency_ratio(f: Field, A: float, n_points: int = 32) -> float:
    """``sup (theta(x1) - theta(x2)) / ((x2-x1)/x1)^{1/2} / max(|theta|_inf, A x1)``.

    ``x1`` runs over a geometric set in ``(8h, L/2]`` and ``x2 > x1`` over
    all nodes.
    """
    grid = f.grid
    o = grid.origin
    x, v = grid.x[o:], f.values[o:]
    if grid.periodic:
        x, v = x[: x.size // 2], v[: v.size // 2]
    lo, hi = 8 * grid.h, 0.5 * float(x[-1])
    if hi <= lo:
        return float("nan")
    idx = np.unique([int(np.argmin(np.abs(x - p))) for p in np.geomspace(lo, hi, n_points)])
    sup = float(np.max(np.abs(f.values)))
    best = 0.0
    for i in idx:
        dx = (x[i + 1 :] - x[i]) / x[i]
        r = np.abs(v[i] - v[i + 1 :]) / np.sqrt(dx)
        best = max(best, float(r.max()) / max(sup, A * x[i], 1e-300))
    return best


def conjecture_trackers(traj) -> CertificateReport:
    """Time series for the Hoelder-1/2 and ``Lambda theta`` lower-bound conjectures.

    Per snapshot: ``[theta]_{1/2} t^{3/2}/|theta_0|_inf^{1/2}``, ``min Lambda theta``
    and :func:`holder_consistency_ratio` with ``A = max(0, -min Lambda theta)``.
    The status is always ``NotApplicable``.
    """
    snaps = _snapshots(traj)
    if not snaps:
        return not_applicable("conjecture_trackers", "measurement", series=[])
    sup0 = float(np.max(np.abs(snaps[0][1].values)))
    backend = _spec_backend(traj)

    def one(item):
        t, f = item
        hol = holder_seminorm(f, 0.5)
        lmin = float(np.min(_lambda(f, 1.0, backend)))
        scaled = hol.seminorm * abs(t) ** 1.5 / np.sqrt(sup0) if sup0 > 0 else 0.0
        ratio = holder_consistency_ratio(f, max(0.0, -lmin))
        return (t, hol.seminorm, scaled, lmin, ratio)

    series = _pmap(one, snaps)
    return not_applicable("conjecture_trackers", "measurement", series=series,
                          columns=["t", "holder_half", "holder_scaled", "lambda_theta_min", "holder_ratio"])


# --------------------------------------------------------------------------
# stationary problem


def stationary_residual(theta: Field, f: Field, s: float = 0.0) -> float:
    u = _velocity(theta, s)
    return float(np.max(np.abs(u * derivative(theta.values, theta.grid) - f.values)))


def stationary_holder_certificate(
    theta: Field, f: Field, s: float = 0.0, gate: Optional[float] = None, constants: Optional[Constants] = None
) -> CertificateReport:
    """``|theta(x1) - theta(x2)| <= C |f|_inf^{1/2} |x1 - x2|^{(1+s)/2}`` over grid pairs.

    ``theta`` must solve ``u theta_x = f`` to within ``gate`` (default
    ``1e-6 max(|f|_inf, 1)``), otherwise the check is not applicable.
    ``C = 2(1+sqrt 2)/log 3`` at ``s = 0``.
    """
    cid = "stationary_holder"
    bad, _ = _precheck_line_even_monotone(cid, theta)
    if bad:
        return bad
    fmax = float(np.max(np.abs(f.values)))
    gate = 1e-6 * max(fmax, 1.0) if gate is None else gate
    res = stationary_residual(theta, f, s)
    if res > gate:
        return not_applicable(cid, "residual gate failed", residual=res, gate=gate)
    const = constants or analytic_constants()
    C = const.value("stationary_holder(0)") if s == 0.0 else stationary_holder_constant(s)
    L = theta.grid.L
    est = holder_seminorm(theta, (1.0 + s) / 2.0, sub_interval=(0.0, L))
    bound = C * np.sqrt(fmax)
    scale = max(float(np.max(np.abs(theta.values))), 1e-300)
    tol = _REL_FLOOR * scale
    m = bound - est.seminorm
    meta = {"C": C, "seminorm": est.seminorm, "bound": bound, "residual": res,
            "measured_constant": est.seminorm / np.sqrt(fmax) if fmax > 0 else np.inf}
    return CertificateReport(cid, _status(m, tol), m, tol, {"pair": est.witness_pair}, meta)


def log_modulus_certificate(theta: Field, constants: Optional[Constants] = None, max_nodes: int = 2048) -> CertificateReport:
    """``theta(x2) - theta(x1) <= c |theta|_{H^1/2} log(x1/(x1 - x2))^{-1/2}`` for ``0 < x2 < x1``.

    ``c = sqrt(pi/2)`` under the seminorm ``int theta Lambda theta``. Pairs
    are taken on at most ``max_nodes`` half-line nodes (uniform stride).
    """
    cid = "log_modulus"
    bad, sign = _precheck_line_even_monotone(cid, theta)
    if bad:
        return bad
    c = (constants or analytic_constants()).value("log_modulus")
    grid = theta.grid
    o = grid.origin
    x, v = grid.x[o + 1 :], sign * theta.values[o + 1 :]
    stride = max(1, x.size // max_nodes)
    x, v = x[::stride], v[::stride]
    norm = np.sqrt(max(hhalf_sq(theta), 0.0))
    worst, pair = -np.inf, None
    for j in range(1, x.size):
        x1 = x[j]
        lg = np.log(x1 / (x1 - x[:j]))
        lhs = v[:j] - v[j]
        r = lhs * np.sqrt(lg)
        i = int(np.argmax(r))
        if r[i] > worst:
            worst, pair = float(r[i]), (float(x[i]), float(x1))
    bound = c * norm
    scale = max(float(np.max(np.abs(theta.values))), 1e-300)
    tol = 1e-6 * bound + _REL_FLOOR * scale
    m = bound - worst
    return CertificateReport(cid, _status(m, tol), m, tol, {"pair": pair},
                             {"c": c, "hhalf": norm, "sup_lhs": worst,
                              "measured_constant": worst / norm if norm > 0 else 0.0})


# --------------------------------------------------------------------------
# per-snapshot records


@dataclass(frozen=True)
class DiagnosticsRecord:
    t: float
    norms: NormReport
    F_alpha: float
    lambda_theta_min: float
    holder_half: HolderEstimate
    degiorgi: tuple
    barrier_margin: float
    maxflow: tuple
    flags: tuple = ()

    def as_row(self) -> dict:
        row = {"t": self.t}
        row.update({f"norm_{k}": v for k, v in asdict(self.norms).items() if k != "backend"})
        row.update(F_alpha=self.F_alpha, lambda_theta_min=self.lambda_theta_min,
                   holder_half=self.holder_half.seminorm, barrier_margin=self.barrier_margin,
                   maxflow_X=self.maxflow[0], maxflow_lambda=self.maxflow[1])
        for k, a in enumerate(self.degiorgi):
            row[f"a_{k}"] = a
        row["flags"] = ";".join(self.flags)
        return row


def snapshot_recorder(
    initial: Field,
    weights: Optional[WeightPair] = None,
    k_max: int = 8,
    s: float = 0.0,
    constants: Optional[Constants] = None,
    t0: float = 0.0,
) -> Callable:
    """Build ``recorder(t, field) -> DiagnosticsRecord`` for :func:`ccf.solver.run`."""
    weights = weights or WeightPair()
    const = constants or analytic_constants()
    h = float(initial.values[initial.grid.nearest(0.5)])
    A = const.A

    def record(t: float, f: Field) -> DiagnosticsRecord:
        flags = []
        even = not f.grid.periodic and _is_even(f)
        if even:
            with warnings.catch_warnings(record=True) as caught:
                warnings.simplefilter("always", RuntimeWarning)
                F = lyapunov_F(f, weights)
            if caught:
                flags.append("F_overflow")
        else:
            F = float("nan")
            flags.append("not_even")
        Lt = _lambda(f, 1.0)
        X, i, _ = _argmax_refined(f)
        tau = t - t0
        bm = float(np.min(barrier_profile(f.grid.x, tau, h, A, s) - f.values)) if tau > 0 else float("inf")
        return DiagnosticsRecord(
            t=float(t),
            norms=norms(f),
            F_alpha=F,
            lambda_theta_min=float(Lt.min()),
            holder_half=holder_seminorm(f, 0.5),
            degiorgi=tuple(degiorgi_levels(f, k_max).tolist()),
            barrier_margin=bm,
            maxflow=(X, _quad_interp(Lt, f.grid, i, X)),
            flags=tuple(flags),
        )

    return record
