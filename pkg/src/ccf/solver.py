"""Time stepping for ``theta_t + (Lambda^s H theta) theta_x + kappa Lambda^gamma theta = eps theta_xx``.

The default scheme is explicit Euler with first-order upwinding on the sign
of the drift velocity and a three-point viscous stencil. For ``kappa = 0``
every update is a convex combination of neighbouring values, so the discrete
maximum principle holds exactly. A dealiased pseudo-spectral RK4 mode is
available on periodic grids for smooth-phase studies.
"""

from __future__ import annotations

import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Callable, Optional

import numpy as np

from .core_fields import Field, Symmetry, Topology, max_gradient, mirror_average
from .ops import OperatorBackend, ResolutionWarning, default_backend, drift_velocity, frac_laplacian
from .ops.operators import frac_laplacian_constant
from .ops.quadrature import frac_laplacian_diagonal

DEFAULT_CFL = 0.4
DEFAULT_DT_FLOOR = 1e-12
DEFAULT_GRAD_FACTOR = 1e3


class CFLError(ValueError):
    pass


class NumericalFailure(RuntimeError):
    pass


@dataclass(frozen=True)
class OperatorSpec:
    """Equation parameters.

    Parameters
    ----------
    s : float
        Drift exponent, ``u = Lambda^s H theta``, in ``(-1, 1)``.
    gamma : float
        Order of the fractional dissipation, in ``(0, 2]``.
    kappa : float
        Coefficient of ``Lambda^gamma``.
    eps : float
        Viscosity.
    backend : OperatorBackend, optional
        Operator discretisation; defaults by grid topology.
    """

    s: float = 0.0
    gamma: float = 1.0
    kappa: float = 0.0
    eps: float = 0.0
    backend: Optional[OperatorBackend] = None

    def __post_init__(self):
        if not -1.0 < self.s < 1.0:
            raise ValueError("s must lie in (-1, 1)")
        if not 0.0 < self.gamma <= 2.0:
            raise ValueError("gamma must lie in (0, 2]")
        if self.kappa < 0 or self.eps < 0:
            raise ValueError("kappa and eps must be non-negative")


@dataclass(frozen=True)
class SchemeConfig:
    """Discretisation choices for :func:`step` and :func:`run`.

    ``grad_max=None`` means ``1e3`` times the initial ``max|theta_x|``;
    ``enforce_even=None`` means "on for even initial data".
    """

    advection: str = "upwind"
    cfl: float = DEFAULT_CFL
    dt_floor: float = DEFAULT_DT_FLOOR
    grad_max: Optional[float] = None
    enforce_even: Optional[bool] = None

    def __post_init__(self):
        if self.advection not in ("upwind", "spectral"):
            raise ValueError("advection must be 'upwind' or 'spectral'")
        if not 0.0 < self.cfl < 1.0:
            raise ValueError("cfl must lie in (0, 1)")
        if self.grad_max is not None and self.grad_max <= 0:
            raise ValueError("grad_max must be positive")
        if self.dt_floor <= 0:
            raise ValueError("dt_floor must be positive")


@dataclass(frozen=True)
class Verdict:
    kind: str  # "completed" | "blowup" | "step_floor" | "failure"
    t: float
    reason: str = ""

    @property
    def blowup(self) -> bool:
        return self.kind == "blowup"


@dataclass
class Trajectory:
    """Snapshots, per-snapshot records and per-step monitors of one run."""

    spec: OperatorSpec
    scheme: SchemeConfig
    times: list = field(default_factory=list)
    snapshots: list = field(default_factory=list)
    records: list = field(default_factory=list)
    verdict: Optional[Verdict] = None
    # per accepted step: time, max|theta_x|, max theta, min theta
    monitor: list = field(default_factory=list)

    def monitor_array(self) -> np.ndarray:
        return np.asarray(self.monitor, dtype=float).reshape(-1, 4)

    def max_gradient_at(self, t: float) -> float:
        """``max|theta_x|`` at the last step not after ``t``."""
        m = self.monitor_array()
        i = np.searchsorted(m[:, 0], t, side="right") - 1
        return float(m[max(i, 0), 1])


# --------------------------------------------------------------------------
# spatial operators


def _backend(f: Field, spec: OperatorSpec) -> OperatorBackend:
    return spec.backend or default_backend(f)


def _neighbours(v: np.ndarray, periodic: bool):
    if periodic:
        return np.roll(v, 1), np.roll(v, -1)
    left = np.empty_like(v)
    right = np.empty_like(v)
    left[1:] = v[:-1]
    left[0] = v[0]
    right[:-1] = v[1:]
    right[-1] = v[-1]
    return left, right


def velocity(f: Field, spec: OperatorSpec) -> np.ndarray:
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", ResolutionWarning)
        return drift_velocity(f, spec.s, _backend(f, spec)).values


def _dissipation(f: Field, spec: OperatorSpec) -> np.ndarray:
    if spec.kappa == 0:
        return 0.0
    if spec.gamma == 2.0:
        left, right = _neighbours(f.values, f.grid.periodic)
        return -(left - 2 * f.values + right) / f.grid.h**2
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", ResolutionWarning)
        return frac_laplacian(f, spec.gamma, _backend(f, spec)).values


def stable_dt(f: Field, spec: OperatorSpec, u: Optional[np.ndarray] = None) -> float:
    """Largest explicit step keeping every update a convex combination."""
    h = f.grid.h
    u = velocity(f, spec) if u is None else u
    rate = np.abs(u) / h + 2.0 * spec.eps / h**2
    if spec.kappa > 0:
        if spec.gamma == 2.0:
            rate = rate + 2.0 * spec.kappa / h**2
        elif f.grid.topology == Topology.LINE and _backend(f, spec).kind == "quadrature":
            rate = rate + spec.kappa * frac_laplacian_constant(spec.gamma) * frac_laplacian_diagonal(f.grid, spec.gamma)
        else:
            kmax = np.pi / h
            rate = rate + spec.kappa * kmax**spec.gamma
    r = float(np.max(rate))
    return np.inf if r == 0 else 1.0 / r


def _upwind_rhs(f: Field, spec: OperatorSpec, u: np.ndarray) -> np.ndarray:
    v = f.values
    h = f.grid.h
    left, right = _neighbours(v, f.grid.periodic)
    back = (v - left) / h
    fwd = (right - v) / h
    rhs = -(np.maximum(u, 0.0) * back + np.minimum(u, 0.0) * fwd)
    if spec.eps > 0:
        rhs = rhs + spec.eps * (left - 2 * v + right) / h**2
    if spec.kappa > 0:
        rhs = rhs - spec.kappa * _dissipation(f, spec)
    return rhs


def _spectral_rhs(v: np.ndarray, f: Field, spec: OperatorSpec, backend: OperatorBackend) -> np.ndarray:
    n = f.grid.n
    k = 2.0 * np.pi * np.fft.fftfreq(n, d=f.grid.h)
    keep = np.abs(k) <= backend.dealias * np.abs(k).max()
    c = np.fft.fft(v) * keep
    with np.errstate(divide="ignore"):
        mult = 1j * np.sign(k) * np.where(k == 0, 0.0, np.abs(k)) ** spec.s
    mult[k == 0] = 0.0
    u = np.real(np.fft.ifft(mult * c))
    vx = np.real(np.fft.ifft(1j * k * c))
    out = -np.fft.fft(u * vx) * keep
    out -= spec.eps * k**2 * c
    if spec.kappa > 0:
        out -= spec.kappa * np.abs(k) ** spec.gamma * c
    return np.real(np.fft.ifft(out))


def _enforce(f: Field, scheme: SchemeConfig) -> bool:
    if scheme.enforce_even is None:
        return f.symmetry is not Symmetry.NONE
    return scheme.enforce_even


def step(f: Field, spec: OperatorSpec, scheme: SchemeConfig, dt: float, u: Optional[np.ndarray] = None) -> Field:
    """Advance ``f`` by ``dt``.

    Raises
    ------
    CFLError
        If ``dt`` exceeds ``cfl`` times the stable step (upwind mode).
    NumericalFailure
        If the update produces non-finite values.

    ``u`` may pass a precomputed drift velocity for ``f``.
    """
    if dt < 0:
        raise ValueError("dt must be non-negative")
    if scheme.advection == "spectral":
        if f.grid.topology != Topology.PERIODIC:
            raise ValueError("spectral advection requires a periodic grid")
        backend = OperatorBackend("spectral", (spec.backend or OperatorBackend("spectral")).dealias)
        v = f.values
        k1 = _spectral_rhs(v, f, spec, backend)
        k2 = _spectral_rhs(v + 0.5 * dt * k1, f, spec, backend)
        k3 = _spectral_rhs(v + 0.5 * dt * k2, f, spec, backend)
        k4 = _spectral_rhs(v + dt * k3, f, spec, backend)
        new = v + dt / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)
    else:
        u = velocity(f, spec) if u is None else u
        limit = scheme.cfl * stable_dt(f, spec, u)
        if dt > limit * (1 + 1e-12):
            raise CFLError(f"dt={dt:.3e} exceeds the CFL limit {limit:.3e}")
        new = f.values + dt * _upwind_rhs(f, spec, u)
    if not np.all(np.isfinite(new)):
        raise NumericalFailure("non-finite values after step")
    if _enforce(f, scheme):
        new = mirror_average(new, f.grid)
    # monotonicity is monitored by diagnostics, never projected
    sym = Symmetry.EVEN if f.symmetry is not Symmetry.NONE else Symmetry.NONE
    return Field(f.grid, new, sym, None, ())


def _spectral_dt(f: Field, spec: OperatorSpec, cfl: float) -> float:
    h = f.grid.h
    u = np.max(np.abs(velocity(f, spec)))
    kmax = np.pi / h
    rate = u * kmax + spec.eps * kmax**2 + spec.kappa * kmax**spec.gamma
    return np.inf if rate == 0 else 2.5 * cfl / rate


# --------------------------------------------------------------------------
# runs


def _default_recorder(t: float, f: Field):
    return None


def run(
    initial: Field,
    spec: OperatorSpec,
    scheme: SchemeConfig,
    horizon: float,
    record_every: float,
    recorder: Optional[Callable] = None,
    t0: float = 0.0,
) -> Trajectory:
    """Integrate from ``t0`` to ``t0 + horizon`` with adaptive steps.

    Snapshots are taken at ``t0`` and every ``record_every``; ``recorder(t,
    field)`` is called on each snapshot and its result stored in
    ``records``. The run stops early when ``max|theta_x|`` exceeds
    ``grad_max`` or the step falls below ``dt_floor``.
    """
    if horizon <= 0 or record_every <= 0:
        raise ValueError("horizon and record_every must be positive")
    recorder = recorder or _default_recorder
    traj = Trajectory(spec, scheme)
    f = initial
    if _enforce(f, scheme) and f.symmetry is Symmetry.NONE:
        f = Field(f.grid, mirror_average(f.values, f.grid), Symmetry.NONE, None, ())
    g0 = max_gradient(f)
    grad_max = scheme.grad_max if scheme.grad_max is not None else DEFAULT_GRAD_FACTOR * max(g0, 1e-300)
    t = t0
    t_end = t0 + horizon
    nrec = int(np.floor(horizon / record_every + 1e-9))
    rec_times = [t0 + (k + 1) * record_every for k in range(nrec)]
    if not rec_times or rec_times[-1] < t_end - 1e-12 * max(1.0, abs(t_end)):
        rec_times.append(t_end)

    def snapshot(t, f):
        traj.times.append(t)
        traj.snapshots.append(f)
        traj.records.append(recorder(t, f))

    snapshot(t, f)
    traj.monitor.append((t, g0, float(f.values.max()), float(f.values.min())))
    k = 0
    while k < len(rec_times):
        target = rec_times[k]
        u = None
        if scheme.advection == "spectral":
            dt = _spectral_dt(f, spec, scheme.cfl)
        else:
            u = velocity(f, spec)
            dt = scheme.cfl * stable_dt(f, spec, u)
        if not np.isfinite(dt):
            dt = target - t
        if target - t <= dt * (1 + 1e-9):
            dt = target - t
            hit = True
        else:
            hit = False
        if dt < scheme.dt_floor and not hit:
            traj.verdict = Verdict("step_floor", t, f"dt={dt:.3e} below floor")
            snapshot(t, f)
            return traj
        try:
            f = step(f, spec, scheme, dt, u)
        except NumericalFailure as exc:
            traj.verdict = Verdict("failure", t, str(exc))
            return traj
        t = target if hit else t + dt
        g = max_gradient(f)
        traj.monitor.append((t, g, float(f.values.max()), float(f.values.min())))
        if g > grad_max:
            snapshot(t, f)
            traj.verdict = Verdict("blowup", t, f"max|theta_x|={g:.4g} exceeded {grad_max:.4g}")
            return traj
        if hit:
            snapshot(t, f)
            k += 1
    traj.verdict = Verdict("completed", t)
    return traj


def _workers() -> int:
    import os

    try:
        return max(1, int(os.environ.get("CCF_THREADS", "0")) or os.cpu_count() or 1)
    except ValueError:
        return 1


@dataclass
class SweepResult:
    eps_list: list
    trajectories: list
    # (eps_i, eps_j) -> max over common snapshot times of the L-infinity distance
    distances: dict

    def __iter__(self):
        return iter(self.trajectories)

    def __len__(self):
        return len(self.trajectories)

    def __getitem__(self, i):
        return self.trajectories[i]


def vanishing_viscosity_sweep(
    initial: Field,
    spec: OperatorSpec,
    scheme: SchemeConfig,
    eps_list,
    horizon: float,
    record_every: float,
    recorder: Optional[Callable] = None,
    workers: Optional[int] = None,
) -> SweepResult:
    """Independent runs for each viscosity in ``eps_list`` (strictly decreasing)."""
    eps_list = [float(e) for e in eps_list]
    if any(e <= 0 for e in eps_list):
        raise ValueError("viscosities must be positive")
    if any(b >= a for a, b in zip(eps_list, eps_list[1:])):
        raise ValueError("eps_list must be strictly decreasing")
    specs = [replace(spec, eps=e) for e in eps_list]

    def one(sp):
        return run(initial, sp, scheme, horizon, record_every, recorder)

    n = min(len(specs), workers or _workers())
    if n > 1:
        with ThreadPoolExecutor(n) as pool:
            trajs = list(pool.map(one, specs))
    else:
        trajs = [one(sp) for sp in specs]
    distances = {}
    for i in range(len(trajs)):
        for j in range(i + 1, len(trajs)):
            a, b = trajs[i], trajs[j]
            common = sorted(set(a.times) & set(b.times))
            d = 0.0
            for t in common:
                fa = a.snapshots[a.times.index(t)].values
                fb = b.snapshots[b.times.index(t)].values
                d = max(d, float(np.max(np.abs(fa - fb))))
            distances[(eps_list[i], eps_list[j])] = d
    return SweepResult(eps_list, trajs, distances)
