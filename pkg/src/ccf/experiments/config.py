"""Experiment configuration: JSON schema, validation and round-tripping.

A config is a JSON object with the blocks below; omitted keys take their
defaults and unknown keys are rejected.

``name``            label used for output files
``kind``            ``run`` | ``sweep`` | ``validate`` | ``selftest``
``grid``            ``{topology, n, L}``
``initial``         ``{kind, params}`` with kind ``bump`` | ``cusp_smoothed`` |
                    ``semicircle`` | ``lorentzian`` | ``file``
``spec``            ``{s, gamma, kappa, eps, backend}``
``scheme``          ``{advection, cfl, dt_floor, grad_max, enforce_even}``
``time``            ``{horizon, record_every, t0}``
``diagnostics``     ``{checks, alpha, variant, k_max, barrier_A_scale, min_shell_nodes}``
``sweep``           ``{eps, rescale}`` (``kind = sweep`` only)
``output``          ``{directory, formats}`` with formats from ``csv``, ``binary``, ``svg``
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Optional

KINDS = ("run", "sweep", "validate", "selftest")
INITIAL_KINDS = ("bump", "cusp_smoothed", "semicircle", "lorentzian", "file")
FORMATS = ("csv", "binary", "svg")

TRAJECTORY_CHECKS = (
    "pointwise",
    "telescoping",
    "riccati_F",
    "degiorgi",
    "interpolation",
    "barrier",
    "maxflow",
    "conjecture_trackers",
)
SWEEP_CHECKS = TRAJECTORY_CHECKS + ("linfty_decay",)
VALIDATE_CHECKS = ("semicircle_residual", "cusp_residual", "derived_constants", "conjecture_trackers",
                   "stationary_holder", "log_modulus")
SELFTEST_CHECKS = ("operator_gates", "identities", "prop_identity", "barrier_lower_bound")
CHECKS_BY_KIND = {"run": TRAJECTORY_CHECKS, "sweep": SWEEP_CHECKS,
                  "validate": VALIDATE_CHECKS, "selftest": SELFTEST_CHECKS}
# checks whose constants need the dyadic sum to converge
DRIFT_CHECKS = ("telescoping", "riccati_F")


class ConfigError(ValueError):
    """Raised with every violated constraint, one per entry of ``errors``."""

    def __init__(self, errors):
        self.errors = list(errors)
        super().__init__("invalid config:\n" + "\n".join(f"  - {e}" for e in self.errors))


@dataclass
class GridBlock:
    topology: str = "line"
    n: int = 4097
    L: float = 6.0


@dataclass
class InitialBlock:
    kind: str = "bump"
    params: dict = field(default_factory=dict)


@dataclass
class SpecBlock:
    s: float = 0.0
    gamma: float = 1.0
    kappa: float = 0.0
    eps: float = 0.0
    backend: Optional[str] = None


@dataclass
class SchemeBlock:
    advection: str = "upwind"
    cfl: float = 0.4
    dt_floor: float = 1e-12
    grad_max: Optional[float] = 1000.0
    enforce_even: Optional[bool] = None


@dataclass
class TimeBlock:
    horizon: float = 1.0
    record_every: float = 0.025
    t0: float = 0.0


@dataclass
class DiagnosticsBlock:
    checks: list = field(default_factory=list)
    alpha: float = 0.5
    variant: str = "inviscid"
    k_max: int = 8
    barrier_A_scale: float = 1.0
    min_shell_nodes: int = 8


@dataclass
class SweepBlock:
    eps: list = field(default_factory=list)
    rescale: list = field(default_factory=lambda: [1.0])


@dataclass
class OutputBlock:
    directory: str = "out"
    formats: list = field(default_factory=lambda: ["csv"])


_BLOCKS = {
    "grid": GridBlock,
    "initial": InitialBlock,
    "spec": SpecBlock,
    "scheme": SchemeBlock,
    "time": TimeBlock,
    "diagnostics": DiagnosticsBlock,
    "sweep": SweepBlock,
    "output": OutputBlock,
}


@dataclass
class ExperimentConfig:
    name: str = "experiment"
    kind: str = "run"
    grid: GridBlock = field(default_factory=GridBlock)
    initial: InitialBlock = field(default_factory=InitialBlock)
    spec: SpecBlock = field(default_factory=SpecBlock)
    scheme: SchemeBlock = field(default_factory=SchemeBlock)
    time: TimeBlock = field(default_factory=TimeBlock)
    diagnostics: DiagnosticsBlock = field(default_factory=DiagnosticsBlock)
    sweep: SweepBlock = field(default_factory=SweepBlock)
    output: OutputBlock = field(default_factory=OutputBlock)

    @property
    def checks(self) -> list:
        """Enabled checks with ``"all"`` expanded for this kind."""
        checks = list(self.diagnostics.checks)
        if "all" in checks:
            return list(CHECKS_BY_KIND[self.kind])
        return checks

    def to_dict(self) -> dict:
        return asdict(self)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2) + "\n"

    def sha256(self) -> str:
        canon = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canon.encode()).hexdigest()


def _block(cls, data, where: str, errors: list):
    if data is None:
        return cls()
    if not isinstance(data, dict):
        errors.append(f"{where}: expected an object")
        return cls()
    names = {f.name for f in fields(cls)}
    unknown = sorted(set(data) - names)
    if unknown:
        errors.append(f"{where}: unknown keys {unknown}")
    return cls(**{k: v for k, v in data.items() if k in names})


def from_dict(data: dict, validate_: bool = True) -> ExperimentConfig:
    """Build a config from parsed JSON; raises :class:`ConfigError`."""
    errors: list = []
    if not isinstance(data, dict):
        raise ConfigError(["config must be a JSON object"])
    top = {f.name for f in fields(ExperimentConfig)}
    unknown = sorted(set(data) - top)
    if unknown:
        errors.append(f"unknown top-level keys {unknown}")
    kw = {k: _block(cls, data.get(k), k, errors) for k, cls in _BLOCKS.items()}
    cfg = ExperimentConfig(name=str(data.get("name", "experiment")), kind=data.get("kind", "run"), **kw)
    if validate_:
        errors.extend(validate(cfg))
    if errors:
        raise ConfigError(errors)
    return cfg


def loads(text: str) -> ExperimentConfig:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError([f"malformed JSON: {exc}"]) from None
    return from_dict(data)


def load(path) -> ExperimentConfig:
    return loads(Path(path).read_text())


def _is_pow2(n: int) -> bool:
    return n > 0 and n & (n - 1) == 0


def validate(cfg: ExperimentConfig) -> list:
    """Every violated constraint, as human-readable strings (empty when valid)."""
    e: list = []
    g, sp, sc, tm, dg = cfg.grid, cfg.spec, cfg.scheme, cfg.time, cfg.diagnostics
    if cfg.kind not in KINDS:
        e.append(f"kind {cfg.kind!r} is not one of {list(KINDS)}")
    if g.topology not in ("line", "periodic"):
        e.append(f"grid.topology {g.topology!r} must be 'line' or 'periodic'")
    if not isinstance(g.n, int) or g.n < 8:
        e.append("grid.n must be an integer >= 8")
    elif g.topology == "line" and g.n % 2 == 0:
        e.append(f"grid.n = {g.n} must be odd on a line grid (node at the origin)")
    if not g.L > 0:
        e.append("grid.L must be positive")
    spectral = sp.backend == "spectral" or sc.advection == "spectral"
    if spectral:
        if g.topology != "periodic":
            e.append("spectral operators need a periodic grid")
        if isinstance(g.n, int) and not _is_pow2(g.n):
            e.append(f"grid.n = {g.n} must be a power of two for spectral operators")
    if sp.backend not in (None, "spectral", "quadrature"):
        e.append(f"spec.backend {sp.backend!r} must be null, 'spectral' or 'quadrature'")
    if not -1.0 < sp.s < 1.0:
        e.append(f"spec.s = {sp.s} must lie in (-1, 1)")
    if not 0.0 < sp.gamma <= 2.0:
        e.append(f"spec.gamma = {sp.gamma} must lie in (0, 2]")
    if sp.kappa < 0 or sp.eps < 0:
        e.append("spec.kappa and spec.eps must be non-negative")
    if sc.advection not in ("upwind", "spectral"):
        e.append(f"scheme.advection {sc.advection!r} must be 'upwind' or 'spectral'")
    if not 0.0 < sc.cfl < 1.0:
        e.append(f"scheme.cfl = {sc.cfl} must lie in (0, 1)")
    if sc.grad_max is not None and not sc.grad_max > 0:
        e.append("scheme.grad_max must be positive")
    if not sc.dt_floor > 0:
        e.append("scheme.dt_floor must be positive")
    if not tm.horizon > 0 or not tm.record_every > 0:
        e.append("time.horizon and time.record_every must be positive")
    if cfg.initial.kind not in INITIAL_KINDS:
        e.append(f"initial.kind {cfg.initial.kind!r} is not one of {list(INITIAL_KINDS)}")
    if cfg.initial.kind == "file" and "path" not in cfg.initial.params:
        e.append("initial.kind 'file' needs params.path")
    if cfg.initial.kind == "semicircle" and tm.t0 == 0.0:
        e.append("semicircle data are singular at t = 0; set time.t0")

    allowed = CHECKS_BY_KIND.get(cfg.kind, ())
    for c in dg.checks:
        if c != "all" and c not in allowed:
            e.append(f"check {c!r} is not available for kind {cfg.kind!r} (choose from {list(allowed)})")
    checks = cfg.checks if cfg.kind in KINDS else []
    if not 0.0 < dg.alpha < 1.0:
        e.append(f"diagnostics.alpha = {dg.alpha} must lie in (0, 1)")
    if dg.variant not in ("inviscid", "dissipative"):
        e.append(f"diagnostics.variant {dg.variant!r} must be 'inviscid' or 'dissipative'")
    if any(c in checks for c in DRIFT_CHECKS) and dg.alpha <= abs(sp.s):
        e.append(f"alpha = {dg.alpha} <= |s| = {abs(sp.s)}: the drift telescoping bound needs alpha > |s| "
                 "(α ≤ |s| makes the dyadic constant infinite)")
    if dg.variant == "dissipative" and "riccati_F" in checks:
        bound = (1.0 - dg.alpha) / 2.0
        if not sp.gamma < bound:
            e.append(f"gamma = {sp.gamma} violates γ < (1−α)/2 = {bound:g} required by the dissipative "
                     "Riccati certificate")
    if not isinstance(dg.k_max, int) or dg.k_max < 1:
        e.append("diagnostics.k_max must be a positive integer")
    if not dg.barrier_A_scale > 0:
        e.append("diagnostics.barrier_A_scale must be positive")

    if cfg.kind == "sweep":
        eps = cfg.sweep.eps
        if not eps:
            e.append("sweep.eps must list at least one viscosity")
        elif any(not x > 0 for x in eps):
            e.append("sweep.eps values must be positive")
        elif any(b >= a for a, b in zip(eps, eps[1:])):
            e.append("sweep.eps must be strictly decreasing")
        if not cfg.sweep.rescale or any(not b > 0 for b in cfg.sweep.rescale):
            e.append("sweep.rescale must list positive factors")
    bad = [f for f in cfg.output.formats if f not in FORMATS]
    if bad:
        e.append(f"output.formats {bad} not in {list(FORMATS)}")
    return e
