"""Execute an :class:`ExperimentConfig` and write its artifacts.

Output directory layout (all byte-deterministic for a fixed config and
build, except ``timing.json``):

``manifest.json``         config hash, code version, constants, verdicts, check summaries
``config.json``           the normalised config
``checks.csv``            one row per (trajectory, check)
``check_rows.csv``        one row per (trajectory, check, snapshot)
``records[_label].csv``   one row per snapshot, columns as ``DiagnosticsRecord.as_row``
``trackers[_label].csv``  conjecture tracker series
``sweep.csv``             per-run summary of a sweep
``trajectory[_label]/``   ``index.json`` plus one ``.ccf`` file per snapshot (format ``binary``)
``*.svg``                 plots (format ``svg``)
``timing.json``           wall-clock seconds
"""

from __future__ import annotations

import csv
import io
import json
import math
import time
import warnings
from dataclasses import dataclass, field, replace
from pathlib import Path
from types import SimpleNamespace
from typing import Optional, Sequence, Union

import numpy as np

from .. import __version__
from ..core_fields import Field, Symmetry, field_to_bytes, field_from_bytes, make_grid, read_binary, read_csv
from ..diagnostics import (
    NOT_APPLICABLE,
    VIOLATED,
    CertificateReport,
    WeightPair,
    barrier_certificate,
    conjecture_trackers,
    degiorgi_certificate,
    fold_reports,
    interpolation_certificate,
    linfty_decay_certificate,
    log_modulus_certificate,
    lyapunov_F,
    maxflow_tracker,
    pointwise_trajectory_certificate,
    riccati_coefficient,
    riccati_F_certificate,
    snapshot_recorder,
    stationary_holder_certificate,
    telescoping_trajectory_certificate,
    truncations,
)
from ..exact_solutions import expanding_semicircle, shrinking_semicircle
from ..ops import OperatorBackend, ResolutionWarning, analytic_constants, derive_constants, drift_velocity
from ..solver import OperatorSpec, SchemeConfig, Trajectory, Verdict, run, vanishing_viscosity_sweep
from . import gates
from .config import ExperimentConfig, load
from .plots import render_plots

VERDICT_NAMES = {
    "completed": "CompletedHorizon",
    "blowup": "BlowupIndicated",
    "step_floor": "StepFloorHit",
    "failure": "NumericalFailure",
}
EXIT_OK, EXIT_VALIDATION, EXIT_VIOLATION, EXIT_NUMERICAL = 0, 2, 3, 4
# conjecture-tracker semicircle times
EXPANDING_TIMES = (0.25, 0.5, 0.75, 1.0)
SHRINKING_TIMES = (-1.0, -0.5, -0.25, -0.125)


# --------------------------------------------------------------------------
# building blocks


def _bump(x, amplitude=5.0, width=1.0):
    return amplitude * np.exp(-((x / width) ** 2))


def _cusp_smoothed(x, amplitude=1.0, delta=0.05, radius=1.0):
    return amplitude * np.clip(np.sqrt(radius) - (x * x + delta * delta) ** 0.25, 0.0, None)


def _lorentzian(x, amplitude=1.0, width=1.0):
    return amplitude / (1.0 + (x / width) ** 2)


PROFILES = {"bump": _bump, "cusp_smoothed": _cusp_smoothed, "lorentzian": _lorentzian}


def initial_field(cfg: ExperimentConfig, b: float = 1.0) -> Field:
    """Initial data of ``cfg``, rescaled to ``theta_0(b x)/b``.

    The rescaling maps solutions of the inviscid equation to solutions and
    leaves ``|theta(T)|_inf (T/|theta_0|_1)^{1/2}`` unchanged.
    """
    g = cfg.grid
    grid = make_grid(g.topology, g.n, g.L)
    kind, params = cfg.initial.kind, dict(cfg.initial.params)
    if kind == "file":
        path = Path(params["path"])
        f = read_binary(path) if path.suffix == ".ccf" else read_csv(path, grid.topology, Symmetry.NONE)
        return f if b == 1.0 else _rescaled(f, b)
    if kind == "semicircle":
        sign = params.get("sign", "expanding")
        sol = expanding_semicircle(params.get("C", 1.0)) if sign == "expanding" else shrinking_semicircle(params.get("C", 1.0))
        fn = lambda y: sol(cfg.time.t0, b * y) / b
        return Field(grid, fn(grid.x), Symmetry.EVEN)
    prof = PROFILES[kind]
    fn = lambda y: prof(b * np.asarray(y, dtype=float), **params) / b
    tail = None if grid.periodic else fn
    return Field(grid, fn(grid.x), Symmetry.EVEN_MONOTONE, tail)


def _rescaled(f: Field, b: float) -> Field:
    return f.with_values(np.interp(b * f.grid.x, f.grid.x, f.values) / b)


def build_spec(cfg: ExperimentConfig, eps: Optional[float] = None) -> OperatorSpec:
    sp = cfg.spec
    backend = OperatorBackend(sp.backend) if sp.backend else None
    return OperatorSpec(sp.s, sp.gamma, sp.kappa, sp.eps if eps is None else eps, backend)


def build_scheme(cfg: ExperimentConfig) -> SchemeConfig:
    sc = cfg.scheme
    return SchemeConfig(sc.advection, sc.cfl, sc.dt_floor, sc.grad_max, sc.enforce_even)


def build_weights(cfg: ExperimentConfig) -> WeightPair:
    return WeightPair(cfg.diagnostics.alpha, cfg.diagnostics.variant)


def forecast_time(f0: Field, weights: WeightPair, s: float = 0.0) -> float:
    """``1/(k F(0))``; ``k`` uses the closed-form ``c_alpha`` bound at ``s = 0``
    and the exact dyadic sum otherwise (no closed form is available there)."""
    F0 = lyapunov_F(f0, weights)
    k = riccati_coefficient(weights, s, exact=s != 0.0)
    return 1.0 / (k * F0) if F0 > 0 else math.inf


# --------------------------------------------------------------------------
# certification


def certify_trajectory(traj, checks: Sequence[str], weights: Optional[WeightPair] = None,
                       k_max: int = 8, barrier_A_scale: float = 1.0, constants=None) -> list:
    """Run the trajectory-level ``checks`` in order; returns their reports."""
    const = constants or analytic_constants()
    weights = weights or WeightPair()
    out = []
    for c in checks:
        if c == "pointwise":
            out.append(pointwise_trajectory_certificate(traj))
        elif c == "telescoping":
            out.append(telescoping_trajectory_certificate(traj, weights, constants=const))
        elif c == "riccati_F":
            out.append(riccati_F_certificate(traj, weights, const))
        elif c == "degiorgi":
            out.append(degiorgi_certificate(traj, k_max, const))
        elif c == "interpolation":
            items = []
            for t, f in zip(traj.times, traj.snapshots):
                if f.values.min() < 0:
                    continue
                reps = [(t, interpolation_certificate(fk, const)) for fk in truncations(f, k_max)]
                items.append((t, fold_reports("interpolation", reps)))
            out.append(fold_reports("interpolation", items))
        elif c == "barrier":
            out.append(barrier_certificate(traj, const.A * barrier_A_scale, const))
        elif c == "maxflow":
            out.append(maxflow_tracker(traj))
        elif c == "conjecture_trackers":
            out.append(conjecture_trackers(traj))
        else:
            raise ValueError(f"unknown trajectory check {c!r}")
    return out


def semicircle_tracker_reports(n: int, L: float = 2.0) -> list:
    """Conjecture trackers on exact expanding and shrinking semicircle snapshots."""
    grid = make_grid("line", n, L)
    out = []
    for name, sol, times in (("expanding", expanding_semicircle(), EXPANDING_TIMES),
                             ("shrinking", shrinking_semicircle(), SHRINKING_TIMES)):
        snaps = [sol.field(grid, t) for t in times]
        traj = SimpleNamespace(times=list(times), snapshots=snaps, spec=None)
        rep = conjecture_trackers(traj)
        rep.meta["solution"] = name
        out.append(rep)
    return out


def forward_stationary_pair(n: int = 2049, L: float = 4.0, s: float = 0.0):
    """Smoothed cusp ``theta`` and ``f = (Lambda^s H theta) theta_x`` computed from it."""
    from ..core_fields import derivative

    grid = make_grid("line", n, L)
    theta = Field(grid, _cusp_smoothed(grid.x), Symmetry.EVEN_MONOTONE, lambda y: _cusp_smoothed(y))
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", ResolutionWarning)
        u = drift_velocity(theta, s).values
    f = Field(grid, u * derivative(theta.values, grid), Symmetry.NONE)
    return theta, f


def validate_reports(checks: Sequence[str], n: int) -> list:
    out = []
    for c in checks:
        if c == "semicircle_residual":
            out.append(gates.semicircle_residual_gate(n))
        elif c == "cusp_residual":
            out.append(gates.cusp_residual_gate(n))
        elif c == "derived_constants":
            out.extend(gates.derived_constant_gates(n))
        elif c == "conjecture_trackers":
            out.extend(semicircle_tracker_reports(min(n, 4097)))
        elif c == "stationary_holder":
            theta, f = forward_stationary_pair()
            out.append(stationary_holder_certificate(theta, f))
        elif c == "log_modulus":
            theta, _ = forward_stationary_pair()
            out.append(log_modulus_certificate(theta))
    return out


def selftest_reports(checks: Sequence[str]) -> list:
    out = []
    for c in checks:
        if c == "operator_gates":
            out.extend(gates.operator_gates())
        elif c == "identities":
            out.extend(gates.identity_gates())
        elif c == "prop_identity":
            out.extend(gates.prop_identity_gates())
        elif c == "barrier_lower_bound":
            out.append(gates.barrier_lower_bound_gate())
    return out


# --------------------------------------------------------------------------
# serialisation


def clean(obj):
    """JSON-safe copy: numpy scalars/arrays to Python, non-finite floats to strings."""
    if isinstance(obj, dict):
        return {str(k): clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return clean(obj.tolist())
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        return v if math.isfinite(v) else repr(v)
    if isinstance(obj, Symmetry):
        return obj.value
    if obj is None or isinstance(obj, (str, int)):
        return obj
    return repr(obj)


def dumps(obj) -> str:
    return json.dumps(clean(obj), sort_keys=True, indent=2, ensure_ascii=False) + "\n"


def _cell(v):
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    if isinstance(v, (dict, list, tuple)):
        return json.dumps(clean(v), sort_keys=True)
    return "" if v is None else str(v)


def to_csv(header: Sequence[str], rows: Sequence[Sequence]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([_cell(v) for v in r])
    return buf.getvalue()


class OutputWriter:
    """Single writer per output directory; files are flushed in sorted order."""

    def __init__(self, directory):
        self.directory = Path(directory)
        self.files: dict = {}

    def add(self, name: str, data: Union[str, bytes]):
        self.files[name] = data.encode() if isinstance(data, str) else data

    def flush(self) -> list:
        self.directory.mkdir(parents=True, exist_ok=True)
        for name in sorted(self.files):
            p = self.directory / name
            p.parent.mkdir(parents=True, exist_ok=True)
            p.write_bytes(self.files[name])
        return sorted(self.files)


def trajectory_files(traj, prefix: str) -> dict:
    index = {"times": traj.times, "spec": {k: getattr(traj.spec, k) for k in ("s", "gamma", "kappa", "eps")},
             "verdict": verdict_dict(traj.verdict), "files": []}
    out = {}
    for i, f in enumerate(traj.snapshots):
        name = f"snap_{i:04d}.ccf"
        index["files"].append(name)
        out[f"{prefix}/{name}"] = field_to_bytes(f)
    out[f"{prefix}/index.json"] = dumps(index).encode()
    return out


def load_trajectory(directory) -> Trajectory:
    """Read a trajectory written with output format ``binary``."""
    d = Path(directory)
    index = json.loads((d / "index.json").read_text())
    traj = Trajectory(OperatorSpec(**index["spec"]), SchemeConfig())
    traj.times = [float(t) for t in index["times"]]
    traj.snapshots = [field_from_bytes((d / name).read_bytes()) for name in index["files"]]
    traj.records = [None] * len(traj.times)
    v = index.get("verdict")
    if v:
        kind = {name: k for k, name in VERDICT_NAMES.items()}[v["kind"]]
        traj.verdict = Verdict(kind, float(v["t"]), v.get("reason", ""))
    return traj


def verdict_dict(v: Optional[Verdict]) -> Optional[dict]:
    if v is None:
        return None
    return {"kind": VERDICT_NAMES[v.kind], "t": float(v.t), "reason": v.reason}


def report_summary(label: str, r: CertificateReport) -> dict:
    meta = {k: v for k, v in r.meta.items() if k not in ("series", "shells", "rows")}
    return {"label": label, "check_id": r.check_id, "status": r.status, "margin": r.margin,
            "tolerance": r.tolerance, "within_10x": r.within(), "location": r.location, "meta": meta}


# --------------------------------------------------------------------------
# manifest


@dataclass
class RunManifest:
    name: str
    kind: str
    config_sha256: str
    code_version: str
    constants: list
    verdicts: dict
    checks: list
    summary: dict = field(default_factory=dict)
    files: list = field(default_factory=list)
    wall_clock: float = 0.0

    def to_dict(self) -> dict:
        """Everything except the wall-clock time, which lives in ``timing.json``."""
        return {"name": self.name, "kind": self.kind, "config_sha256": self.config_sha256,
                "code_version": self.code_version, "constants": self.constants,
                "verdicts": self.verdicts, "checks": self.checks, "summary": self.summary,
                "files": self.files}

    @property
    def violations(self) -> list:
        return [c for c in self.checks if c["status"] == VIOLATED and not c["within_10x"]]

    @property
    def exit_code(self) -> int:
        if any(v and v["kind"] == "NumericalFailure" for v in self.verdicts.values()):
            return EXIT_NUMERICAL
        if self.violations:
            return EXIT_VIOLATION
        return EXIT_OK


class _Collector:
    def __init__(self):
        self.reports: list = []
        self.files: dict = {}
        self.verdicts: dict = {}

    def trajectory(self, label: str, traj, cfg: ExperimentConfig, checks: Sequence[str], weights, const):
        suffix = f"_{label}" if label else ""
        key = label or "run"
        self.verdicts[key] = verdict_dict(traj.verdict)
        rows = [r.as_row() for r in traj.records]
        if rows:
            self.files[f"records{suffix}.csv"] = to_csv(list(rows[0]), [list(r.values()) for r in rows])
        reps = certify_trajectory(traj, checks, weights, cfg.diagnostics.k_max,
                                  cfg.diagnostics.barrier_A_scale, const)
        for r in reps:
            self.reports.append((key, r))
            if r.check_id == "conjecture_trackers":
                self.files[f"trackers{suffix}.csv"] = to_csv(r.meta["columns"], r.meta["series"])
        if "binary" in cfg.output.formats:
            self.files.update(trajectory_files(traj, f"trajectory{suffix}"))
        if "svg" in cfg.output.formats and rows:
            self.files.update(render_plots(traj, rows, checks, label))
        return reps

    def tables(self):
        summ = [report_summary(lbl, r) for lbl, r in self.reports]
        self.files["checks.csv"] = to_csv(
            ["label", "check_id", "status", "margin", "tolerance", "within_10x", "location"],
            [[s["label"], s["check_id"], s["status"], s["margin"], s["tolerance"], s["within_10x"],
              s["location"]] for s in summ])
        rows = []
        for lbl, r in self.reports:
            for row in r.rows:
                if len(row) == 4:
                    rows.append([lbl, r.check_id, *row])
        self.files["check_rows.csv"] = to_csv(["label", "check_id", "t", "status", "margin", "tolerance"], rows)
        return summ


def _run_single(cfg, col, const):
    f0 = initial_field(cfg)
    spec, scheme, weights = build_spec(cfg), build_scheme(cfg), build_weights(cfg)
    rec = snapshot_recorder(f0, weights, cfg.diagnostics.k_max, spec.s, const, cfg.time.t0)
    traj = run(f0, spec, scheme, cfg.time.horizon, cfg.time.record_every, rec, cfg.time.t0)
    col.trajectory("", traj, cfg, cfg.checks, weights, const)
    summary = {"snapshots": len(traj.times), "max_gradient": float(traj.monitor_array()[:, 1].max())}
    if f0.symmetry is Symmetry.EVEN_MONOTONE and not f0.grid.periodic and weights.variant == "inviscid":
        summary["forecast_time"] = forecast_time(f0, weights, spec.s)
    return summary


def _run_sweep(cfg, col, const):
    spec, scheme, weights = build_spec(cfg), build_scheme(cfg), build_weights(cfg)
    per_traj = [c for c in cfg.checks if c != "linfty_decay"]
    all_trajs, table = [], []
    summary: dict = {"eps": list(cfg.sweep.eps), "rescale": list(cfg.sweep.rescale)}
    for b in cfg.sweep.rescale:
        f0 = initial_field(cfg, b)
        rec = snapshot_recorder(f0, weights, cfg.diagnostics.k_max, spec.s, const, cfg.time.t0)
        res = vanishing_viscosity_sweep(f0, spec, scheme, cfg.sweep.eps, cfg.time.horizon, cfg.time.record_every, rec)
        T = forecast_time(f0, weights, spec.s) if weights.variant == "inviscid" else math.nan
        grads = []
        for e, traj in zip(res.eps_list, res.trajectories):
            label = f"eps{e:g}_b{b:g}"
            col.trajectory(label, traj, cfg, per_traj, weights, const)
            g = traj.max_gradient_at(T) if math.isfinite(T) and T <= traj.times[-1] else math.nan
            grads.append(g)
            table.append([e, b, VERDICT_NAMES[traj.verdict.kind], float(traj.verdict.t), g])
            all_trajs.append(traj)
        if b == 1.0:
            finite = all(math.isfinite(g) for g in grads)
            summary["forecast_time"] = T
            summary["gradient_at_forecast"] = grads
            summary["gradient_monotone_in_inverse_eps"] = bool(finite and all(np.diff(grads) > 0))
        summary[f"distances_b{b:g}"] = [[a, c, d] for (a, c), d in sorted(res.distances.items())]
    if "linfty_decay" in cfg.checks:
        r = linfty_decay_certificate(all_trajs)
        col.reports.append(("sweep", r))
        consts = r.meta.get("constants", [])
        for row, c in zip(table, consts):
            row.append(c)
    header = ["eps", "b", "verdict", "t_end", "max_gradient_at_forecast"]
    if "linfty_decay" in cfg.checks:
        header.append("decay_constant")
    col.files["sweep.csv"] = to_csv(header, table)
    return summary


def run_experiment(config: Union[ExperimentConfig, str, Path], out_dir=None, write: bool = True) -> RunManifest:
    """Validate, execute, certify and (optionally) write all outputs of ``config``."""
    cfg = config if isinstance(config, ExperimentConfig) else load(config)
    t_start = time.perf_counter()
    const = derive_constants(8193) if cfg.kind == "validate" else analytic_constants()
    col = _Collector()
    summary: dict = {}
    if cfg.kind == "run":
        summary = _run_single(cfg, col, const)
    elif cfg.kind == "sweep":
        summary = _run_sweep(cfg, col, const)
    elif cfg.kind == "validate":
        for r in validate_reports(cfg.checks, cfg.grid.n):
            col.reports.append((r.meta.get("solution", "validate"), r))
            if r.check_id == "conjecture_trackers":
                col.files[f"trackers_{r.meta['solution']}.csv"] = to_csv(r.meta["columns"], r.meta["series"])
    else:
        for r in selftest_reports(cfg.checks):
            col.reports.append(("selftest", r))
    checks = col.tables()
    col.files["config.json"] = cfg.to_json()
    files = sorted(set(col.files) | {"manifest.json"})
    man = RunManifest(cfg.name, cfg.kind, cfg.sha256(), __version__, const.table(), col.verdicts,
                      checks, summary, files, time.perf_counter() - t_start)
    col.files["manifest.json"] = dumps(man.to_dict())
    if write:
        writer = OutputWriter(out_dir or cfg.output.directory)
        writer.add("timing.json", dumps({"wall_clock_seconds": man.wall_clock}))
        for name, data in col.files.items():
            writer.add(name, data)
        writer.flush()
    return man
