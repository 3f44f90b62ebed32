"""``ccf`` command line.

Exit codes: 0 ok, 2 invalid config or arguments, 3 a certificate violated
beyond ten tolerances (or a gate failed), 4 numerical failure.
"""

from __future__ import annotations

import json
import sys
from pathlib import Path

import click

from ..ops import analytic_constants, derive_constants
from ..solver import NumericalFailure
from .config import TRAJECTORY_CHECKS, ConfigError, load, loads
from .runner import (
    EXIT_NUMERICAL,
    EXIT_OK,
    EXIT_VALIDATION,
    EXIT_VIOLATION,
    certify_trajectory,
    dumps,
    load_trajectory,
    report_summary,
    run_experiment,
    selftest_reports,
    to_csv,
    validate_reports,
)

BUNDLED = Path(__file__).with_name("configs")


def _load_config(path: str):
    try:
        return load(path)
    except ConfigError as exc:
        click.echo(str(exc), err=True)
        sys.exit(EXIT_VALIDATION)
    except OSError as exc:
        click.echo(f"cannot read config: {exc}", err=True)
        sys.exit(EXIT_VALIDATION)


def _finish(man) -> None:
    for c in man.checks:
        click.echo(f"{c['label']:>14}  {c['check_id']:<34} {c['status']:<13} margin={c['margin']}")
    for label, v in sorted(man.verdicts.items()):
        if v:
            click.echo(f"verdict[{label}] {v['kind']} at t={v['t']:.6g} {v['reason']}")
    sys.exit(man.exit_code)


def _execute(cfg, out):
    try:
        man = run_experiment(cfg, out)
    except (NumericalFailure, FloatingPointError) as exc:
        click.echo(f"numerical failure: {exc}", err=True)
        sys.exit(EXIT_NUMERICAL)
    _finish(man)


@click.group()
def main():
    """Numerical experiments for the 1D nonlocal transport equation."""


@main.command("run")
@click.option("--config", "config_path", required=True, type=click.Path(dir_okay=False))
@click.option("--out", type=click.Path(file_okay=False), default=None, help="Output directory (overrides the config).")
def run_cmd(config_path, out):
    """Run an experiment config (any kind) and write its outputs."""
    _execute(_load_config(config_path), out)


@main.command("sweep")
@click.option("--config", "config_path", required=True, type=click.Path(dir_okay=False))
@click.option("--eps", "eps", multiple=True, type=float, help="Viscosities (repeat; overrides the config).")
@click.option("--out", type=click.Path(file_okay=False), default=None)
def sweep_cmd(config_path, eps, out):
    """Vanishing-viscosity sweep over the config's initial data."""
    data = json.loads(Path(config_path).read_text())
    data["kind"] = "sweep"
    if eps:
        data.setdefault("sweep", {})["eps"] = list(eps)
    try:
        cfg = loads(json.dumps(data))
    except ConfigError as exc:
        click.echo(str(exc), err=True)
        sys.exit(EXIT_VALIDATION)
    _execute(cfg, out)


@main.command("validate")
@click.option("--config", "config_path", type=click.Path(dir_okay=False), default=None,
              help="Only validate this config and report every violated constraint.")
@click.option("--solution", type=click.Choice(["semicircle", "cusp"]), default=None)
@click.option("--n", type=int, default=8193, show_default=True)
@click.option("--json", "as_json", is_flag=True)
def validate_cmd(config_path, solution, n, as_json):
    """Exact-solution residual summary, or config validation with --config."""
    if config_path:
        cfg = _load_config(config_path)
        click.echo(f"{config_path}: valid ({cfg.kind}, sha256 {cfg.sha256()[:12]})")
        sys.exit(EXIT_OK)
    checks = [f"{solution}_residual"] if solution else ["semicircle_residual", "cusp_residual"]
    reps = validate_reports(checks, n)
    summ = [report_summary("validate", r) for r in reps]
    if as_json:
        click.echo(dumps(summ), nl=False)
    else:
        for s in summ:
            click.echo(f"{s['check_id']:<22} residual={s['meta']['residual']:.3e} gate={s['meta']['gate']:g} {s['status']}")
    sys.exit(EXIT_VIOLATION if any(s["status"] == "Violated" for s in summ) else EXIT_OK)


@main.command("certify")
@click.option("--trajectory", "traj_dir", required=True, type=click.Path(exists=True, file_okay=False))
@click.option("--checks", default="all", show_default=True, help="'all' or a comma-separated list.")
@click.option("--alpha", type=float, default=0.5, show_default=True)
@click.option("--k-max", type=int, default=8, show_default=True)
@click.option("--json", "as_json", is_flag=True, help="JSON reports instead of per-snapshot CSV.")
def certify_cmd(traj_dir, checks, alpha, k_max, as_json):
    """Certify a trajectory written with output format 'binary'."""
    from ..diagnostics import WeightPair

    names = list(TRAJECTORY_CHECKS) if checks == "all" else [c.strip() for c in checks.split(",") if c.strip()]
    bad = [c for c in names if c not in TRAJECTORY_CHECKS]
    if bad:
        click.echo(f"unknown checks {bad}; choose from {list(TRAJECTORY_CHECKS)}", err=True)
        sys.exit(EXIT_VALIDATION)
    traj = load_trajectory(traj_dir)
    try:
        weights = WeightPair(alpha)
    except ValueError as exc:
        click.echo(str(exc), err=True)
        sys.exit(EXIT_VALIDATION)
    reps = certify_trajectory(traj, names, weights, k_max)
    if as_json:
        click.echo(dumps([r.as_dict() for r in reps]), nl=False)
    else:
        rows = [[r.check_id, *row] for r in reps for row in r.rows if len(row) == 4]
        click.echo(to_csv(["check_id", "t", "status", "margin", "tolerance"], rows), nl=False)
    sys.exit(EXIT_VIOLATION if any(not r.within() for r in reps) else EXIT_OK)


@main.group("ops")
def ops_group():
    """Operator utilities."""


@ops_group.command("selftest")
@click.option("--json", "as_json", is_flag=True)
def selftest_cmd(as_json):
    """Operator gates, Hilbert identities and the barrier lower bound."""
    reps = selftest_reports(["operator_gates", "identities", "prop_identity", "barrier_lower_bound"])
    summ = [report_summary("selftest", r) for r in reps]
    if as_json:
        click.echo(dumps(summ), nl=False)
    else:
        for s in summ:
            click.echo(f"{s['check_id']:<40} {s['status']:<9} margin={s['margin']:.3e}")
    sys.exit(EXIT_VIOLATION if any(s["status"] == "Violated" for s in summ) else EXIT_OK)


@main.command("constants")
@click.option("--derived", is_flag=True, help="Include constants fitted from exact-solution residuals.")
@click.option("--json", "as_json", is_flag=True)
def constants_cmd(derived, as_json):
    """Print the constants table with provenance."""
    table = (derive_constants() if derived else analytic_constants()).table()
    if as_json:
        click.echo(dumps(table), nl=False)
        return
    for c in table:
        oracle = "" if c["oracle"] is None else f"  oracle={c['oracle']:.10g}"
        click.echo(f"{c['name']:<22} {c['value']:<16.10g} [{c['provenance']}]{oracle}  {c['note']}")


@main.command("configs")
def configs_cmd():
    """List the bundled example configs."""
    for p in sorted(BUNDLED.glob("*.json")):
        click.echo(str(p))


if __name__ == "__main__":
    main()
