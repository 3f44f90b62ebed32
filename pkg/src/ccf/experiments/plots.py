"""Self-contained SVG line charts with byte-deterministic output."""

from __future__ import annotations

from pathlib import Path
from typing import Optional, Sequence

import numpy as np

WIDTH, HEIGHT = 640, 400
MARGIN = (70, 20, 30, 50)  # left, right, top, bottom
PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf", "#8c564b", "#7f7f7f")
MAX_CURVES = 8

# check -> plot families it enables besides the snapshots
FAMILIES = {
    "riccati_F": ("lyapunov_F",),
    "telescoping": ("lyapunov_F",),
    "maxflow": ("lambda_theta_min",),
    "conjecture_trackers": ("lambda_theta_min", "holder_tracker"),
    "degiorgi": ("degiorgi_ladders",),
}


def _fmt(v: float) -> str:
    return f"{v:.2f}"


def _tick_label(v: float) -> str:
    return f"{v:.3g}"


def _escape(s: str) -> str:
    return s.replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;")


def line_chart(series: Sequence, title: str, xlabel: str, ylabel: str, logy: bool = False) -> str:
    """SVG text for ``series = [(label, xs, ys), ...]``.

    Non-finite points (and non-positive ones with ``logy``) are dropped,
    splitting the polyline.
    """
    cleaned = []
    for label, xs, ys in series:
        xs = np.asarray(xs, dtype=float)
        ys = np.asarray(ys, dtype=float)
        ok = np.isfinite(xs) & np.isfinite(ys)
        if logy:
            ok &= ys > 0
            ys = np.where(ok, np.log10(np.where(ok, ys, 1.0)), np.nan)
        cleaned.append((label, xs, ys, ok))
    pts = [(x[o], y[o]) for _, x, y, o in cleaned if o.any()]
    if pts:
        x0 = min(float(p[0].min()) for p in pts)
        x1 = max(float(p[0].max()) for p in pts)
        y0 = min(float(p[1].min()) for p in pts)
        y1 = max(float(p[1].max()) for p in pts)
    else:
        x0, x1, y0, y1 = 0.0, 1.0, 0.0, 1.0
    if x1 <= x0:
        x0, x1 = x0 - 0.5, x0 + 0.5
    if y1 <= y0:
        y0, y1 = y0 - 0.5, y0 + 0.5
    left, right, top, bottom = MARGIN
    pw, ph = WIDTH - left - right, HEIGHT - top - bottom

    def sx(v):
        return left + (v - x0) / (x1 - x0) * pw

    def sy(v):
        return top + (y1 - v) / (y1 - y0) * ph

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
        f'viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="11">',
        f'<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
        f'<text x="{WIDTH // 2}" y="18" text-anchor="middle" font-size="13">{_escape(title)}</text>',
        f'<rect x="{left}" y="{top}" width="{pw}" height="{ph}" fill="none" stroke="black"/>',
    ]
    for i in range(5):
        xv = x0 + (x1 - x0) * i / 4
        yv = y0 + (y1 - y0) * i / 4
        ylab = _tick_label(10**yv) if logy else _tick_label(yv)
        out.append(f'<line x1="{_fmt(sx(xv))}" y1="{top + ph}" x2="{_fmt(sx(xv))}" y2="{top + ph + 4}" stroke="black"/>')
        out.append(f'<text x="{_fmt(sx(xv))}" y="{top + ph + 16}" text-anchor="middle">{_tick_label(xv)}</text>')
        out.append(f'<line x1="{left - 4}" y1="{_fmt(sy(yv))}" x2="{left}" y2="{_fmt(sy(yv))}" stroke="black"/>')
        out.append(f'<text x="{left - 6}" y="{_fmt(sy(yv) + 4)}" text-anchor="end">{ylab}</text>')
    out.append(f'<text x="{left + pw // 2}" y="{HEIGHT - 8}" text-anchor="middle">{_escape(xlabel)}</text>')
    out.append(f'<text x="14" y="{top + ph // 2}" text-anchor="middle" '
               f'transform="rotate(-90 14 {top + ph // 2})">{_escape(ylabel)}</text>')
    for c, (label, xs, ys, ok) in enumerate(cleaned):
        color = PALETTE[c % len(PALETTE)]
        run: list = []
        for x, y, good in zip(xs, ys, ok):
            if good:
                run.append(f"{_fmt(sx(x))},{_fmt(sy(y))}")
            elif run:
                out.append(_polyline(run, color))
                run = []
        if run:
            out.append(_polyline(run, color))
        ly = top + 14 + 14 * c
        out.append(f'<line x1="{left + pw - 110}" y1="{ly - 4}" x2="{left + pw - 90}" y2="{ly - 4}" '
                   f'stroke="{color}" stroke-width="2"/>')
        out.append(f'<text x="{left + pw - 86}" y="{ly}">{_escape(str(label))}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def _polyline(points: list, color: str) -> str:
    if len(points) == 1:
        x, y = points[0].split(",")
        return f'<circle cx="{x}" cy="{y}" r="2" fill="{color}"/>'
    return f'<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{" ".join(points)}"/>'


def _pick(n: int, k: int = MAX_CURVES) -> list:
    if n <= k:
        return list(range(n))
    return sorted(set(np.linspace(0, n - 1, k).round().astype(int).tolist()))


def plot_families(checks: Sequence) -> list:
    fams = ["theta_snapshots"]
    for c in checks:
        for f in FAMILIES.get(c, ()):
            if f not in fams:
                fams.append(f)
    return fams


def render_plots(traj, rows: Sequence[dict], checks: Sequence = (), label: str = "") -> dict:
    """``{filename: svg text}`` for the snapshot plot and the families enabled by ``checks``.

    ``rows`` are per-snapshot diagnostics rows (``DiagnosticsRecord.as_row``).
    """
    if not traj.snapshots:
        raise ValueError("trajectory has no snapshots")
    suffix = f"_{label}" if label else ""
    title = f" ({label})" if label else ""
    out = {}
    idx = _pick(len(traj.snapshots))
    series = [(f"t={traj.times[i]:.3g}", traj.snapshots[i].grid.x, traj.snapshots[i].values) for i in idx]
    out[f"theta_snapshots{suffix}.svg"] = line_chart(series, "theta(t, x)" + title, "x", "theta")
    t = [r["t"] for r in rows]
    for fam in plot_families(checks)[1:]:
        if fam == "lyapunov_F":
            svg = line_chart([("F", t, [r["F_alpha"] for r in rows])], "Lyapunov functional" + title,
                             "t", "F(t)", logy=True)
        elif fam == "lambda_theta_min":
            svg = line_chart([("min", t, [r["lambda_theta_min"] for r in rows]),
                              ("at argmax", t, [r["maxflow_lambda"] for r in rows])],
                             "Lambda theta" + title, "t", "Lambda theta")
        elif fam == "holder_tracker":
            svg = line_chart([("[theta]_1/2", t, [r["holder_half"] for r in rows])],
                             "Hoelder-1/2 seminorm" + title, "t", "seminorm", logy=True)
        else:
            ks = sorted(int(k[2:]) for k in rows[0] if k.startswith("a_"))
            svg = line_chart([(f"t={rows[i]['t']:.3g}", ks, [rows[i][f"a_{k}"] for k in ks])
                              for i in _pick(len(rows))],
                             "truncation masses a_k" + title, "k", "a_k", logy=True)
        out[f"{fam}{suffix}.svg"] = svg
    return out


def emit_plots(traj, out_dir, rows: Optional[Sequence[dict]] = None, checks: Sequence = (), label: str = "") -> list:
    """Write the SVG files for ``traj`` into ``out_dir``; returns the paths written."""
    if rows is None:
        from ..diagnostics import snapshot_recorder

        rec = snapshot_recorder(traj.snapshots[0], t0=traj.times[0], s=float(getattr(traj.spec, "s", 0.0)))
        rows = [rec(t, f).as_row() for t, f in zip(traj.times, traj.snapshots)]
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    paths = []
    for name, svg in sorted(render_plots(traj, rows, checks, label).items()):
        p = out_dir / name
        p.write_bytes(svg.encode())
        paths.append(p)
    return paths
