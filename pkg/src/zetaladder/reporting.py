"""CSV, JSON and SVG emission. Output is a pure function of its inputs."""

from __future__ import annotations

import csv
import io
import json
import math

_PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f")


def _clean(v):
    """JSON-safe copy: non-finite floats become None, tuples become lists."""
    if isinstance(v, float):
        return v if math.isfinite(v) else None
    if isinstance(v, dict):
        return {str(k): _clean(u) for k, u in v.items()}
    if isinstance(v, (list, tuple)):
        return [_clean(u) for u in v]
    if hasattr(v, "item") and callable(v.item):  # numpy scalars
        return _clean(v.item())
    return v


def _flatten(prefix: str, v, out: list) -> None:
    if isinstance(v, dict):
        for k in sorted(v):
            _flatten(f"{prefix}.{k}" if prefix else str(k), v[k], out)
    else:
        out.append((prefix, json.dumps(_clean(v))))


def to_json(command: str, config: dict, results, errors=()) -> str:
    doc = {"command": command, "config": _clean(config), "results": _clean(results), "errors": _clean(list(errors))}
    return json.dumps(doc, sort_keys=True, indent=2) + "\n"


def _cell(v) -> str:
    if v is None:
        return ""
    if isinstance(v, float):
        return repr(v)
    if hasattr(v, "item") and callable(v.item):
        return _cell(v.item())
    return str(v)


def to_csv(command: str, config: dict, columns: list, rows: list, errors=()) -> str:
    """Comment header with the full config, then one header line and the rows."""
    buf = io.StringIO()
    buf.write(f"# command = {command}\n")
    flat: list = []
    _flatten("", config, flat)
    for k, v in flat:
        buf.write(f"# config.{k} = {v}\n")
    for e in errors:
        buf.write(f"# error = {json.dumps(_clean(e), sort_keys=True)}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for row in rows:
        w.writerow([_cell(row.get(c)) for c in columns])
    return buf.getvalue()


def line_plot_svg(series: dict, *, title: str, xlabel: str, ylabel: str, width: int = 640, height: int = 420) -> str:
    """Log-log line chart; ``series`` maps a label to a list of (x, y) with x, y > 0."""
    pts = {k: [(x, y) for x, y in v if x > 0 and y > 0 and math.isfinite(x) and math.isfinite(y)] for k, v in series.items()}
    allx = [math.log10(x) for v in pts.values() for x, _ in v]
    ally = [math.log10(y) for v in pts.values() for _, y in v]
    left, right, top, bottom = 70, 150, 40, 50
    pw, ph = width - left - right, height - top - bottom
    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" viewBox="0 0 {width} {height}">',
        f'<rect width="{width}" height="{height}" fill="white"/>',
        f'<text x="{width / 2:.1f}" y="22" text-anchor="middle" font-family="sans-serif" font-size="14">{title}</text>',
        f'<rect x="{left}" y="{top}" width="{pw}" height="{ph}" fill="none" stroke="black"/>',
        f'<text x="{left + pw / 2:.1f}" y="{height - 12}" text-anchor="middle" font-family="sans-serif" font-size="12">{xlabel}</text>',
        f'<text x="16" y="{top + ph / 2:.1f}" text-anchor="middle" font-family="sans-serif" font-size="12" '
        f'transform="rotate(-90 16 {top + ph / 2:.1f})">{ylabel}</text>',
    ]
    if allx:
        x0, x1 = min(allx), max(allx)
        y0, y1 = math.floor(min(ally)), math.ceil(max(ally))
        if x1 == x0:
            x0, x1 = x0 - 0.5, x1 + 0.5
        if y1 == y0:
            y1 = y0 + 1

        def sx(v):
            return left + (v - x0) / (x1 - x0) * pw

        def sy(v):
            return top + (1 - (v - y0) / (y1 - y0)) * ph

        for e in range(int(y0), int(y1) + 1):
            out.append(f'<line x1="{left}" y1="{sy(e):.1f}" x2="{left + pw}" y2="{sy(e):.1f}" stroke="#ddd"/>')
            out.append(
                f'<text x="{left - 6}" y="{sy(e) + 4:.1f}" text-anchor="end" font-family="sans-serif" font-size="10">1e{e}</text>'
            )
        for v in (x0, x1):
            out.append(
                f'<text x="{sx(v):.1f}" y="{top + ph + 16}" text-anchor="middle" font-family="sans-serif" '
                f'font-size="10">{10 ** v:.4g}</text>'
            )
        for i, (label, v) in enumerate(pts.items()):
            color = _PALETTE[i % len(_PALETTE)]
            coords = " ".join(f"{sx(math.log10(x)):.1f},{sy(math.log10(y)):.1f}" for x, y in sorted(v))
            if coords:
                out.append(f'<polyline points="{coords}" fill="none" stroke="{color}" stroke-width="1.5"/>')
                for c in coords.split():
                    cx, cy = c.split(",")
                    out.append(f'<circle cx="{cx}" cy="{cy}" r="2.5" fill="{color}"/>')
            ly = top + 14 * (i + 1)
            out.append(f'<line x1="{left + pw + 10}" y1="{ly - 4}" x2="{left + pw + 28}" y2="{ly - 4}" stroke="{color}"/>')
            out.append(f'<text x="{left + pw + 32}" y="{ly}" font-family="sans-serif" font-size="10">{label}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"
