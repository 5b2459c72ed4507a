"""Report files: CSV tables, JSON mirrors, and static SVG summaries.

Everything written here is a deterministic function of the analysis report:
sorted iteration, shortest round-trip float formatting, no timestamps, so
identical stores produce byte-identical reports.
"""

from __future__ import annotations

import json
import math
from pathlib import Path

import numpy as np

from gradebench.analysis import AnalysisReport

ATTRIBUTE_ORDER = ("global", "local", "fast", "exhaustive", "low_d", "high_d")
PROPERTY_ORDER = (
    "stability",
    "exploitation",
    "speed",
    "uniqueness",
    "multimodality_r",
    "complexity",
)


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float) and math.isnan(value):
        return "nan"
    return repr(value)


def _write_csv(path: Path, header: list[str], rows: list[list]) -> None:
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(_fmt(v) for v in row))
    path.write_text("\n".join(lines) + "\n")


def write_reports(report: AnalysisReport, out_dir, svg: bool = False) -> list[str]:
    """Emit all tables; returns the written file names."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = []

    # cells.csv: one row per (problem, method)
    rows = []
    for (pid, mid), c in sorted(report.cells.items()):
        rows.append(
            [
                pid,
                mid,
                c.n_runs,
                c.converged,
                c.failed,
                c.g[10],
                c.g[50],
                c.g[100],
                c.g_rel[10],
                c.g_rel[50],
                c.g_rel[100],
                c.g_rw,
                c.extrapolated,
            ]
        )
    _write_csv(
        out / "cells.csv",
        [
            "problem",
            "method",
            "runs",
            "converged",
            "failed",
            "g10",
            "g50",
            "g100",
            "rel_g10",
            "rel_g50",
            "rel_g100",
            "g_rw",
            "extrapolated",
        ],
        rows,
    )
    written.append("cells.csv")

    # problems.csv: dimension and multimodality
    rows = [
        [pid, report.problem_dims[pid], report.problem_multimodality.get(pid)]
        for pid in sorted(report.problem_dims)
    ]
    _write_csv(out / "problems.csv", ["problem", "dimension", "multimodality"], rows)
    written.append("problems.csv")

    # attributes.csv
    rows = []
    for mid in sorted(report.attributes):
        rows.append([mid] + [report.attributes[mid][a] for a in ATTRIBUTE_ORDER])
    _write_csv(out / "attributes.csv", ["method", *ATTRIBUTE_ORDER], rows)
    written.append("attributes.csv")

    # properties.csv
    rows = []
    for mid in sorted(report.properties):
        props = report.properties[mid]
        rows.append([mid] + [props.get(p) for p in PROPERTY_ORDER])
    _write_csv(out / "properties.csv", ["method", *PROPERTY_ORDER], rows)
    written.append("properties.csv")

    # overlap.csv: matrix with method header
    rows = []
    for i, mid in enumerate(report.overlap_methods):
        row = [mid]
        for j in range(len(report.overlap_methods)):
            v = report.overlap[i, j]
            row.append(None if math.isnan(v) else float(v))
        rows.append(row)
    _write_csv(out / "overlap.csv", ["method", *report.overlap_methods], rows)
    written.append("overlap.csv")

    # best_sets.csv
    rows = []
    for size in sorted(report.best_sets):
        for criterion in ("solved", "solved_rw"):
            entry = report.best_sets[size][criterion]
            rows.append([size, criterion, ";".join(entry["methods"]), entry["count"]])
    _write_csv(out / "best_sets.csv", ["size", "criterion", "methods", "count"], rows)
    written.append("best_sets.csv")

    # JSON mirror of everything
    mirror = {
        "metadata": report.metadata,
        "cells": [
            {
                "problem": pid,
                "method": mid,
                "runs": c.n_runs,
                "converged": c.converged,
                "failed": c.failed,
                "g": {str(k): v for k, v in c.g.items()},
                "g_rel": {str(k): v for k, v in c.g_rel.items()},
                "g_rw": c.g_rw,
                "extrapolated": c.extrapolated,
            }
            for (pid, mid), c in sorted(report.cells.items())
        ],
        "problems": {
            pid: {
                "dimension": report.problem_dims[pid],
                "multimodality": report.problem_multimodality.get(pid),
            }
            for pid in sorted(report.problem_dims)
        },
        "attributes": {m: report.attributes[m] for m in sorted(report.attributes)},
        "properties": {m: report.properties[m] for m in sorted(report.properties)},
        "overlap": {
            "methods": report.overlap_methods,
            "matrix": [
                [None if math.isnan(v) else v for v in row] for row in report.overlap
            ],
            "flags": report.overlap_flags,
        },
        "best_sets": {
            str(size): report.best_sets[size] for size in sorted(report.best_sets)
        },
    }

    def _json_default(o):
        if isinstance(o, (np.floating, np.integer)):
            return o.item()
        raise TypeError(f"not JSON-serializable: {type(o)}")

    (out / "report.json").write_text(
        json.dumps(mirror, indent=2, sort_keys=True, default=_json_default, allow_nan=True)
    )
    written.append("report.json")

    if svg:
        (out / "attributes_radar.svg").write_text(radar_svg(report))
        (out / "multimodality_scatter.svg").write_text(scatter_svg(report))
        written += ["attributes_radar.svg", "multimodality_scatter.svg"]
    return written


_PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#17becf")


def _radar_point(cx, cy, radius, axis_index, n_axes, value):
    # value in [-1, 1] mapped to [0, radius]
    r = radius * (value + 1.0) / 2.0
    angle = -math.pi / 2.0 + 2.0 * math.pi * axis_index / n_axes
    return cx + r * math.cos(angle), cy + r * math.sin(angle)


def radar_svg(report: AnalysisReport, size: int = 420) -> str:
    """Six-axis attribute radar, all methods overlaid."""
    cx = cy = size / 2.0
    radius = size * 0.36
    n = len(ATTRIBUTE_ORDER)
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size}" '
        f'viewBox="0 0 {size} {size}">',
        f'<rect width="{size}" height="{size}" fill="white"/>',
    ]
    for frac in (0.5, 1.0):
        ring = [
            _radar_point(cx, cy, radius, i, n, -1.0 + 2.0 * frac) for i in range(n)
        ]
        pts = " ".join(f"{x:.2f},{y:.2f}" for x, y in ring)
        parts.append(
            f'<polygon points="{pts}" fill="none" stroke="#cccccc" stroke-width="1"/>'
        )
    for i, name in enumerate(ATTRIBUTE_ORDER):
        x, y = _radar_point(cx, cy, radius * 1.18, i, n, 1.0)
        parts.append(
            f'<text x="{x:.2f}" y="{y:.2f}" font-size="12" text-anchor="middle" '
            f'font-family="sans-serif">{name}</text>'
        )
    for k, mid in enumerate(sorted(report.attributes)):
        attrs = report.attributes[mid]
        values = [attrs[a] for a in ATTRIBUTE_ORDER]
        if any(v is None for v in values):
            continue
        ring = [
            _radar_point(cx, cy, radius, i, n, max(-1.0, min(1.0, v)))
            for i, v in enumerate(values)
        ]
        pts = " ".join(f"{x:.2f},{y:.2f}" for x, y in ring)
        color = _PALETTE[k % len(_PALETTE)]
        parts.append(
            f'<polygon points="{pts}" fill="{color}" fill-opacity="0.12" '
            f'stroke="{color}" stroke-width="2"/>'
        )
        parts.append(
            f'<text x="12" y="{18 + 16 * k}" font-size="12" fill="{color}" '
            f'font-family="sans-serif">{mid}</text>'
        )
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def scatter_svg(report: AnalysisReport, size: int = 420) -> str:
    """Problem multimodality (x) against per-method final grade (y)."""
    pad = 42.0
    span = size - 2 * pad
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size}" '
        f'viewBox="0 0 {size} {size}">',
        f'<rect width="{size}" height="{size}" fill="white"/>',
        f'<line x1="{pad}" y1="{size - pad}" x2="{size - pad}" y2="{size - pad}" stroke="black"/>',
        f'<line x1="{pad}" y1="{pad}" x2="{pad}" y2="{size - pad}" stroke="black"/>',
        f'<text x="{size / 2:.1f}" y="{size - 8}" font-size="12" text-anchor="middle" '
        f'font-family="sans-serif">multimodality</text>',
    ]
    methods = sorted({m for _, m in report.cells})
    for k, mid in enumerate(methods):
        color = _PALETTE[k % len(_PALETTE)]
        for (pid, m), cell in sorted(report.cells.items()):
            if m != mid or cell.failed:
                continue
            mm = report.problem_multimodality.get(pid)
            if mm is None:
                continue
            x = pad + span * mm
            y = pad + span * (1.0 - (max(-1.0, min(1.0, cell.g[100])) + 1.0) / 2.0)
            parts.append(f'<circle cx="{x:.2f}" cy="{y:.2f}" r="4" fill="{color}"/>')
        parts.append(
            f'<text x="{pad + 4}" y="{18 + 16 * k}" font-size="12" fill="{color}" '
            f'font-family="sans-serif">{mid}</text>'
        )
    parts.append("</svg>")
    return "\n".join(parts) + "\n"
