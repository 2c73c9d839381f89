"""Result writers: graph JSON, CSV tables, summary JSON and DOT."""
from __future__ import annotations

import csv
import json
import logging
import math
from dataclasses import asdict
from pathlib import Path
from typing import Any, Dict, Iterable, List, Mapping, Optional, Sequence

import numpy as np

from .model import ExhaustionRow, FiberReport, SeriesReport, SolveTrace, WeightedGraph


log = logging.getLogger(__name__)


def graph_to_dict(
    g: WeightedGraph,
    a: Optional[np.ndarray] = None,
    u: Optional[np.ndarray] = None,
    a0: Optional[float] = None,
) -> Dict[str, Any]:
    vertices: List[Dict[str, Any]] = []
    for x in range(g.n):
        entry: Dict[str, Any] = {"id": x, "mu": float(g.measure[x]), "boundary": bool(g.boundary[x])}
        if g.origin is not None:
            entry["origin"] = int(g.origin[x])
        if g.escape[x]:
            entry["escape"] = float(g.escape[x])
        if a is not None:
            entry["a"] = float(a[x])
        if u is not None:
            entry["u"] = float(u[x])
        vertices.append(entry)
    doc: Dict[str, Any] = {
        "name": g.name,
        "mu_min": g.mu_min,
        "mu_max": g.mu_max,
        "vertices": vertices,
        "edges": [
            {"x": int(x), "y": int(y), "w": float(w)} for (x, y), w in zip(g.edges.tolist(), g.weights.tolist())
        ],
    }
    if a0 is not None:
        doc["a0"] = float(a0)
    return doc


def write_graph_json(
    g: WeightedGraph,
    path: str | Path,
    a: Optional[np.ndarray] = None,
    u: Optional[np.ndarray] = None,
    a0: Optional[float] = None,
) -> None:
    """Write a graph document; floats use ``repr`` so values re-load bit-exactly."""

    path = Path(path)
    path.write_text(json.dumps(graph_to_dict(g, a, u, a0), indent=2) + "\n", encoding="utf-8")
    log.info("Wrote graph JSON for %s to %s", g.name, path)


def _write_rows(path: Path, header: Sequence[str], rows: Iterable[Sequence[Any]]) -> None:
    with path.open("w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle)
        writer.writerow(header)
        for row in rows:
            writer.writerow([repr(v) if isinstance(v, float) else v for v in row])


def write_trace_csv(trace: SolveTrace, path: str | Path) -> None:
    path = Path(path)
    header = ["iteration", "J", "dual_norm", "nehari_defect", "residual_l2", "residual_linf", "step", "cerami_product"]
    _write_rows(path, header, ([getattr(r, h) for h in header] for r in trace.records))
    log.info("Wrote %d trace rows to %s", trace.iterations, path)


def write_fiber_csv(report: FiberReport, path: str | Path) -> None:
    path = Path(path)
    _write_rows(path, ["t", "slope"], report.slope_samples)
    log.info("Wrote fiber audit samples to %s", path)


def write_exhaustion_csv(rows: Sequence[ExhaustionRow], path: str | Path) -> None:
    path = Path(path)
    header = [
        "radius",
        "vertices",
        "d_hat",
        "converged",
        "iterations",
        "residual_linf",
        "center_of_mass",
        "tail_mass",
    ]
    _write_rows(path, header, ([getattr(r, h) for h in header] for r in rows))
    log.info("Wrote %d exhaustion rows to %s", len(rows), path)


def _json_safe(value: Any) -> Any:
    """Replace non-finite floats with ``None`` so the document stays strict JSON."""

    if isinstance(value, float):
        return value if math.isfinite(value) else None
    if isinstance(value, Mapping):
        return {k: _json_safe(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_json_safe(v) for v in value]
    return value


def write_summary_json(summary: Mapping[str, Any], path: str | Path) -> None:
    """Sorted keys and no timestamps, so equal runs give equal files."""

    path = Path(path)
    text = json.dumps(_json_safe(summary), indent=2, sort_keys=True, allow_nan=False)
    path.write_text(text + "\n", encoding="utf-8")
    log.info("Wrote summary to %s", path)


def write_series_reports(reports: Sequence[SeriesReport], directory: str | Path, stem: str) -> None:
    """One JSON document with every report and one CSV of partial sums."""

    directory = Path(directory)
    write_summary_json({r.name: r.to_dict() for r in reports}, directory / f"{stem}.json")
    rows = []
    for report in reports:
        tails = dict(report.tail_bounds)
        for n, total in report.partial_sums:
            rows.append([report.name, n, total, tails.get(n, "")])
    _write_rows(directory / f"{stem}.csv", ["series", "N", "partial_sum", "tail_bound"], rows)


def format_series_table(report: SeriesReport) -> str:
    lines = [f"{report.name}: {report.verdict}"]
    tails = dict(report.tail_bounds)
    for n, total in report.partial_sums:
        tail = f"  tail <= {tails[n]:.6g}" if n in tails else ""
        lines.append(f"  N={n:<12d} S_N={total:.12g}{tail}")
    for label, table in (("crossings", report.crossings), ("minorant crossings", report.minorant_crossings)):
        if not table:
            continue
        lines.append(f"  {label}:")
        for entry in table:
            where = f"N={entry.index}" if entry.index is not None else f"log N <= {entry.log_index:.6g}"
            lines.append(f"    M={entry.bound:g}: {where} ({entry.kind})")
    return "\n".join(lines)


def _dot_id(name: str) -> str:
    return '"' + name.replace('"', r"\"") + '"'


def write_dot(g: WeightedGraph, path: str | Path, u: Optional[np.ndarray] = None) -> None:
    """Undirected DOT; vertex labels carry ``u`` when given."""

    path = Path(path)
    lines = [f"graph {_dot_id(g.name)} {{"]
    for x in range(g.n):
        label = f"{x}" if u is None else f"{x}: {u[x]:.6g}"
        attrs = [f"label={_dot_id(label)}"]
        if g.boundary[x]:
            attrs.append("shape=box")
        lines.append(f"  {x} [{', '.join(attrs)}];")
    for (x, y), w in zip(g.edges.tolist(), g.weights.tolist()):
        lines.append(f"  {x} -- {y} [weight={w!r}];")
    lines.append("}")
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    log.info("Wrote DOT graph to %s", path)


def rows_as_dicts(rows: Sequence[ExhaustionRow]) -> List[Dict[str, Any]]:
    return [asdict(r) for r in rows]


__all__ = [
    "graph_to_dict",
    "write_graph_json",
    "write_trace_csv",
    "write_fiber_csv",
    "write_exhaustion_csv",
    "write_summary_json",
    "write_series_reports",
    "format_series_table",
    "write_dot",
    "rows_as_dicts",
]
