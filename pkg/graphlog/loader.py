"""Loaders for graph JSON documents, run configurations and spec strings."""
from __future__ import annotations

import json
import logging
from dataclasses import dataclass, fields
from pathlib import Path
from typing import Any, Dict, Iterable, Mapping, Optional, Tuple, Type

import numpy as np
import yaml

from .errors import ConfigError, GraphValidationError
from .graph_core import FAMILIES, generate, single_vertex
from .model import (
    GraphFamilySpec,
    OutputSpec,
    Potential,
    PotentialFamilySpec,
    RunConfig,
    SolverConfig,
    WeightedGraph,
)
from .spaces import POTENTIAL_FAMILIES, potential_generate, require_a1


log = logging.getLogger(__name__)


TOP_LEVEL_KEYS = ("graph", "potential", "solver", "outputs", "seed", "center", "compare")
METHOD_ALIASES = {"nehari": "nehari_descent", "nehari_descent": "nehari_descent", "mountain_pass": "mountain_pass", "mp": "mountain_pass"}


@dataclass
class GraphDocument:
    """A graph loaded from JSON plus any per-vertex fields it carried."""

    graph: WeightedGraph
    a: Optional[np.ndarray] = None
    u: Optional[np.ndarray] = None
    a0: Optional[float] = None


def _field_names(cls: Type) -> Tuple[str, ...]:
    return tuple(f.name for f in fields(cls) if f.init)


def _reject_unknown(section: str, data: Mapping[str, Any], allowed: Iterable[str]) -> None:
    unknown = sorted(set(data) - set(allowed))
    if unknown:
        raise ConfigError(f"unknown key(s) in {section}: {', '.join(unknown)}")


def _number(text: str, label: str, cast=float):
    try:
        value = float(text)
    except ValueError as exc:
        raise ConfigError(f"{label} must be a number, got {text!r}") from exc
    if cast is int:
        if not value.is_integer():
            raise ConfigError(f"{label} must be an integer, got {text!r}")
        return int(value)
    return value


def load_graph_json(path: str | Path) -> GraphDocument:
    """Read ``{vertices: [{id, mu, boundary, a?, u?}], edges: [{x, y, w}]}``."""

    path = Path(path)
    try:
        doc = json.loads(path.read_text(encoding="utf-8"))
    except OSError as exc:
        raise ConfigError(f"cannot read graph file {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"graph file {path} is not valid JSON: {exc}") from exc

    _reject_unknown(f"graph file {path}", doc, ("name", "mu_min", "mu_max", "a0", "vertices", "edges"))
    vertices = sorted(doc.get("vertices", []), key=lambda v: v["id"])
    ids = [v["id"] for v in vertices]
    if ids != list(range(len(ids))):
        raise GraphValidationError(f"vertex ids in {path} must be dense 0..n-1")
    for v in vertices:
        _reject_unknown(f"vertex {v['id']} of {path}", v, ("id", "mu", "boundary", "a", "u", "origin", "escape"))

    edges = doc.get("edges", [])
    origin = [v["origin"] for v in vertices] if vertices and all("origin" in v for v in vertices) else None
    graph = WeightedGraph(
        edges=np.array([[e["x"], e["y"]] for e in edges], dtype=np.int64).reshape(-1, 2),
        weights=np.array([e.get("w", 1.0) for e in edges], dtype=np.float64),
        measure=np.array([v.get("mu", 1.0) for v in vertices], dtype=np.float64),
        boundary=np.array([bool(v.get("boundary", False)) for v in vertices]),
        name=doc.get("name", path.stem),
        mu_max=doc.get("mu_max"),
        origin=origin,
        escape=np.array([v.get("escape", 0.0) for v in vertices], dtype=np.float64),
    )

    def column(key: str) -> Optional[np.ndarray]:
        if vertices and all(key in v for v in vertices):
            return np.array([v[key] for v in vertices], dtype=np.float64)
        return None

    log.info("Loaded graph %s from %s (%d vertices, %d edges)", graph.name, path, graph.n, len(edges))
    return GraphDocument(graph=graph, a=column("a"), u=column("u"), a0=doc.get("a0"))


def load_config(path: str | Path) -> Dict[str, Any]:
    """Read a JSON (or YAML) run configuration document."""

    path = Path(path)
    try:
        data = yaml.safe_load(path.read_text(encoding="utf-8"))
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except yaml.YAMLError as exc:
        raise ConfigError(f"config {path} does not parse: {exc}") from exc
    if data is None:
        return {}
    if not isinstance(data, dict):
        raise ConfigError(f"config {path} must be a mapping at the top level")
    return data


def parse_graph_spec(text: str) -> Tuple[Optional[GraphFamilySpec], Optional[str]]:
    """Parse ``kind:N[:SEED]``, ``single:MU`` or ``file:PATH``.

    Returns ``(family, None)`` or ``(None, path)``.
    """

    kind, _, rest = text.partition(":")
    if kind == "file":
        if not rest:
            raise ConfigError("file: graph spec needs a path")
        return None, rest
    if kind == "single":
        mu = _number(rest, "single vertex measure") if rest else 1.0
        return GraphFamilySpec(kind="single", n=1, measure=mu), None
    if kind not in FAMILIES:
        raise ConfigError(f"unknown graph family {kind!r}; expected one of {', '.join(FAMILIES + ('single', 'file'))}")
    parts = rest.split(":") if rest else []
    if not parts:
        raise ConfigError(f"graph spec {text!r} needs a size, e.g. {kind}:10")
    spec = GraphFamilySpec(kind=kind, n=_number(parts[0], "graph size", int))
    if len(parts) > 1:
        spec.seed = _number(parts[1], "graph seed", int)
    if len(parts) > 2:
        raise ConfigError(f"too many fields in graph spec {text!r}")
    return spec, None


def parse_potential_spec(text: str) -> PotentialFamilySpec:
    """Parse ``constant:A``, ``coercive:ALPHA:SHIFT[:CENTER]``,
    ``sign_changing:ALPHA:SHIFT:AMP[:CENTER]``,
    ``reciprocal_summable[:POWER[:CENTER]]`` or ``inline``.
    """

    kind, _, rest = text.partition(":")
    parts = [p for p in rest.split(":") if p] if rest else []
    if kind == "inline":
        return PotentialFamilySpec(kind="inline")
    if kind == "constant":
        if len(parts) != 1:
            raise ConfigError(f"constant potential takes one value, got {text!r}")
        return PotentialFamilySpec(kind="constant", value=_number(parts[0], "constant potential"))
    if kind == "coercive":
        if len(parts) not in (2, 3):
            raise ConfigError(f"coercive potential is coercive:ALPHA:SHIFT[:CENTER], got {text!r}")
        spec = PotentialFamilySpec(kind="coercive", alpha=_number(parts[0], "alpha"), shift=_number(parts[1], "shift"))
        if len(parts) == 3:
            spec.center = _number(parts[2], "center", int)
        return spec
    if kind == "sign_changing":
        if len(parts) not in (3, 4):
            raise ConfigError(f"sign_changing potential is sign_changing:ALPHA:SHIFT:AMP[:CENTER], got {text!r}")
        spec = PotentialFamilySpec(
            kind="sign_changing",
            alpha=_number(parts[0], "alpha"),
            shift=_number(parts[1], "shift"),
            amplitude=_number(parts[2], "amplitude"),
        )
        if len(parts) == 4:
            spec.center = _number(parts[3], "center", int)
        return spec
    if kind == "reciprocal_summable":
        spec = PotentialFamilySpec(kind="reciprocal_summable")
        if parts:
            spec.power = _number(parts[0], "power")
        if len(parts) > 1:
            spec.center = _number(parts[1], "center", int)
        return spec
    raise ConfigError(f"unknown potential family {kind!r}; expected one of {', '.join(POTENTIAL_FAMILIES + ('inline',))}")


def parse_init_spec(text: str) -> Dict[str, Any]:
    """``positive_bump[:VERTEX[:HEIGHT]]``, ``constant[:C]`` or ``random[:SCALE]``."""

    kind, _, rest = text.partition(":")
    parts = rest.split(":") if rest else []
    out: Dict[str, Any] = {"init": kind}
    if kind == "positive_bump":
        if parts:
            out["init_vertex"] = _number(parts[0], "bump vertex", int)
        if len(parts) > 1:
            out["init_height"] = _number(parts[1], "bump height")
    elif kind == "constant":
        if parts:
            out["init_constant"] = _number(parts[0], "constant init")
    elif kind == "random":
        if parts:
            out["init_scale"] = _number(parts[0], "random init scale")
    else:
        raise ConfigError(f"unknown init {kind!r}; expected positive_bump, constant or random")
    return out


def _graph_section(value: Any) -> Tuple[Optional[GraphFamilySpec], Optional[str]]:
    if isinstance(value, str):
        return parse_graph_spec(value)
    if not isinstance(value, dict):
        raise ConfigError("graph must be a spec string or a mapping")
    if "file" in value:
        _reject_unknown("graph", value, ("file",))
        return None, str(value["file"])
    _reject_unknown("graph", value, _field_names(GraphFamilySpec))
    data = dict(value)
    for key in ("weight_range", "measure_range"):
        if data.get(key) is not None:
            data[key] = tuple(float(x) for x in data[key])
    return GraphFamilySpec(**data), None


def _potential_section(value: Any) -> PotentialFamilySpec:
    if isinstance(value, str):
        return parse_potential_spec(value)
    if not isinstance(value, dict):
        raise ConfigError("potential must be a spec string or a mapping")
    _reject_unknown("potential", value, _field_names(PotentialFamilySpec))
    return PotentialFamilySpec(**value)


def solver_config(data: Mapping[str, Any]) -> SolverConfig:
    _reject_unknown("solver", data, _field_names(SolverConfig))
    values = dict(data)
    init = values.get("init")
    if isinstance(init, str) and ":" in init:
        values.update(parse_init_spec(init))
    if "method" in values:
        method = str(values["method"])
        if method not in METHOD_ALIASES:
            raise ConfigError(f"unknown solver method {method!r}")
        values["method"] = METHOD_ALIASES[method]
    if "radius_schedule" in values:
        values["radius_schedule"] = [int(r) for r in values["radius_schedule"]]
    try:
        return SolverConfig(**values)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"invalid solver settings: {exc}") from exc


def run_config_from_dict(doc: Mapping[str, Any]) -> RunConfig:
    """Validate a configuration mapping and build the :class:`RunConfig`."""

    _reject_unknown("config", doc, TOP_LEVEL_KEYS)
    run = RunConfig()
    if "graph" in doc:
        run.graph, run.graph_file = _graph_section(doc["graph"])
    if "potential" in doc:
        run.potential = _potential_section(doc["potential"])
    solver = dict(doc.get("solver") or {})
    if "seed" in doc:
        solver.setdefault("seed", int(doc["seed"]))
        if run.graph is not None and not (isinstance(doc["graph"], dict) and "seed" in doc["graph"]):
            run.graph.seed = int(doc["seed"])
    run.solver = solver_config(solver)
    outputs = doc.get("outputs") or {}
    _reject_unknown("outputs", outputs, _field_names(OutputSpec))
    run.outputs = OutputSpec(**outputs)
    run.center = int(doc.get("center", 0))
    run.compare = doc.get("compare")
    return run


def build_graph(run: RunConfig) -> Tuple[WeightedGraph, Optional[GraphDocument]]:
    """Materialize the graph named by ``run``; exactly one source is allowed."""

    if (run.graph is None) == (run.graph_file is None):
        raise ConfigError("exactly one graph source is required: a family spec or a graph file")
    if run.graph_file is not None:
        doc = load_graph_json(run.graph_file)
        return doc.graph, doc
    if run.graph.kind == "single":
        return single_vertex(run.graph.measure), None
    return generate(run.graph), None


def build_potential(run: RunConfig, g: WeightedGraph, doc: Optional[GraphDocument] = None) -> Potential:
    """Instantiate the potential and check (A1) against its declared ``a0``."""

    spec = run.potential or PotentialFamilySpec(kind="constant", value=0.0)
    if spec.kind == "inline":
        if doc is None or doc.a is None:
            raise ConfigError("inline potential needs per-vertex 'a' values in the graph file")
        a0 = spec.a0 if spec.a0 is not None else doc.a0
        if a0 is None:
            a0 = float(doc.a.min())
        pot = Potential(values=doc.a, a0=a0, graph_id=g.graph_id, label="inline")
        require_a1(g, pot)
        return pot
    return potential_generate(spec, g)


__all__ = [
    "GraphDocument",
    "TOP_LEVEL_KEYS",
    "load_graph_json",
    "load_config",
    "parse_graph_spec",
    "parse_potential_spec",
    "parse_init_spec",
    "solver_config",
    "run_config_from_dict",
    "build_graph",
    "build_potential",
]
