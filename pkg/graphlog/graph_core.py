"""Discrete calculus on weighted graphs, ball truncation and graph families.

Reduction order: every vertex sum runs over the CSR row of that vertex in
ascending neighbour id, and every integral is a pairwise ``numpy.sum`` over
vertices in id order, so results are bitwise reproducible.
"""
from __future__ import annotations

import logging
from typing import Optional

import numpy as np
from scipy.sparse.csgraph import shortest_path

from .errors import DimensionError, GraphValidationError
from .model import GraphFamilySpec, VertexFunction, WeightedGraph


log = logging.getLogger(__name__)


FAMILIES = ("path", "cycle", "star", "lattice2d", "half_line", "half_line_example1", "random_tree")


def _values(g: WeightedGraph, f: VertexFunction) -> np.ndarray:
    if f.graph_id != g.graph_id:
        raise DimensionError(f"function belongs to graph {f.graph_id}, not {g.graph_id}")
    if f.values.size != g.n:
        raise DimensionError(f"function has {f.values.size} values, graph has {g.n} vertices")
    return f.values


def integrate_array(g: WeightedGraph, values: np.ndarray) -> float:
    return float(np.sum(g.measure * values))


def laplacian_array(g: WeightedGraph, u: np.ndarray) -> np.ndarray:
    return (g.adjacency @ u - g.degree * u) / g.measure


def gradient_form_array(g: WeightedGraph, u: np.ndarray, v: np.ndarray) -> np.ndarray:
    acc = g.escape * u * v
    if g.edges.size:
        x, y = g.edges[:, 0], g.edges[:, 1]
        terms = g.weights * (u[y] - u[x]) * (v[y] - v[x])
        acc = acc + np.bincount(x, weights=terms, minlength=g.n) + np.bincount(y, weights=terms, minlength=g.n)
    return acc / (2.0 * g.measure)


def edge_energy_array(g: WeightedGraph, u: np.ndarray, v: Optional[np.ndarray] = None) -> float:
    """``sum over undirected edges of w (u_y - u_x)(v_y - v_x)``, cut edges as ``escape u v``."""

    v = u if v is None else v
    total = float(np.sum(g.escape * u * v)) if np.any(g.escape) else 0.0
    if g.edges.size == 0:
        return total
    x, y = g.edges[:, 0], g.edges[:, 1]
    return total + float(np.sum(g.weights * (u[y] - u[x]) * (v[y] - v[x])))


def integrate(g: WeightedGraph, f: VertexFunction) -> float:
    """Return ``sum_x mu(x) f(x)``."""

    return integrate_array(g, _values(g, f))


def laplacian(g: WeightedGraph, u: VertexFunction) -> VertexFunction:
    """Weighted graph Laplacian ``(1/mu(x)) sum_{y~x} w_xy (u(y) - u(x))``.

    Acts on the stored vertex set; neighbours cut away by a truncation count
    as ``u(y) = 0`` through ``g.escape``, so at every stored vertex this is
    the Laplacian of the zero extension on the untruncated graph.
    """

    return g.function(laplacian_array(g, _values(g, u)))


def gradient_form(g: WeightedGraph, u: VertexFunction, v: VertexFunction) -> VertexFunction:
    return g.function(gradient_form_array(g, _values(g, u), _values(g, v)))


def dirichlet_energy(g: WeightedGraph, u: VertexFunction) -> float:
    """``integral of |grad u|^2``; equals the once-per-edge sum of ``w (du)^2``."""

    values = _values(g, u)
    return integrate_array(g, gradient_form_array(g, values, values))


def hop_distances(g: WeightedGraph, center: int) -> np.ndarray:
    """Unweighted hop distance from ``center``; ``inf`` where unreachable."""

    if not 0 <= center < g.n:
        raise GraphValidationError(f"vertex {center} not in graph with {g.n} vertices")
    if g.n == 1:
        return np.zeros(1)
    return shortest_path(g.adjacency, method="D", unweighted=True, directed=False, indices=center)


def ball_truncate(g: WeightedGraph, center: int, radius: int) -> WeightedGraph:
    """Induced subgraph on the closed hop ball of ``radius`` around ``center``.

    Ball vertices at distance exactly ``radius`` that still have a neighbour
    outside the ball become Dirichlet-boundary vertices. Vertex order follows
    the original ids, which are kept in ``origin``.
    """

    if radius < 1:
        raise GraphValidationError(f"radius must be at least 1, got {radius}")
    dist = hop_distances(g, center)
    if g.n > 1 and g.neighbors(center).size == 0:
        raise GraphValidationError(f"center {center} is disconnected from the rest of the graph")

    inside = dist <= radius
    keep = np.flatnonzero(inside)
    new_index = np.full(g.n, -1, dtype=np.int64)
    new_index[keep] = np.arange(keep.size)

    x, y = g.edges[:, 0], g.edges[:, 1]
    kept_edges = inside[x] & inside[y]
    crossing = inside[x] ^ inside[y]
    cut_weight = (
        np.bincount(x[crossing & inside[x]], weights=g.weights[crossing & inside[x]], minlength=g.n)
        + np.bincount(y[crossing & inside[y]], weights=g.weights[crossing & inside[y]], minlength=g.n)
    )
    escapes = cut_weight > 0

    boundary = (g.boundary | escapes)[keep]
    origin = keep if g.origin is None else g.origin[keep]
    sub = WeightedGraph(
        edges=np.stack([new_index[x[kept_edges]], new_index[y[kept_edges]]], axis=1),
        weights=g.weights[kept_edges],
        measure=g.measure[keep],
        boundary=boundary,
        name=f"{g.name}_ball{radius}",
        mu_max=g.mu_max,
        origin=origin,
        escape=(g.escape + cut_weight)[keep],
    )
    log.debug(
        "Truncated %s at radius %d around %d: %d vertices, %d boundary",
        g.name,
        radius,
        center,
        sub.n,
        int(boundary.sum()),
    )
    return sub


def _edges_for(spec: GraphFamilySpec) -> tuple[int, np.ndarray]:
    n = spec.n
    kind = spec.kind
    if kind in ("path", "half_line", "half_line_example1"):
        count = n + 1 if kind != "path" else n
        idx = np.arange(count - 1)
        return count, np.stack([idx, idx + 1], axis=1)
    if kind == "cycle":
        if n < 3:
            raise GraphValidationError("cycle needs at least 3 vertices")
        idx = np.arange(n)
        return n, np.stack([idx, (idx + 1) % n], axis=1)
    if kind == "star":
        leaves = np.arange(1, n)
        return n, np.stack([np.zeros_like(leaves), leaves], axis=1)
    if kind == "lattice2d":
        ids = np.arange(n * n).reshape(n, n)
        horizontal = np.stack([ids[:, :-1].ravel(), ids[:, 1:].ravel()], axis=1)
        vertical = np.stack([ids[:-1, :].ravel(), ids[1:, :].ravel()], axis=1)
        return n * n, np.concatenate([horizontal, vertical])
    if kind == "random_tree":
        rng = np.random.default_rng(spec.seed)
        children = np.arange(1, n)
        parents = np.array([rng.integers(0, c) for c in children], dtype=np.int64)
        return n, np.stack([parents, children], axis=1)
    raise GraphValidationError(f"unknown graph family {kind!r}; expected one of {', '.join(FAMILIES)}")


def generate(spec: GraphFamilySpec) -> WeightedGraph:
    """Build a graph from a family spec.

    ``half_line(n)`` and ``half_line_example1(n)`` have vertices ``0..n``;
    the latter uses unit weights with ``mu(0) = 1`` and ``mu(x) = x``.
    ``lattice2d(n)`` is the ``n x n`` grid.
    """

    if spec.n < 2:
        raise GraphValidationError(f"{spec.kind} needs n >= 2, got {spec.n}")
    count, edges = _edges_for(spec)
    rng = np.random.default_rng(spec.seed + 1)

    if spec.weight_range is not None:
        lo, hi = spec.weight_range
        weights = rng.uniform(lo, hi, size=edges.shape[0])
    else:
        weights = np.full(edges.shape[0], float(spec.weight))

    mu_max: Optional[float]
    if spec.kind == "half_line_example1":
        weights = np.ones(edges.shape[0])
        measure = np.arange(count, dtype=np.float64)
        measure[0] = 1.0
        mu_max = None
    elif spec.measure_range is not None:
        lo, hi = spec.measure_range
        measure = rng.uniform(lo, hi, size=count)
        mu_max = float(hi)
    else:
        measure = np.full(count, float(spec.measure))
        mu_max = float(spec.measure)

    graph = WeightedGraph(
        edges=edges,
        weights=weights,
        measure=measure,
        boundary=np.zeros(count, dtype=bool),
        name=f"{spec.kind}{spec.n}",
        mu_max=mu_max,
    )
    log.debug("Generated %s: %d vertices, %d edges", graph.name, graph.n, edges.shape[0])
    return graph


def single_vertex(mu: float = 1.0) -> WeightedGraph:
    return WeightedGraph.from_edges(1, [], measure=[mu], name="single", mu_max=mu)


def zero_extend(source: WeightedGraph, values: np.ndarray, target: WeightedGraph) -> np.ndarray:
    """Carry values between two truncations of the same graph by original id."""

    src = np.arange(source.n) if source.origin is None else source.origin
    dst = np.arange(target.n) if target.origin is None else target.origin
    lookup = dict(zip(src.tolist(), values.tolist()))
    out = np.array([lookup.get(int(v), 0.0) for v in dst])
    out[target.boundary] = 0.0
    return out


__all__ = [
    "FAMILIES",
    "integrate",
    "laplacian",
    "gradient_form",
    "dirichlet_energy",
    "hop_distances",
    "ball_truncate",
    "generate",
    "single_vertex",
    "zero_extend",
    "integrate_array",
    "laplacian_array",
    "gradient_form_array",
    "edge_energy_array",
]
