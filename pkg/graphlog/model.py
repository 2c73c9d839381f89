"""Data model shared by the graph, variational and solver modules."""
from __future__ import annotations

from dataclasses import asdict, dataclass, field
from functools import cached_property
from typing import Dict, List, Optional, Tuple

import numpy as np
import scipy.sparse as sp
from scipy.sparse.csgraph import connected_components

from .errors import DimensionError, GraphValidationError
from .fingerprint import graph_fingerprint


def _frozen_array(values, dtype) -> np.ndarray:
    arr = np.array(values, dtype=dtype, copy=True)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class WeightedGraph:
    """Finite truncation of a weighted locally finite graph.

    Vertices are the dense ids ``0..n-1``. Each undirected edge is stored once
    as ``(x, y)`` with ``x < y``; the adjacency is expanded symmetrically, so
    ``w_xy = w_yx`` holds by construction. ``boundary`` marks Dirichlet
    vertices left by a ball truncation. ``escape[x]`` is the total weight of
    edges from ``x`` to vertices outside the stored set; it enters the degree,
    so the Laplacian reads those neighbours as zero.
    """

    edges: np.ndarray
    weights: np.ndarray
    measure: np.ndarray
    boundary: np.ndarray
    name: str = "graph"
    mu_max: Optional[float] = None
    origin: Optional[np.ndarray] = None
    escape: Optional[np.ndarray] = None
    graph_id: str = field(init=False)

    def __post_init__(self) -> None:
        measure = _frozen_array(self.measure, np.float64).reshape(-1)
        n = measure.size
        edges = np.asarray(self.edges, dtype=np.int64).reshape(-1, 2)
        weights = np.asarray(self.weights, dtype=np.float64).reshape(-1)
        boundary = np.zeros(n, dtype=bool) if self.boundary is None else np.asarray(self.boundary, dtype=bool)

        if n == 0:
            raise GraphValidationError("graph must have at least one vertex")
        if weights.size != edges.shape[0]:
            raise GraphValidationError(f"{edges.shape[0]} edges but {weights.size} weights")
        if boundary.size != n:
            raise GraphValidationError(f"{n} vertices but {boundary.size} boundary flags")
        if not np.all(np.isfinite(measure)) or np.any(measure <= 0):
            raise GraphValidationError("measure must be finite and positive at every vertex")
        if edges.size:
            if edges.min() < 0 or edges.max() >= n:
                raise GraphValidationError("edge endpoint outside the vertex range")
            if np.any(edges[:, 0] == edges[:, 1]):
                raise GraphValidationError("self-loops are not allowed")
            if not np.all(np.isfinite(weights)) or np.any(weights <= 0):
                raise GraphValidationError("edge weights must be finite and positive")
            # canonical orientation x < y, sorted, so the fingerprint is order-free
            lo = np.minimum(edges[:, 0], edges[:, 1])
            hi = np.maximum(edges[:, 0], edges[:, 1])
            order = np.lexsort((hi, lo))
            edges = np.stack([lo[order], hi[order]], axis=1)
            weights = weights[order]
            dup = np.all(edges[1:] == edges[:-1], axis=1)
            if np.any(dup):
                x, y = edges[1:][dup][0]
                raise GraphValidationError(f"duplicate edge ({x}, {y})")

        edges.setflags(write=False)
        weights.setflags(write=False)
        boundary = boundary.copy()
        boundary.setflags(write=False)
        object.__setattr__(self, "measure", measure)
        object.__setattr__(self, "edges", edges)
        object.__setattr__(self, "weights", weights)
        object.__setattr__(self, "boundary", boundary)
        if self.origin is not None:
            object.__setattr__(self, "origin", _frozen_array(self.origin, np.int64))
        escape = np.zeros(n) if self.escape is None else _frozen_array(self.escape, np.float64).reshape(-1)
        if escape.size != n:
            raise GraphValidationError(f"{n} vertices but {escape.size} escape weights")
        if not np.all(np.isfinite(escape)) or np.any(escape < 0):
            raise GraphValidationError("escape weights must be finite and non-negative")
        escape.setflags(write=False)
        object.__setattr__(self, "escape", escape)
        object.__setattr__(
            self, "graph_id", graph_fingerprint(self.name, edges, weights, measure, boundary, escape=escape)
        )
        self._check_interior_connected()

    def _check_interior_connected(self) -> None:
        interior = self.interior
        if interior.size <= 1:
            return
        sub = self.adjacency[interior][:, interior]
        count, _ = connected_components(sub, directed=False)
        if count != 1:
            raise GraphValidationError(f"interior subgraph of {self.name} has {count} components")

    @classmethod
    def from_edges(
        cls,
        n: int,
        edges: List[Tuple[int, int]] | np.ndarray,
        weights: Optional[List[float] | np.ndarray] = None,
        measure: Optional[List[float] | np.ndarray] = None,
        boundary: Optional[List[bool] | np.ndarray] = None,
        name: str = "graph",
        mu_max: Optional[float] = None,
    ) -> "WeightedGraph":
        edge_arr = np.asarray(edges, dtype=np.int64).reshape(-1, 2)
        w = np.ones(edge_arr.shape[0]) if weights is None else weights
        mu = np.ones(n) if measure is None else measure
        flags = np.zeros(n, dtype=bool) if boundary is None else boundary
        return cls(edges=edge_arr, weights=w, measure=mu, boundary=flags, name=name, mu_max=mu_max)

    @property
    def n(self) -> int:
        return int(self.measure.size)

    @property
    def mu_min(self) -> float:
        return float(self.measure.min())

    @cached_property
    def adjacency(self) -> sp.csr_matrix:
        """Symmetric CSR weight matrix; row ``x`` lists the neighbours of ``x``."""

        n = self.n
        if self.edges.size == 0:
            return sp.csr_matrix((n, n), dtype=np.float64)
        rows = np.concatenate([self.edges[:, 0], self.edges[:, 1]])
        cols = np.concatenate([self.edges[:, 1], self.edges[:, 0]])
        data = np.concatenate([self.weights, self.weights])
        mat = sp.csr_matrix((data, (rows, cols)), shape=(n, n))
        mat.sort_indices()
        return mat

    @cached_property
    def degree(self) -> np.ndarray:
        """Weighted degree ``deg(x) = sum_y w_xy``, cut edges included."""

        return np.asarray(self.adjacency.sum(axis=1)).reshape(-1) + self.escape

    @cached_property
    def stiffness(self) -> sp.csr_matrix:
        """``D - W``, so that ``mu * (-Laplacian u) = stiffness @ u``."""

        return (sp.diags(self.degree) - self.adjacency).tocsr()

    @cached_property
    def interior(self) -> np.ndarray:
        return np.flatnonzero(~self.boundary)

    def neighbors(self, x: int) -> np.ndarray:
        row = self.adjacency
        return row.indices[row.indptr[x] : row.indptr[x + 1]]

    def function(self, values) -> "VertexFunction":
        """Bind an array of per-vertex values to this graph."""

        arr = np.asarray(values, dtype=np.float64).reshape(-1)
        if arr.size != self.n:
            raise DimensionError(f"function has {arr.size} values, graph {self.graph_id} has {self.n} vertices")
        return VertexFunction(values=arr, graph_id=self.graph_id)

    def zeros(self) -> "VertexFunction":
        return self.function(np.zeros(self.n))

    def constant(self, c: float) -> "VertexFunction":
        return self.function(np.full(self.n, float(c)))


@dataclass(frozen=True, eq=False)
class VertexFunction:
    """Real-valued function on the vertices of one graph."""

    values: np.ndarray
    graph_id: str

    def __post_init__(self) -> None:
        object.__setattr__(self, "values", _frozen_array(self.values, np.float64).reshape(-1))

    def __len__(self) -> int:
        return int(self.values.size)

    def scaled(self, t: float) -> "VertexFunction":
        return VertexFunction(values=t * self.values, graph_id=self.graph_id)


@dataclass(frozen=True, eq=False)
class Potential:
    """Potential values a(x) with the declared hypothesis class."""

    values: np.ndarray
    a0: float
    class_tag: str = "A2"  # A2 | A2prime
    M0: Optional[float] = None
    graph_id: str = ""
    label: str = "custom"

    def __post_init__(self) -> None:
        object.__setattr__(self, "values", _frozen_array(self.values, np.float64).reshape(-1))
        if self.class_tag not in ("A2", "A2prime"):
            raise ValueError(f"unknown potential class {self.class_tag!r}")


@dataclass
class PotentialClassReport:
    """Outcome of checking a potential against its declared class."""

    class_tag: str
    a0: float
    inf_a: float
    mu_min: float
    M0: Optional[float]
    volume_below_M0: Optional[float]
    reciprocal_partial_sum: Optional[float]
    reciprocal_tail_bound: Optional[float]
    ok: bool


@dataclass
class NormReport:
    l2_sq: float
    h_norm_sq: float
    lp: Dict[float, float]
    linf: float
    log_energy_pos: float
    log_energy_neg: float

    @property
    def log_energy(self) -> float:
        return self.log_energy_pos - self.log_energy_neg


@dataclass
class EnergyReport:
    J: float
    h_norm_sq: float
    l2_sq: float
    log_energy: float
    nehari_defect: float
    residual_linf: float
    residual_l2: float

    def to_dict(self) -> Dict[str, float]:
        return asdict(self)


@dataclass
class FiberReport:
    t_u: float
    j_at_t: float
    slope_samples: List[Tuple[float, float]] = field(default_factory=list)
    projected: Optional[VertexFunction] = None


@dataclass
class LowerBoundReport:
    """Norm lower bound for a Nehari element from the log growth constant."""

    q: float
    c_q: float
    theta: float
    h_norm: float
    bound: Optional[float]

    @property
    def applicable(self) -> bool:
        return self.bound is not None

    @property
    def holds(self) -> bool:
        return self.bound is None or self.h_norm >= self.bound * (1.0 - 1e-12)


@dataclass
class GraphFamilySpec:
    """Parameters for one of the graph family generators."""

    kind: str
    n: int = 2
    seed: int = 0
    weight: float = 1.0
    measure: float = 1.0
    weight_range: Optional[Tuple[float, float]] = None
    measure_range: Optional[Tuple[float, float]] = None


@dataclass
class PotentialFamilySpec:
    """Parameters for one of the potential family generators."""

    kind: str
    value: float = 0.0
    alpha: float = 1.0
    shift: float = 0.0
    amplitude: float = 0.0
    center: int = 0
    power: Optional[float] = None
    M0: Optional[float] = None
    a0: Optional[float] = None


@dataclass
class SolverConfig:
    method: str = "nehari_descent"  # nehari_descent | mountain_pass
    max_iters: int = 2000
    grad_tol: float = 1e-8
    step: float = 1.0
    shrink: float = 0.5
    armijo: float = 1e-4
    max_backtracks: int = 60
    seed: int = 0
    init: str = "positive_bump"  # positive_bump | constant | random
    init_vertex: int = 0
    init_height: float = 1.0
    init_constant: float = 1.0
    init_scale: float = 1.0
    path_points: int = 17
    mp_tol: float = 1e-6
    radius_schedule: List[int] = field(default_factory=list)
    cg_rtol: float = 1e-2
    geometry_budget: int = 60
    sphere_samples: int = 64
    pool_size: int = 1000
    nehari_tol: float = 1e-10

    def __post_init__(self) -> None:
        if self.method not in ("nehari_descent", "mountain_pass"):
            raise ValueError(f"unknown solver method {self.method!r}")
        if self.init not in ("positive_bump", "constant", "random"):
            raise ValueError(f"unknown init {self.init!r}")
        for name in ("grad_tol", "step", "mp_tol", "cg_rtol", "nehari_tol"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")
        if not 0.0 < self.shrink < 1.0:
            raise ValueError("shrink must lie in (0, 1)")
        if not 0.0 < self.armijo < 1.0:
            raise ValueError("armijo must lie in (0, 1)")
        if self.path_points < 3:
            raise ValueError("path_points must be at least 3")
        if self.max_iters < 0:
            raise ValueError("max_iters must be non-negative")


@dataclass
class IterationRecord:
    iteration: int
    J: float
    dual_norm: float
    nehari_defect: float
    residual_l2: float
    step: float
    cerami_product: float
    residual_linf: float = float("nan")


@dataclass
class SolveTrace:
    records: List[IterationRecord] = field(default_factory=list)
    termination: str = "running"  # converged | max_iters | stalled | aborted
    # mountain pass only: outcome of the final nehari_descent polish
    polish_termination: Optional[str] = None
    # residual_linf <= grad_tol * (1 + |u|_inf) at the last iterate
    linf_within: Optional[bool] = None

    @property
    def converged(self) -> bool:
        return self.termination == "converged"

    @property
    def iterations(self) -> int:
        return len(self.records)

    @property
    def final(self) -> Optional[IterationRecord]:
        return self.records[-1] if self.records else None


@dataclass
class MountainPassGeometry:
    """``delta`` bounds ``J`` from below on the whole ``rho``-sphere;
    ``delta_sampled`` is the smallest value seen on the sampled directions."""

    rho: float
    delta: float
    endpoint: VertexFunction
    t1: float
    doublings: int
    delta_sampled: float = float("nan")


@dataclass
class ExhaustionRow:
    radius: int
    vertices: int
    d_hat: float
    converged: bool
    iterations: int
    residual_linf: float
    center_of_mass: float
    tail_mass: float


@dataclass
class CrossingEntry:
    bound: float
    index: Optional[int]
    log_index: float
    kind: str  # scanned | certified_bound


@dataclass
class SeriesReport:
    name: str
    partial_sums: List[Tuple[int, float]] = field(default_factory=list)
    verdict: str = "inconclusive"  # convergent_with_tail_bound | divergent_beyond_all_bounds | inconclusive
    tail_bounds: List[Tuple[int, float]] = field(default_factory=list)
    crossings: List[CrossingEntry] = field(default_factory=list)
    minorant_crossings: List[CrossingEntry] = field(default_factory=list)
    # sum of the terms since the previous schedule point
    increments: List[Tuple[int, float]] = field(default_factory=list)

    def to_dict(self) -> Dict[str, object]:
        return asdict(self)


@dataclass
class OutputSpec:
    directory: str = "output"
    csv: bool = True
    json: bool = True
    dot: bool = False


@dataclass
class RunConfig:
    graph: Optional[GraphFamilySpec] = None
    graph_file: Optional[str] = None
    potential: Optional[PotentialFamilySpec] = None
    solver: SolverConfig = field(default_factory=SolverConfig)
    outputs: OutputSpec = field(default_factory=OutputSpec)
    center: int = 0
    compare: Optional[str] = None


__all__ = [
    "WeightedGraph",
    "VertexFunction",
    "Potential",
    "PotentialClassReport",
    "NormReport",
    "EnergyReport",
    "FiberReport",
    "LowerBoundReport",
    "GraphFamilySpec",
    "PotentialFamilySpec",
    "SolverConfig",
    "IterationRecord",
    "SolveTrace",
    "MountainPassGeometry",
    "ExhaustionRow",
    "CrossingEntry",
    "SeriesReport",
    "OutputSpec",
    "RunConfig",
]
