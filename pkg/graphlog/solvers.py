"""Ground-state solvers: Nehari descent, mountain pass and domain exhaustion."""
from __future__ import annotations

import logging
import math
from dataclasses import replace
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np
import scipy.sparse as sp
from scipy.optimize import minimize_scalar
from scipy.sparse.linalg import LinearOperator, cg

from .errors import GeometryError, NonFiniteEnergyError, ProjectionError
from .graph_core import _values, ball_truncate, generate, hop_distances, zero_extend
from .model import (
    ExhaustionRow,
    GraphFamilySpec,
    IterationRecord,
    MountainPassGeometry,
    Potential,
    PotentialFamilySpec,
    SolverConfig,
    SolveTrace,
    VertexFunction,
    WeightedGraph,
)
from .spaces import potential_generate, require_a1
from .variational import (
    EnergyParts,
    energy_parts,
    fiber_value_parts,
    projection_scale,
    residual_array,
    residual_norms,
)
from .workers import map_ordered


log = logging.getLogger(__name__)

_EPS = float(np.finfo(np.float64).eps)
_STEP_RANGE = (1e-12, 1e12)

InitLike = Union[VertexFunction, np.ndarray, None]


class HilbertOperator:
    """Interior block of ``stiffness + diag(mu (a + 1))``.

    ``<u, v>_H = u @ full @ v`` for functions vanishing on the boundary, and
    the H-gradient ``G`` of ``J`` at ``u`` solves ``block @ G_I = (mu R)_I``
    with ``R`` the pointwise residual.
    """

    def __init__(self, g: WeightedGraph, a_values: np.ndarray, rtol: float = 1e-2):
        self.g = g
        self.rtol = rtol
        self.full = (g.stiffness + sp.diags(g.measure * (a_values + 1.0))).tocsr()
        self.interior = g.interior
        if self.interior.size == 0:
            raise ValueError(f"{g.name} has no interior vertices")
        self.block = self.full[self.interior][:, self.interior].tocsr()
        diag = self.block.diagonal()
        size = self.interior.size
        self.precond = LinearOperator((size, size), matvec=lambda r: r / diag, dtype=np.float64)
        self._last: Optional[np.ndarray] = None

    def inner(self, u: np.ndarray, v: np.ndarray) -> float:
        return float(u @ (self.full @ v))

    def norm(self, u: np.ndarray) -> float:
        return math.sqrt(max(self.inner(u, u), 0.0))

    def gradient(self, res: np.ndarray) -> Tuple[np.ndarray, float]:
        """Return ``(G, ||J'(u)||_H')`` for the residual ``res``."""

        rhs = (self.g.measure * res)[self.interior]
        out = np.zeros(self.g.n)
        if not np.any(rhs):
            return out, 0.0
        sol, info = cg(
            self.block,
            rhs,
            x0=self._last,
            rtol=self.rtol,
            atol=0.0,
            maxiter=10 * rhs.size + 10,
            M=self.precond,
        )
        if info > 0:
            log.debug("CG stopped after %d iterations above tolerance", info)
        self._last = sol
        out[self.interior] = sol
        return out, math.sqrt(max(float(sol @ rhs), 0.0))


def h_gradient(g: WeightedGraph, a: Potential, u: VertexFunction, rtol: float = 1e-2) -> Tuple[VertexFunction, float]:
    """H-gradient representative of ``J'(u)`` and its dual norm."""

    a_values = require_a1(g, a)
    op = HilbertOperator(g, a_values, rtol)
    G, dual = op.gradient(residual_array(g, a_values, _values(g, u)))
    return g.function(G), dual


def initial_guess(g: WeightedGraph, cfg: SolverConfig, rng: Optional[np.random.Generator] = None) -> np.ndarray:
    """Starting function from ``cfg.init``; always zero on the boundary."""

    if cfg.init == "positive_bump":
        dist = hop_distances(g, cfg.init_vertex)
        values = np.where(np.isfinite(dist), cfg.init_height * np.exp2(-np.minimum(dist, 1e3)), 0.0)
    elif cfg.init == "constant":
        values = np.full(g.n, float(cfg.init_constant))
    else:
        rng = rng if rng is not None else np.random.default_rng(cfg.seed)
        values = cfg.init_scale * rng.standard_normal(g.n)
    values = np.array(values, dtype=np.float64)
    values[g.boundary] = 0.0
    if not np.any(values):
        raise ValueError(f"initial guess {cfg.init!r} vanishes on the interior of {g.name}")
    return values


def _init_values(g: WeightedGraph, init: InitLike, cfg: SolverConfig) -> np.ndarray:
    if init is None:
        return initial_guess(g, cfg)
    values = np.array(_values(g, init) if isinstance(init, VertexFunction) else init, dtype=np.float64)
    if values.size != g.n:
        raise ValueError(f"initial guess has {values.size} values, graph has {g.n} vertices")
    values[g.boundary] = 0.0
    if not np.any(values):
        raise ValueError("initial guess vanishes on the interior")
    return values


def _project(g: WeightedGraph, a_values: np.ndarray, w: np.ndarray) -> Optional[Tuple[np.ndarray, EnergyParts]]:
    if not np.any(w):
        return None
    try:
        t = projection_scale(energy_parts(g, a_values, w))
    except ProjectionError:
        return None
    out = t * w
    return out, energy_parts(g, a_values, out)


def _record(
    iteration: int,
    parts: EnergyParts,
    dual: float,
    res_l2: float,
    step: float,
    level: Optional[float] = None,
    res_linf: float = math.nan,
) -> IterationRecord:
    return IterationRecord(
        iteration=iteration,
        J=parts.J if level is None else level,
        dual_norm=dual,
        nehari_defect=parts.defect,
        residual_l2=res_l2,
        step=step,
        cerami_product=(1.0 + math.sqrt(max(parts.h, 0.0))) * dual,
        residual_linf=res_linf,
    )


def _bb_step(op: HilbertOperator, previous: Optional[Tuple[np.ndarray, np.ndarray]], u: np.ndarray, G: np.ndarray, step: float) -> float:
    if previous is None:
        return step
    s = u - previous[0]
    y = G - previous[1]
    sy = op.inner(s, y)
    if sy <= 0:
        return step
    return min(max(op.inner(s, s) / sy, _STEP_RANGE[0]), _STEP_RANGE[1])


def _descend(
    g: WeightedGraph,
    a_values: np.ndarray,
    op: HilbertOperator,
    u: np.ndarray,
    cfg: SolverConfig,
    trace: SolveTrace,
    start: int = 0,
) -> np.ndarray:
    parts = energy_parts(g, a_values, u)
    if not math.isfinite(parts.J):
        trace.termination = "aborted"
        raise NonFiniteEnergyError("energy of the initial iterate is not finite", trace)

    step = cfg.step
    previous: Optional[Tuple[np.ndarray, np.ndarray]] = None
    last = start + cfg.max_iters
    for iteration in range(start, last + 1):
        res = residual_array(g, a_values, u)
        res_linf, res_l2 = residual_norms(g, res)
        G, dual = op.gradient(res)
        trace.records.append(_record(iteration, parts, dual, res_l2, step, res_linf=res_linf))
        log.debug("iter %d J=%.15g residual=%.3e dual=%.3e step=%.3e", iteration, parts.J, res_l2, dual, step)

        if res_l2 <= cfg.grad_tol:
            trace.termination = "converged"
            break
        if iteration == last:
            trace.termination = "max_iters"
            break

        step = _bb_step(op, previous, u, G, step)
        accepted = None
        trial = step
        floor = 64.0 * _EPS * max(1.0, abs(parts.J))
        for _ in range(cfg.max_backtracks):
            w = u - trial * G
            w[g.boundary] = 0.0
            candidate = _project(g, a_values, w)
            if candidate is not None and math.isfinite(candidate[1].J):
                w_parts = candidate[1]
                drop = cfg.armijo * trial * dual * dual
                if w_parts.J <= parts.J - drop:
                    accepted = candidate
                    break
                if drop <= floor and w_parts.J <= parts.J + 0.125 * floor:
                    # decrease is below rounding; require the residual to shrink instead
                    _, w_res = residual_norms(g, residual_array(g, a_values, candidate[0]))
                    if w_res < res_l2:
                        accepted = candidate
                        break
            trial *= cfg.shrink

        if accepted is None:
            trace.termination = "stalled"
            log.warning("Backtracking underflow at iteration %d (residual %.3e)", iteration, res_l2)
            break

        previous = (u, G)
        u, parts = accepted
        step = trial
        if not math.isfinite(parts.J):
            trace.termination = "aborted"
            raise NonFiniteEnergyError(f"energy became non-finite at iteration {iteration + 1}", trace)
    return u


def nehari_descent(
    g: WeightedGraph,
    a: Potential,
    cfg: SolverConfig,
    init: InitLike = None,
) -> Tuple[VertexFunction, SolveTrace]:
    """Minimize ``J`` over the Nehari set by projected H-gradient descent.

    Each step is ``u <- P(u - s G)`` where ``P`` is the closed-form Nehari
    projection, ``G`` the H-gradient and ``s`` a Barzilai-Borwein step cut
    back until the Armijo condition holds. Termination is on the weighted L2
    residual; ``trace.linf_within`` records whether the sup-norm residual
    also meets ``grad_tol * (1 + |u|_inf)``.
    """

    a_values = require_a1(g, a)
    op = HilbertOperator(g, a_values, cfg.cg_rtol)
    u0 = _init_values(g, init, cfg)
    start, _ = _project_or_raise(g, a_values, u0)

    trace = SolveTrace()
    log.info("Nehari descent on %s (%d vertices, init %s)", g.name, g.n, "given" if init is not None else cfg.init)
    u = _descend(g, a_values, op, start, cfg, trace)
    _check_positivity(g, u0, u)
    final = trace.final
    trace.linf_within = bool(final.residual_linf <= cfg.grad_tol * (1.0 + float(np.max(np.abs(u)))))
    if trace.converged and not trace.linf_within:
        log.warning("Sup-norm residual %.3e is above grad_tol * (1 + |u|_inf)", final.residual_linf)
    log.info(
        "Nehari descent %s after %d iterations: J=%.12g residual=%.3e",
        trace.termination,
        trace.iterations,
        final.J,
        final.residual_l2,
    )
    return g.function(u), trace


def _project_or_raise(g: WeightedGraph, a_values: np.ndarray, u: np.ndarray) -> Tuple[np.ndarray, float]:
    t = projection_scale(energy_parts(g, a_values, u))
    return t * u, t


def _check_positivity(g: WeightedGraph, u0: np.ndarray, u: np.ndarray) -> None:
    inner = g.interior
    if np.all(u0[inner] >= 0) and np.any(u[inner] <= 0):
        log.warning("Positivity lost on %s: %d interior vertices with u <= 0", g.name, int(np.sum(u[inner] <= 0)))


def _sphere_directions(
    g: WeightedGraph,
    a_values: np.ndarray,
    op: HilbertOperator,
    direction: np.ndarray,
    count: int,
    rng: np.random.Generator,
) -> List[EnergyParts]:
    raw = [direction]
    for _ in range(count):
        v = rng.standard_normal(g.n)
        v[g.boundary] = 0.0
        if np.any(v):
            raw.append(v)
    units = [v / op.norm(v) for v in raw]
    return map_ordered(lambda v: energy_parts(g, a_values, v), units)


def geometry_check(
    g: WeightedGraph,
    a: Potential,
    direction: VertexFunction,
    cfg: Optional[SolverConfig] = None,
    rng: Optional[np.random.Generator] = None,
) -> MountainPassGeometry:
    """Detect the mountain-pass geometry of ``J`` around 0.

    The endpoint is ``t1 * direction`` with ``t1`` doubled until ``J < 0``. The
    sphere radius is ``rho = min(|e|_H / 2, sqrt(kappa))`` with ``kappa`` the
    smallest ``mu (a + 1)`` on the interior: on that sphere every ``u^2 <= 1``,
    so ``log u^2 <= 0`` and ``J >= rho^2 / 2 = delta`` holds for every
    direction, sampled or not. The sampled minimum is reported alongside.
    """

    cfg = cfg or SolverConfig()
    rng = rng if rng is not None else np.random.default_rng(cfg.seed)
    a_values = require_a1(g, a)
    p = np.array(_values(g, direction), dtype=np.float64)
    p[g.boundary] = 0.0
    if not np.any(p):
        raise GeometryError("direction vanishes on the interior")

    parts = energy_parts(g, a_values, p)
    t1 = 1.0
    doublings = 0
    while fiber_value_parts(parts, t1) >= 0.0:
        if doublings >= cfg.geometry_budget:
            raise GeometryError(f"no endpoint with J < 0 within {cfg.geometry_budget} doublings")
        t1 *= 2.0
        doublings += 1
    endpoint = t1 * p

    op = HilbertOperator(g, a_values)
    inner = g.interior
    kappa = float(np.min(g.measure[inner] * (a_values[inner] + 1.0)))
    rho = min(0.5 * op.norm(endpoint), math.sqrt(kappa))
    delta = 0.5 * rho * rho
    directions = _sphere_directions(g, a_values, op, p, cfg.sphere_samples, rng)
    sampled = min(fiber_value_parts(d, rho) for d in directions)
    if not delta > 0.0 or not sampled >= delta * (1.0 - 1e-9):
        raise GeometryError(f"sphere bound failed: rho={rho:.6g}, delta={delta:.6g}, sampled minimum {sampled:.6g}")
    log.debug(
        "Geometry on %s: rho=%.4g delta=%.4g (sampled %.4g) t1=%g (%d doublings)",
        g.name,
        rho,
        delta,
        sampled,
        t1,
        doublings,
    )
    return MountainPassGeometry(
        rho=rho,
        delta=delta,
        endpoint=g.function(endpoint),
        t1=t1,
        doublings=doublings,
        delta_sampled=sampled,
    )


def _on_ray(a: np.ndarray, b: np.ndarray) -> bool:
    """Whether the segment ``[a, b]`` lies on a ray from 0."""

    na, nb = float(np.linalg.norm(a)), float(np.linalg.norm(b))
    if na == 0.0 or nb == 0.0:
        return True
    return float(a @ b) >= (1.0 - 1e-12) * na * nb


def _refine_top(
    g: WeightedGraph,
    a_values: np.ndarray,
    path: Sequence[np.ndarray],
    top: int,
) -> Tuple[np.ndarray, float, np.ndarray]:
    """Maximize ``J`` over the two path segments around node ``top``.

    On a segment lying on a ray from 0 the maximum is the closed-form fiber
    peak, which replaces the numerical one when it is higher.
    """

    before, here, after = path[top - 1], path[top], path[top + 1]

    def point(s: float) -> np.ndarray:
        if s < 0:
            return here + s * (here - before)
        return here + s * (after - here)

    found = minimize_scalar(
        lambda s: -energy_parts(g, a_values, point(s)).J,
        bounds=(-1.0, 1.0),
        method="bounded",
        options={"xatol": 1e-12},
    )
    s = float(found.x)
    best, level = point(s), -float(found.fun)
    here_level = energy_parts(g, a_values, here).J
    if not level >= here_level:
        s, best, level = 0.0, here, here_level

    segment = (before, here) if s < 0 else (here, after)
    if _on_ray(*segment) and np.any(best):
        peak = projection_scale(energy_parts(g, a_values, best)) * best
        peak_level = energy_parts(g, a_values, peak).J
        if peak_level >= level:
            best, level = peak, peak_level

    tangent = segment[1] - segment[0]
    return best, level, tangent


def _path_max(g: WeightedGraph, a_values: np.ndarray, path: Sequence[np.ndarray]) -> Tuple[np.ndarray, float, np.ndarray]:
    levels = [energy_parts(g, a_values, node).J for node in path]
    top = int(np.argmax(levels))
    if top in (0, len(path) - 1):
        raise GeometryError("path maximizer sits on an endpoint")
    return _refine_top(g, a_values, path, top)


def _polyline(op: HilbertOperator, corners: Sequence[np.ndarray], count: int) -> List[np.ndarray]:
    """Nodes along ``corners`` spaced by H-arclength; every corner is a node.

    The first two pieces get at least two segments each so the path
    maximizer has interior neighbours on both sides.
    """

    pieces = [(a, b, op.norm(b - a)) for a, b in zip(corners[:-1], corners[1:])]
    pieces = [piece for piece in pieces if piece[2] > 0.0]
    total = sum(length for _, _, length in pieces)
    nodes: List[np.ndarray] = []
    for k, (a, b, length) in enumerate(pieces):
        segments = max(2 if k < 2 else 1, int(round((count - 1) * length / total)))
        nodes.extend(a + tau * (b - a) for tau in np.linspace(0.0, 1.0, segments + 1)[:-1])
    nodes.append(pieces[-1][1])
    return nodes


def _escape_scale(g: WeightedGraph, a_values: np.ndarray, w: np.ndarray, endpoint: np.ndarray, samples: int) -> float:
    """A scale ``S >= 1`` with ``J < 0`` on the chord from ``S w`` to ``S e``.

    ``J(S v) < 0`` exactly when ``S > sqrt(e) t_v``; the sampled worst case is
    doubled.
    """

    worst = 0.0
    for lam in np.linspace(0.0, 1.0, max(samples, 3)):
        v = (1.0 - lam) * w + lam * endpoint
        if not np.any(v):
            raise GeometryError("path chord passes through 0")
        worst = max(worst, projection_scale(energy_parts(g, a_values, v)))
    return max(1.0, 2.0 * math.sqrt(math.e) * worst)


def _path_through(
    g: WeightedGraph,
    a_values: np.ndarray,
    op: HilbertOperator,
    w: np.ndarray,
    endpoint: np.ndarray,
    count: int,
) -> List[np.ndarray]:
    """Path ``0 -> t_w w -> S w -> S e -> e``.

    ``J`` falls along the ray after ``t_w w``; the chord and the ray back
    from ``S e`` to ``e`` stay at ``J < 0``. The path maximum is therefore the
    fiber peak of ``w``.
    """

    peak = projection_scale(energy_parts(g, a_values, w)) * w
    scale = _escape_scale(g, a_values, w, endpoint, count)
    return _polyline(op, [np.zeros(g.n), peak, scale * w, scale * endpoint, endpoint], count)


def _deform(
    g: WeightedGraph,
    a_values: np.ndarray,
    op: HilbertOperator,
    w: np.ndarray,
    endpoint: np.ndarray,
    count: int,
) -> Optional[Tuple[List[np.ndarray], np.ndarray, float, np.ndarray]]:
    if not np.any(w):
        return None
    try:
        path = _path_through(g, a_values, op, w, endpoint, count)
        top_point, level, tangent = _path_max(g, a_values, path)
    except (GeometryError, ProjectionError):
        return None
    if not math.isfinite(level):
        return None
    return path, top_point, level, tangent


def mountain_pass(
    g: WeightedGraph,
    a: Potential,
    cfg: SolverConfig,
    direction: InitLike = None,
) -> Tuple[VertexFunction, SolveTrace, float]:
    """Path-deformation mountain pass from 0 to a negative-energy endpoint.

    Each sweep takes the path maximizer, steps it along the H-gradient with
    the path tangent removed, and re-interpolates the path through the moved
    point. A step is kept only when the maximum over the new path drops by the
    Armijo amount. ``c_hat`` is the path maximum when the sweeps stop;
    ``trace.termination`` is the sweep outcome and ``trace.polish_termination``
    that of the final :func:`nehari_descent` polish.
    """

    a_values = require_a1(g, a)
    rng = np.random.default_rng(cfg.seed)
    p = _init_values(g, direction, cfg)
    geometry = geometry_check(g, a, g.function(p), cfg, rng)
    op = HilbertOperator(g, a_values, cfg.cg_rtol)

    endpoint = np.array(geometry.endpoint.values)
    peak, _ = _project_or_raise(g, a_values, p)
    path = _polyline(op, [np.zeros(g.n), peak, endpoint], cfg.path_points)
    top_point, c_hat, tangent = _path_max(g, a_values, path)
    trace = SolveTrace()
    step = cfg.step
    previous: Optional[Tuple[np.ndarray, np.ndarray]] = None
    log.info("Mountain pass on %s: rho=%.4g delta=%.4g, %d path points", g.name, geometry.rho, geometry.delta, len(path))

    for sweep in range(cfg.max_iters + 1):
        parts = energy_parts(g, a_values, top_point)
        res = residual_array(g, a_values, top_point)
        res_linf, res_l2 = residual_norms(g, res)
        G, dual = op.gradient(res)
        tt = op.inner(tangent, tangent)
        if tt > 0:
            G = G - (op.inner(G, tangent) / tt) * tangent
        G[g.boundary] = 0.0
        ridge = op.norm(G)
        trace.records.append(_record(sweep, parts, dual, res_l2, step, level=c_hat, res_linf=res_linf))
        log.debug("sweep %d c=%.15g ridge=%.3e residual=%.3e", sweep, c_hat, ridge, res_l2)

        if ridge <= cfg.mp_tol:
            trace.termination = "converged"
            break
        if sweep == cfg.max_iters:
            trace.termination = "max_iters"
            break

        step = _bb_step(op, previous, top_point, G, step)
        accepted = None
        trial = step
        floor = 64.0 * _EPS * max(1.0, abs(c_hat))
        for _ in range(cfg.max_backtracks):
            w = top_point - trial * G
            w[g.boundary] = 0.0
            candidate = _deform(g, a_values, op, w, endpoint, cfg.path_points)
            if candidate is not None:
                level = candidate[2]
                drop = cfg.armijo * trial * ridge * ridge
                if level <= c_hat - drop:
                    accepted = candidate
                    break
                if drop <= floor and level <= c_hat + 0.125 * floor:
                    _, w_res = residual_norms(g, residual_array(g, a_values, candidate[1]))
                    if w_res < res_l2:
                        accepted = candidate
                        break
            trial *= cfg.shrink

        if accepted is None:
            trace.termination = "stalled"
            log.warning("Mountain-pass backtracking underflow at sweep %d (ridge %.3e)", sweep, ridge)
            break
        previous = (top_point, G)
        path, top_point, c_hat, tangent = accepted
        step = trial

    if trace.termination != "converged":
        log.warning("Mountain-pass sweeps ended %s at c=%.12g", trace.termination, c_hat)
    sweeps = trace.iterations
    polished, polish_trace = nehari_descent(g, a, cfg, init=top_point)
    for record in polish_trace.records:
        trace.records.append(replace(record, iteration=record.iteration + sweeps))
    trace.polish_termination = polish_trace.termination
    trace.linf_within = polish_trace.linf_within
    log.info(
        "Mountain pass level c_hat=%.12g after %d sweeps (%s), polish %s",
        c_hat,
        sweeps,
        trace.termination,
        trace.polish_termination,
    )
    return polished, trace, float(c_hat)


def _center_in(g: WeightedGraph, center: int) -> int:
    if g.origin is None:
        return center
    hits = np.flatnonzero(g.origin == center)
    if hits.size == 0:
        raise ValueError(f"vertex {center} is not in {g.name}")
    return int(hits[0])


def _mass_diagnostics(g: WeightedGraph, u: np.ndarray, center: int, radius: int) -> Tuple[float, float]:
    mass = g.measure * u * u
    total = float(mass.sum())
    if total == 0.0:
        return math.nan, math.nan
    dist = hop_distances(g, center)
    com = float(np.sum(mass * dist) / total)
    tail = float(np.sum(mass[dist > radius / 2.0]) / total)
    return com, tail


def exhaustion_study(
    family: GraphFamilySpec,
    a_spec: PotentialFamilySpec,
    cfg: SolverConfig,
    center: int = 0,
) -> List[ExhaustionRow]:
    """Solve on growing balls, warm-starting each from the previous solution."""

    radii = list(cfg.radius_schedule)
    if not radii:
        raise ValueError("radius_schedule is empty")
    if any(b <= a for a, b in zip(radii[:-1], radii[1:])):
        raise ValueError(f"radius_schedule must be strictly increasing, got {radii}")

    full = generate(family)
    rows: List[ExhaustionRow] = []
    previous: Optional[Tuple[WeightedGraph, np.ndarray]] = None
    for radius in radii:
        ball = ball_truncate(full, center, radius)
        local = _center_in(ball, center)
        spec = replace(a_spec, center=local)
        ball_cfg = replace(cfg, init_vertex=local)
        warm = None
        if previous is not None:
            warm = zero_extend(previous[0], previous[1], ball)
            if not np.any(warm):
                warm = None
        try:
            pot = potential_generate(spec, ball)
            u, trace = nehari_descent(ball, pot, ball_cfg, init=warm)
        except (ValueError, ProjectionError, NonFiniteEnergyError) as exc:
            log.warning("Exhaustion radius %d failed: %s", radius, exc)
            rows.append(
                ExhaustionRow(
                    radius=radius,
                    vertices=ball.n,
                    d_hat=math.nan,
                    converged=False,
                    iterations=0,
                    residual_linf=math.nan,
                    center_of_mass=math.nan,
                    tail_mass=math.nan,
                )
            )
            continue

        values = u.values
        res_linf, _ = residual_norms(ball, residual_array(ball, pot.values, values))
        com, tail = _mass_diagnostics(ball, values, local, radius)
        if not trace.converged:
            log.warning("Exhaustion radius %d did not converge (%s)", radius, trace.termination)
        rows.append(
            ExhaustionRow(
                radius=radius,
                vertices=ball.n,
                d_hat=trace.final.J,
                converged=trace.converged,
                iterations=trace.iterations,
                residual_linf=res_linf,
                center_of_mass=com,
                tail_mass=tail,
            )
        )
        log.info("Radius %d: %d vertices, d_hat=%.12g, tail mass %.3e", radius, ball.n, trace.final.J, tail)
        previous = (ball, values)
    return rows


__all__ = [
    "HilbertOperator",
    "h_gradient",
    "initial_guess",
    "nehari_descent",
    "mountain_pass",
    "geometry_check",
    "exhaustion_study",
]
