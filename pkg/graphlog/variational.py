"""Energy functional, its derivative, and the Nehari fibering map.

The fiber of ``u`` is ``j(t) = J(t u)``. With ``h = ||u||_H^2``,
``l2 = ||u||_2^2`` and ``L = integral of u^2 log u^2`` it expands to

    j(t) = t^2/2 (h - L) - t^2 log t * l2
    j'(t)/t = h - l2 - L - log(t^2) l2

so the unique maximizer ``t_u`` has a closed form.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import List, Optional, Sequence

import numpy as np
from scipy.optimize import brentq

from .errors import CertificateError, EnergyIdentityError, ProjectionError
from .graph_core import _values, edge_energy_array, integrate_array, laplacian_array
from .model import EnergyReport, FiberReport, LowerBoundReport, Potential, VertexFunction, WeightedGraph
from .spaces import (
    e_form,
    h_norm_sq_array,
    l2_sq_array,
    log_energy_array,
    log_growth_constant,
    log_sq,
    require_a1,
)
from .workers import map_ordered


log = logging.getLogger(__name__)

# exp() overflows past this
_MAX_LOG_SCALE = 700.0
_FIBER_SAMPLES = 50


@dataclass(frozen=True)
class EnergyParts:
    h: float
    l2: float
    log_pos: float
    log_neg: float

    @property
    def log_energy(self) -> float:
        return self.log_pos - self.log_neg

    @property
    def J(self) -> float:
        return 0.5 * self.h - 0.5 * self.log_energy

    @property
    def defect(self) -> float:
        return self.h - self.l2 - self.log_energy


def energy_parts(g: WeightedGraph, a_values: np.ndarray, u: np.ndarray) -> EnergyParts:
    pos, neg = log_energy_array(g, u)
    return EnergyParts(h=h_norm_sq_array(g, a_values, u), l2=l2_sq_array(g, u), log_pos=pos, log_neg=neg)


def energy_array(g: WeightedGraph, a_values: np.ndarray, u: np.ndarray) -> float:
    return energy_parts(g, a_values, u).J


def residual_array(g: WeightedGraph, a_values: np.ndarray, u: np.ndarray) -> np.ndarray:
    """``-Laplacian u + a u - u log u^2``, zeroed at boundary vertices."""

    res = -laplacian_array(g, u) + a_values * u - u * log_sq(u)
    res[g.boundary] = 0.0
    return res


def residual_norms(g: WeightedGraph, res: np.ndarray) -> tuple[float, float]:
    inner = g.interior
    if inner.size == 0:
        return 0.0, 0.0
    r = res[inner]
    return float(np.max(np.abs(r))), math.sqrt(float(np.sum(g.measure[inner] * r * r)))


def derivative_array(g: WeightedGraph, a_values: np.ndarray, u: np.ndarray, v: np.ndarray) -> float:
    return (
        edge_energy_array(g, u, v)
        + integrate_array(g, a_values * u * v)
        - integrate_array(g, u * v * log_sq(u))
    )


def fiber_value_parts(parts: EnergyParts, t: float) -> float:
    if t == 0.0:
        return 0.0
    return 0.5 * t * t * (parts.h - parts.log_energy) - t * t * math.log(t) * parts.l2


def fiber_slope_parts(parts: EnergyParts, t: float) -> float:
    """``j'(t)/t``."""

    return parts.defect - math.log(t * t) * parts.l2


def projection_scale(parts: EnergyParts) -> float:
    if parts.l2 <= 0.0:
        raise ProjectionError("Nehari projection is undefined for u = 0")
    exponent = parts.defect / (2.0 * parts.l2)
    if not math.isfinite(exponent) or abs(exponent) > _MAX_LOG_SCALE:
        raise ProjectionError(f"Nehari scale exp({exponent:.6g}) is out of floating-point range")
    return math.exp(exponent)


def project_array(g: WeightedGraph, a_values: np.ndarray, u: np.ndarray) -> tuple[np.ndarray, float]:
    t = projection_scale(energy_parts(g, a_values, u))
    return t * u, t


def energy(g: WeightedGraph, a: Potential, u: VertexFunction) -> EnergyReport:
    """Evaluate ``J`` and the pointwise residual at ``u``.

    ``nehari_defect`` is summed independently as ``J'(u).u`` and the identity
    ``J - defect/2 = ||u||_2^2 / 2`` is checked on every call; a violation
    raises :class:`EnergyIdentityError`.
    """

    values = _values(g, u)
    a_values = require_a1(g, a)
    parts = energy_parts(g, a_values, values)
    defect = derivative_array(g, a_values, values, values)
    res_linf, res_l2 = residual_norms(g, residual_array(g, a_values, values))
    J = parts.J
    scale = abs(J) + abs(defect) + parts.l2 + parts.h + parts.log_pos + parts.log_neg
    gap = abs(J - 0.5 * defect - 0.5 * parts.l2)
    if math.isfinite(scale) and gap > 1e-10 * max(scale, 1e-300):
        raise EnergyIdentityError(f"J - J'(u)u/2 differs from |u|_2^2/2 by {gap:.3e} on {g.graph_id}")
    return EnergyReport(
        J=J,
        h_norm_sq=parts.h,
        l2_sq=parts.l2,
        log_energy=parts.log_energy,
        nehari_defect=defect,
        residual_linf=res_linf,
        residual_l2=res_l2,
    )


def derivative(g: WeightedGraph, a: Potential, u: VertexFunction, v: VertexFunction) -> float:
    """``J'(u).v = integral of Gamma(u, v) + a u v - u v log u^2``."""

    return derivative_array(g, require_a1(g, a), _values(g, u), _values(g, v))


def residual(g: WeightedGraph, a: Potential, u: VertexFunction) -> VertexFunction:
    return g.function(residual_array(g, require_a1(g, a), _values(g, u)))


def fiber_value(g: WeightedGraph, a: Potential, u: VertexFunction, t: float) -> float:
    """``J(t u)`` from the fiber expansion."""

    if t < 0:
        raise ValueError("fiber parameter must be non-negative")
    return fiber_value_parts(energy_parts(g, require_a1(g, a), _values(g, u)), t)


def nehari_project(g: WeightedGraph, a: Potential, u: VertexFunction) -> FiberReport:
    """Scale ``u`` onto the Nehari set with the closed-form ``t_u``."""

    values = _values(g, u)
    parts = energy_parts(g, require_a1(g, a), values)
    t_u = projection_scale(parts)
    grid = t_u * np.logspace(-2.0, 2.0, _FIBER_SAMPLES)
    samples = [(float(t), fiber_slope_parts(parts, float(t))) for t in grid]
    j_at_t = fiber_value_parts(parts, t_u)

    slopes = np.array([s for _, s in samples])
    if np.any(np.diff(slopes) >= 0):
        log.warning("Fiber slope samples of %s are not strictly decreasing", g.graph_id)
    if any(fiber_value_parts(parts, t) > j_at_t for t, _ in samples):
        log.warning("Fiber of %s exceeds j(t_u) on the audit grid", g.graph_id)
    return FiberReport(t_u=t_u, j_at_t=j_at_t, slope_samples=samples, projected=u.scaled(t_u))


def fiber_root_bisect(g: WeightedGraph, a: Potential, u: VertexFunction, rtol: float = 1e-14) -> float:
    """Root of ``j'(t)/t`` by bracketing, as a cross-check of ``t_u``."""

    parts = energy_parts(g, require_a1(g, a), _values(g, u))
    if parts.l2 <= 0.0:
        raise ProjectionError("fiber is flat for u = 0")

    def slope(t: float) -> float:
        return fiber_slope_parts(parts, t)

    lo, hi = 1.0, 1.0
    while slope(lo) <= 0.0:
        lo *= 0.5
    while slope(hi) >= 0.0:
        hi *= 2.0
    return float(brentq(slope, lo, hi, xtol=1e-300, rtol=max(rtol, 8.9e-16), maxiter=500))


def nehari_level_certificate(
    g: WeightedGraph,
    a: Potential,
    u_star: VertexFunction,
    trial_pool: Sequence[VertexFunction],
    tol: float = 1e-8,
    nehari_tol: float = 1e-10,
) -> float:
    """Return ``J(u_star)`` after checking it against every projected trial.

    Raises :class:`CertificateError` when ``u_star`` is off the Nehari set or
    some trial reaches a lower level.
    """

    a_values = require_a1(g, a)
    values = _values(g, u_star)
    parts = energy_parts(g, a_values, values)
    if parts.l2 == 0.0 or abs(parts.defect) > nehari_tol * parts.h:
        raise CertificateError(
            f"certificate refused: |J'(u)u| = {abs(parts.defect):.3e} exceeds {nehari_tol:g} * ||u||_H^2 = {nehari_tol * parts.h:.3e}"
        )
    d_hat = parts.J
    slack = tol * max(1.0, abs(d_hat))

    def level(v: VertexFunction) -> Optional[float]:
        trial = _values(g, v)
        if not np.any(trial):
            return None
        trial_parts = energy_parts(g, a_values, trial)
        return fiber_value_parts(trial_parts, projection_scale(trial_parts))

    levels = map_ordered(level, trial_pool)
    for idx, value in enumerate(levels):
        if value is not None and d_hat > value + slack:
            raise CertificateError(f"trial {idx} reaches level {value:.12g} below d_hat = {d_hat:.12g}")
    log.debug("Nehari certificate for %s passed against %d trials", g.graph_id, len(levels))
    return d_hat


def level_lower_bound(
    g: WeightedGraph,
    a: Potential,
    u: VertexFunction,
    q: float = 3.0,
    nehari_tol: float = 1e-8,
) -> LowerBoundReport:
    """Norm floor for a Nehari element.

    On the Nehari set ``e_form(u) = L <= C_q ||u||_H^q``; writing
    ``e_form(u) = theta ||u||_H^2`` gives ``||u||_H >= (theta / C_q)^(1/(q-2))``
    whenever ``theta > 0``.
    """

    a_values = require_a1(g, a)
    parts = energy_parts(g, a_values, _values(g, u))
    if parts.l2 == 0.0 or abs(parts.defect) > nehari_tol * parts.h:
        raise CertificateError("lower bound needs a function on the Nehari set")
    c_q = log_growth_constant(g, a, q)
    theta = e_form(g, a, u) / parts.h
    bound = (theta / c_q) ** (1.0 / (q - 2.0)) if theta > 0 else None
    return LowerBoundReport(q=q, c_q=c_q, theta=theta, h_norm=math.sqrt(parts.h), bound=bound)


def random_trial_pool(
    g: WeightedGraph,
    size: int,
    rng: np.random.Generator,
    positive: bool = False,
) -> List[VertexFunction]:
    """Random trial functions vanishing on the boundary.

    Without ``positive`` every other trial is sign-changing.
    """

    if g.interior.size == 0:
        raise ValueError(f"{g.name} has no interior vertices")
    pool = []
    while len(pool) < size:
        values = rng.standard_normal(g.n)
        if positive or len(pool) % 2 == 0:
            values = np.abs(values)
        values[g.boundary] = 0.0
        if np.any(values):
            pool.append(g.function(values))
    return pool


__all__ = [
    "EnergyParts",
    "energy",
    "derivative",
    "residual",
    "fiber_value",
    "nehari_project",
    "fiber_root_bisect",
    "nehari_level_certificate",
    "level_lower_bound",
    "random_trial_pool",
]
