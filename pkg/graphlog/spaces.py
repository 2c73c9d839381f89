"""Norms, potential classes and the embedding inequalities on truncations."""
from __future__ import annotations

import logging
import math
from typing import Iterable, Optional, Tuple

import numpy as np

from .errors import DimensionError, PotentialClassError
from .graph_core import _values, edge_energy_array, hop_distances, integrate_array
from .model import (
    NormReport,
    Potential,
    PotentialClassReport,
    PotentialFamilySpec,
    VertexFunction,
    WeightedGraph,
)


log = logging.getLogger(__name__)

# |u| is clamped below by this before taking logs
LOG_FLOOR = 1e-300

POTENTIAL_FAMILIES = ("constant", "coercive", "sign_changing", "reciprocal_summable")

_AUTO_POWERS = (2, 3, 4, 5, 6)
_MIN_SHELLS = 4
_SLOPE_MARGIN = 0.25


def log_sq(u: np.ndarray) -> np.ndarray:
    """``log u^2`` as ``2 log max(|u|, 1e-300)``."""

    return 2.0 * np.log(np.maximum(np.abs(u), LOG_FLOOR))


def log_density(u: np.ndarray) -> np.ndarray:
    """Pointwise ``u^2 log u^2`` with ``0 log 0 = 0``."""

    return np.where(u == 0.0, 0.0, u * u * log_sq(u))


def potential_values(g: WeightedGraph, a: Potential) -> np.ndarray:
    if a.graph_id and a.graph_id != g.graph_id:
        raise DimensionError(f"potential belongs to graph {a.graph_id}, not {g.graph_id}")
    if a.values.size != g.n:
        raise DimensionError(f"potential has {a.values.size} values, graph has {g.n} vertices")
    return a.values


def require_a1(g: WeightedGraph, a: Potential) -> np.ndarray:
    """Return the potential values after checking hypothesis (A1)."""

    values = potential_values(g, a)
    if not a.a0 > -1.0:
        raise PotentialClassError(f"hypothesis (A1) violated: declared a0 = {a.a0} is not > -1")
    if not np.all(np.isfinite(values)):
        raise PotentialClassError("hypothesis (A1) violated: potential has non-finite values")
    inf_a = float(values.min())
    if inf_a < a.a0:
        raise PotentialClassError(f"hypothesis (A1) violated: inf a = {inf_a} is below declared a0 = {a.a0}")
    return values


def h_norm_sq_array(g: WeightedGraph, a_values: np.ndarray, u: np.ndarray) -> float:
    return edge_energy_array(g, u) + integrate_array(g, (a_values + 1.0) * u * u)


def h_inner_array(g: WeightedGraph, a_values: np.ndarray, u: np.ndarray, v: np.ndarray) -> float:
    return edge_energy_array(g, u, v) + integrate_array(g, (a_values + 1.0) * u * v)


def l2_sq_array(g: WeightedGraph, u: np.ndarray) -> float:
    return integrate_array(g, u * u)


def log_energy_array(g: WeightedGraph, u: np.ndarray) -> Tuple[float, float]:
    dens = g.measure * log_density(u)
    return float(np.sum(np.maximum(dens, 0.0))), float(np.sum(np.maximum(-dens, 0.0)))


def h_norm_sq(g: WeightedGraph, a: Potential, u: VertexFunction) -> float:
    """``integral of |grad u|^2 + (a + 1) u^2``; requires (A1)."""

    return h_norm_sq_array(g, require_a1(g, a), _values(g, u))


def e_form(g: WeightedGraph, a: Potential, u: VertexFunction) -> float:
    """``integral of |grad u|^2 + a u^2``. Not a norm when ``a`` changes sign."""

    values = _values(g, u)
    return edge_energy_array(g, values) + integrate_array(g, potential_values(g, a) * values * values)


def log_energy(g: WeightedGraph, u: VertexFunction) -> Tuple[float, float]:
    """Split ``integral of u^2 log u^2`` into its positive and negative parts.

    Both parts are returned as non-negative numbers, so the integral itself is
    ``pos - neg``. Zero entries contribute nothing to either part.
    """

    return log_energy_array(g, _values(g, u))


def norm_report(
    g: WeightedGraph,
    a: Potential,
    u: VertexFunction,
    ps: Iterable[float] = (3.0, 4.0),
) -> NormReport:
    values = _values(g, u)
    a_values = require_a1(g, a)
    absu = np.abs(values)
    lp = {float(p): float(integrate_array(g, absu**p) ** (1.0 / p)) for p in ps}
    pos, neg = log_energy_array(g, values)
    return NormReport(
        l2_sq=l2_sq_array(g, values),
        h_norm_sq=h_norm_sq_array(g, a_values, values),
        lp=lp,
        linf=float(absu.max()),
        log_energy_pos=pos,
        log_energy_neg=neg,
    )


def linf_embedding_check(g: WeightedGraph, a: Potential, u: VertexFunction) -> bool:
    """Check ``||u||_inf^2 (1 + a0) mu_min <= ||u||_H^2``."""

    values = _values(g, u)
    if not np.any(values):
        raise ValueError("linf_embedding_check needs a non-zero function")
    h = h_norm_sq_array(g, require_a1(g, a), values)
    lhs = float(np.max(values * values)) * (1.0 + a.a0) * g.mu_min
    return lhs <= h * (1.0 + 1e-12)


def interpolation_check(g: WeightedGraph, u: VertexFunction, p: float) -> bool:
    """Check ``||u||_p^p <= ||u||_inf^(p-2) ||u||_2^2`` for ``p > 2``."""

    if p <= 2:
        raise ValueError(f"interpolation needs p > 2, got {p}")
    values = np.abs(_values(g, u))
    lhs = integrate_array(g, values**p)
    rhs = float(values.max()) ** (p - 2) * integrate_array(g, values * values)
    return lhs <= rhs * (1.0 + 1e-12)


def lp_from_l2_check(g: WeightedGraph, u: VertexFunction, p: float) -> bool:
    """Check the two measure-floor bounds behind the sup-norm embedding.

    ``||u||_p^p <= mu_min^(-(p-2)/2) ||u||_2^p`` and
    ``||u||_inf <= ||u||_1 / mu_min``.
    """

    if p <= 2:
        raise ValueError(f"p must exceed 2, got {p}")
    values = np.abs(_values(g, u))
    l2 = math.sqrt(integrate_array(g, values * values))
    lp_p = integrate_array(g, values**p)
    first = lp_p <= g.mu_min ** (-(p - 2.0) / 2.0) * l2**p * (1.0 + 1e-12)
    second = float(values.max()) <= integrate_array(g, values) / g.mu_min * (1.0 + 1e-12)
    return bool(first and second)


def volume_below(g: WeightedGraph, a: Potential, M: float) -> float:
    """``Vol(D_M)`` for ``D_M = {x : a(x) <= M}``."""

    return integrate_array(g, (potential_values(g, a) <= M).astype(np.float64))


def _reciprocal_sum(g: WeightedGraph, values: np.ndarray, M0: float) -> float:
    outside = values > M0
    return float(np.sum(g.measure[outside] / values[outside]))


def l1_tail_embedding_check(g: WeightedGraph, a: Potential, u: VertexFunction) -> bool:
    """Check ``integral over V minus D_M0 of |u|`` against ``(sum mu/a)^(1/2) ||u||_H``."""

    if a.class_tag != "A2prime" or a.M0 is None:
        raise PotentialClassError("the L1 tail bound needs a potential of class (A'2) with M0")
    values = _values(g, u)
    a_values = require_a1(g, a)
    outside = a_values > a.M0
    lhs = float(np.sum(g.measure[outside] * np.abs(values[outside])))
    rhs = math.sqrt(_reciprocal_sum(g, a_values, a.M0)) * math.sqrt(h_norm_sq_array(g, a_values, values))
    return lhs <= rhs * (1.0 + 1e-12)


def log_growth_constant(g: WeightedGraph, a: Potential, q: float = 3.0) -> float:
    """Constant ``C_q`` with ``integral of (u^2 log u^2)^+ <= C_q ||u||_H^q``.

    Combines ``(s^2 log s^2)^+ <= 2/(e(q-2)) |s|^q`` with the sup-norm bound
    and ``||u||_2^2 <= ||u||_H^2 / (1 + a0)``.
    """

    if q <= 2:
        raise ValueError(f"q must exceed 2, got {q}")
    require_a1(g, a)
    base = (1.0 + a.a0) * g.mu_min
    return 2.0 / (math.e * (q - 2.0)) * base ** (-(q - 2.0) / 2.0) / (1.0 + a.a0)


def _shell_slope(g: WeightedGraph, values: np.ndarray, dist: np.ndarray, M0: float) -> Tuple[Optional[float], float, float]:
    """Fit the decay of the per-shell reciprocal sums.

    Returns ``(slope, partial_sum, tail_bound)``; slope is ``None`` when the
    truncation has too few shells to fit.
    """

    finite = np.isfinite(dist)
    outside = finite & (values > M0) & (dist >= 1)
    if not np.any(outside):
        return None, 0.0, 0.0
    radius = dist[outside].astype(np.int64)
    shells = np.bincount(radius, weights=g.measure[outside] / values[outside])
    r = np.flatnonzero(shells > 0)
    r = r[r >= 1]
    partial = float(shells.sum())
    if r.size < _MIN_SHELLS:
        return None, partial, 0.0
    outer = r[r.size // 2 :]
    if outer.size < 2:
        outer = r[-2:]
    slope, _ = np.polyfit(np.log(outer), np.log(shells[outer]), 1)
    last = int(r[-1])
    if slope >= -1.0:
        return float(slope), partial, math.inf
    coeff = shells[last] * last ** (-slope)
    tail = coeff * last ** (slope + 1.0) / (-slope - 1.0)
    return float(slope), partial, float(tail)


def _distance_from(g: WeightedGraph, center: int) -> np.ndarray:
    dist = hop_distances(g, center)
    if not np.all(np.isfinite(dist)):
        raise PotentialClassError(f"center {center} does not reach every vertex of {g.name}")
    return dist


def _reciprocal_summable(spec: PotentialFamilySpec, g: WeightedGraph) -> Potential:
    dist = _distance_from(g, spec.center)
    M0 = 1.0 if spec.M0 is None else float(spec.M0)
    if M0 <= 0:
        raise PotentialClassError(f"hypothesis (A'2) needs M0 > 0, got {M0}")
    powers = _AUTO_POWERS if spec.power is None else (spec.power,)
    for power in powers:
        values = dist**power + spec.shift
        slope, partial, tail = _shell_slope(g, values, dist, M0)
        if slope is None:
            log.debug("Too few shells on %s to fit a decay rate; accepting power %s", g.name, power)
        elif slope > -1.0 - _SLOPE_MARGIN:
            log.debug("Power %s rejected on %s: shell sums decay like r^%.3f", power, g.name, slope)
            continue
        log.info(
            "Reciprocal-summable potential on %s: a = d^%s%+g, partial sum %.6g, tail <= %.3g",
            g.name,
            power,
            spec.shift,
            partial,
            tail,
        )
        a0 = spec.shift if spec.a0 is None else spec.a0
        return Potential(
            values=values,
            a0=a0,
            class_tag="A2prime",
            M0=M0,
            graph_id=g.graph_id,
            label=f"reciprocal_summable(power={power})",
        )
    if spec.power is not None:
        raise PotentialClassError(
            f"hypothesis (A'2) violated on {g.name}: sum of mu/a diverges for a = d^{spec.power}"
        )
    raise PotentialClassError(f"hypothesis (A'2): no power in {_AUTO_POWERS} gives a summable sum of mu/a on {g.name}")


def potential_generate(spec: PotentialFamilySpec, g: WeightedGraph) -> Potential:
    """Instantiate a potential family on ``g`` and check (A1) on it."""

    kind = spec.kind
    if kind == "constant":
        values = np.full(g.n, float(spec.value))
        a0 = spec.value if spec.a0 is None else spec.a0
        pot = Potential(values=values, a0=a0, graph_id=g.graph_id, label=f"constant({spec.value})")
    elif kind == "coercive":
        dist = _distance_from(g, spec.center)
        values = dist**spec.alpha + spec.shift
        a0 = spec.shift if spec.a0 is None else spec.a0
        pot = Potential(
            values=values,
            a0=a0,
            graph_id=g.graph_id,
            label=f"coercive(alpha={spec.alpha}, shift={spec.shift})",
        )
    elif kind == "sign_changing":
        dist = _distance_from(g, spec.center)
        values = dist**spec.alpha + spec.shift + spec.amplitude * np.cos(np.pi * dist)
        a0 = spec.shift - abs(spec.amplitude) if spec.a0 is None else spec.a0
        pot = Potential(
            values=values,
            a0=a0,
            graph_id=g.graph_id,
            label=f"sign_changing(alpha={spec.alpha}, shift={spec.shift}, amplitude={spec.amplitude})",
        )
        if values.min() >= 0 or values.max() <= 0:
            log.debug("sign_changing potential on %s does not change sign on this truncation", g.name)
    elif kind == "reciprocal_summable":
        pot = _reciprocal_summable(spec, g)
    else:
        raise PotentialClassError(f"unknown potential family {kind!r}; expected one of {', '.join(POTENTIAL_FAMILIES)}")

    require_a1(g, pot)
    return pot


def check_potential(g: WeightedGraph, a: Potential) -> PotentialClassReport:
    """Report the class data of ``a`` on this truncation without raising."""

    values = potential_values(g, a)
    inf_a = float(values.min())
    ok = a.a0 > -1.0 and inf_a >= a.a0 and bool(np.all(np.isfinite(values)))
    volume = None
    partial = None
    tail = None
    if a.M0 is not None:
        volume = volume_below(g, a, a.M0)
    if a.class_tag == "A2prime":
        if a.M0 is None:
            ok = False
        else:
            partial = _reciprocal_sum(g, values, a.M0)
            ok = ok and math.isfinite(partial)
            origin = int(np.argmin(values))
            dist = hop_distances(g, origin)
            if np.all(np.isfinite(dist)):
                _, _, tail = _shell_slope(g, values, dist, a.M0)
    return PotentialClassReport(
        class_tag=a.class_tag,
        a0=a.a0,
        inf_a=inf_a,
        mu_min=g.mu_min,
        M0=a.M0,
        volume_below_M0=volume,
        reciprocal_partial_sum=partial,
        reciprocal_tail_bound=tail,
        ok=bool(ok),
    )


__all__ = [
    "POTENTIAL_FAMILIES",
    "log_sq",
    "log_density",
    "require_a1",
    "h_norm_sq",
    "e_form",
    "log_energy",
    "norm_report",
    "linf_embedding_check",
    "interpolation_check",
    "lp_from_l2_check",
    "volume_below",
    "l1_tail_embedding_check",
    "log_growth_constant",
    "potential_generate",
    "check_potential",
]
