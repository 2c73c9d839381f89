"""Series checks for functions in H^1 whose log energy is minus infinity.

Both constructions live on a half-line-like graph and are radial in the hop
distance ``r`` from the origin:

* example 1: ``mu(x) = x`` and ``u = 1/(r log r)`` for ``r >= 3``;
* example 2: bounded measure and ``u = 1/(sqrt(r) log r)`` for ``r >= 3``.

For each we sum, shell by shell, the L2 mass, the gradient energy and the
negative log energy. The first two are certified convergent with an
integral-test tail bound, the third divergent through a minorant whose
partial sums are bounded below by an integral.
"""
from __future__ import annotations

import logging
import math
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from .graph_core import generate, hop_distances
from .model import CrossingEntry, GraphFamilySpec, SeriesReport, VertexFunction, WeightedGraph


log = logging.getLogger(__name__)

DEFAULT_BOUNDS = (5.0, 10.0, 20.0)
MIN_SCHEDULE_POINTS = 2
MIN_N = 10
FIRST = 3

CONVERGENT = "convergent_with_tail_bound"
DIVERGENT = "divergent_beyond_all_bounds"
INCONCLUSIVE = "inconclusive"

_LOGLOG3 = math.log(math.log(3.0))


def _schedule(n_schedule: Sequence[int]) -> List[int]:
    schedule = [int(n) for n in n_schedule]
    if not schedule:
        raise ValueError("n_schedule is empty")
    if any(b <= a for a, b in zip(schedule[:-1], schedule[1:])):
        raise ValueError(f"n_schedule must be strictly increasing, got {schedule}")
    if schedule[0] < FIRST:
        raise ValueError(f"n_schedule entries must be at least {FIRST}")
    return schedule


def _certifiable(schedule: Sequence[int]) -> bool:
    return len(schedule) >= MIN_SCHEDULE_POINTS and schedule[-1] >= MIN_N


def example1_u(x: np.ndarray) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    out = np.zeros_like(x)
    far = x >= FIRST
    out[far] = 1.0 / (x[far] * np.log(x[far]))
    return out


def example2_u(r: np.ndarray) -> np.ndarray:
    r = np.asarray(r, dtype=np.float64)
    out = np.zeros_like(r)
    far = r >= FIRST
    out[far] = 1.0 / (np.sqrt(r[far]) * np.log(r[far]))
    return out


def example1_build(n: int) -> Tuple[WeightedGraph, VertexFunction]:
    """Half-line ``0..n`` with ``mu(x) = x`` and ``u = 1/(x log x)`` beyond 2."""

    if n < MIN_N:
        raise ValueError(f"example1_build needs n >= {MIN_N}, got {n}")
    g = generate(GraphFamilySpec(kind="half_line_example1", n=n))
    return g, g.function(example1_u(np.arange(n + 1)))


def _blocks(terms: np.ndarray, schedule: Sequence[int]) -> List[float]:
    """Correctly rounded sums of ``terms`` between consecutive schedule points."""

    out = []
    start = 0
    for n in schedule:
        out.append(math.fsum(terms[start : n + 1].tolist()))
        start = n + 1
    return out


def _prefix_sums(blocks: Sequence[float]) -> List[float]:
    return [math.fsum(blocks[: k + 1]) for k in range(len(blocks))]


def _convergent(
    name: str,
    terms: np.ndarray,
    schedule: Sequence[int],
    tail: Callable[[int], float],
) -> SeriesReport:
    blocks = _blocks(terms, schedule)
    report = SeriesReport(
        name=name,
        partial_sums=list(zip(schedule, _prefix_sums(blocks))),
        tail_bounds=[(n, float(tail(n))) for n in schedule],
        increments=list(zip(schedule, blocks)),
    )
    if not _certifiable(schedule):
        return report
    scanned = terms[FIRST : schedule[-1] + 1]
    backed = all(
        math.isfinite(bound) and math.fsum(blocks[k + 1 :]) <= bound * (1.0 + 1e-12)
        for k, (_, bound) in enumerate(report.tail_bounds)
    )
    if np.all(scanned > 0) and backed:
        report.verdict = CONVERGENT
    return report


def _crossings(
    sums: np.ndarray,
    bounds: Sequence[float],
    certified_log_index: Callable[[float], float],
) -> List[CrossingEntry]:
    table = []
    for bound in bounds:
        idx = int(np.searchsorted(sums, bound, side="right"))
        if idx < sums.size:
            table.append(CrossingEntry(bound=float(bound), index=idx, log_index=math.log(idx), kind="scanned"))
        else:
            table.append(
                CrossingEntry(bound=float(bound), index=None, log_index=certified_log_index(bound), kind="certified_bound")
            )
    return table


def _divergent(
    name: str,
    terms: np.ndarray,
    minorant: np.ndarray,
    coefficient: float,
    schedule: Sequence[int],
    bounds: Sequence[float],
) -> SeriesReport:
    """Divergence through ``terms >= minorant = coefficient / (r log r)``.

    The minorant partial sums satisfy
    ``sum_{r=3}^{N} >= coefficient (log log (N+1) - log log 3)``, which gives a
    certified crossing index beyond the scanned range.
    """

    sums = np.cumsum(terms)
    minor_sums = np.cumsum(minorant)

    def lower(n: int) -> float:
        return coefficient * (math.log(math.log(n + 1.0)) - _LOGLOG3)

    def certified_log_index(bound: float) -> float:
        # natural log of N + 1, the first index whose lower bound exceeds ``bound``
        return math.exp(bound / coefficient + _LOGLOG3)

    blocks = _blocks(terms, schedule)
    report = SeriesReport(
        name=name,
        partial_sums=list(zip(schedule, _prefix_sums(blocks))),
        crossings=_crossings(sums, bounds, certified_log_index),
        minorant_crossings=_crossings(minor_sums, bounds, certified_log_index),
        increments=list(zip(schedule, blocks)),
    )
    if not _certifiable(schedule) or coefficient <= 0:
        return report
    top = schedule[-1] + 1
    dominated = bool(np.all(terms[FIRST:top] >= minorant[FIRST:top]))
    lower_ok = all(minor_sums[n] >= lower(n) * (1.0 - 1e-12) for n in schedule)
    if dominated and lower_ok and np.all(terms[FIRST:top] > 0):
        report.verdict = DIVERGENT
    return report


def _reciprocal_log(r: np.ndarray, power: int) -> np.ndarray:
    out = np.zeros_like(r, dtype=np.float64)
    far = r >= FIRST
    out[far] = 1.0 / (r[far] * np.log(r[far]) ** power)
    return out


def example1_verify(
    n_schedule: Sequence[int],
    bounds: Sequence[float] = DEFAULT_BOUNDS,
) -> Tuple[SeriesReport, SeriesReport, SeriesReport]:
    """Certify the L2, gradient and log-energy series of example 1.

    The L2 terms are ``1/(x log^2 x)`` with tail ``1/log N``. The gradient
    terms ``(u(x+1) - u(x))^2 <= u(x)^2`` have tail
    ``1/(N^2 log^2 N) + 1/(N log^2 N)``. The negative log energy dominates
    ``2/(x log x)``.
    """

    schedule = _schedule(n_schedule)
    x = np.arange(schedule[-1] + 1, dtype=np.float64)
    u = example1_u(x)
    mu = x.copy()
    mu[0] = 1.0

    l2_terms = mu * u * u
    grad_terms = np.zeros_like(x)
    grad_terms[1:] = np.diff(u) ** 2
    logu2 = 2.0 * np.log(np.where(u > 0, u, 1.0))
    logneg_terms = -mu * u * u * logu2

    l2 = _convergent("l2", l2_terms, schedule, lambda n: 1.0 / math.log(n))
    grad = _convergent(
        "grad",
        grad_terms,
        schedule,
        lambda n: 1.0 / (n * n * math.log(n) ** 2) + 1.0 / (n * math.log(n) ** 2),
    )
    logneg = _divergent("logneg", logneg_terms, 2.0 * _reciprocal_log(x, 1), 2.0, schedule, bounds)
    log.info("example1 up to N=%d: %s, %s, %s", schedule[-1], l2.verdict, grad.verdict, logneg.verdict)
    return l2, grad, logneg


def _half_line(n: int) -> WeightedGraph:
    return generate(GraphFamilySpec(kind="half_line", n=n))


def shell_statistics(g: WeightedGraph, center: int, n_max: int) -> Dict[str, np.ndarray]:
    """Per-shell vertex counts, measure and edge data up to ``n_max``."""

    dist = hop_distances(g, center)
    reach = np.isfinite(dist) & (dist <= n_max)
    r = np.where(reach, dist, -1).astype(np.int64)
    size = n_max + 1
    counts = np.bincount(r[reach], minlength=size)[:size]
    mass = np.bincount(r[reach], weights=g.measure[reach], minlength=size)[:size]
    x, y = g.edges[:, 0], g.edges[:, 1]
    inside = reach[x] & reach[y]
    outer = np.maximum(r[x], r[y])[inside]
    u = example2_u(np.maximum(r, 0))
    grad = np.bincount(outer, weights=g.weights[inside] * (u[y] - u[x])[inside] ** 2, minlength=size)[:size]
    crossing = inside & (r[x] != r[y])
    edge_counts = np.bincount(np.maximum(r[x], r[y])[crossing], minlength=size)[:size]
    return {"counts": counts, "mass": mass, "grad": grad, "edge_counts": edge_counts}


def example2_verify(
    n_schedule: Sequence[int],
    builder: Optional[Callable[[int], WeightedGraph]] = None,
    center: int = 0,
    bounds: Sequence[float] = DEFAULT_BOUNDS,
) -> Tuple[SeriesReport, SeriesReport, SeriesReport]:
    """Certify the three series of example 2 on a bounded-measure family.

    ``builder(n)`` must return a graph reaching hop distance ``n`` from
    ``center``; the default is the half-line with unit measure. The largest
    shell size and edge count seen on the scanned range are taken as the
    family's shell bounds for the tails.
    """

    schedule = _schedule(n_schedule)
    n_max = schedule[-1]
    g = (builder or _half_line)(n_max)
    stats = shell_statistics(g, center, n_max)

    r = np.arange(n_max + 1, dtype=np.float64)
    u = example2_u(r)
    mu_min = g.mu_min
    mu_max = g.mu_max if g.mu_max is not None else float(g.measure.max())
    w_max = float(g.weights.max()) if g.weights.size else 0.0
    k_v = float(stats["counts"][FIRST:].max())
    k_e = float(stats["edge_counts"][FIRST:].max())

    l2_terms = stats["mass"] * u * u
    logu2 = 2.0 * np.log(np.where(u > 0, u, 1.0))
    logneg_terms = -stats["mass"] * u * u * logu2

    l2 = _convergent("l2", l2_terms, schedule, lambda n: mu_max * k_v / math.log(n))
    grad = _convergent(
        "grad",
        stats["grad"],
        schedule,
        lambda n: w_max * k_e * (1.0 / (n * math.log(n) ** 2) + 1.0 / math.log(n)),
    )
    logneg = _divergent("logneg", logneg_terms, mu_min * _reciprocal_log(r, 1), mu_min, schedule, bounds)
    log.info("example2 on %s up to N=%d: %s, %s, %s", g.name, n_max, l2.verdict, grad.verdict, logneg.verdict)
    return l2, grad, logneg


def _log_ratio(s: np.ndarray, eps: float) -> np.ndarray:
    s2 = s * s
    return np.abs(s2 * np.log(s2)) / (s ** (2.0 - eps) + s ** (2.0 + eps))


def _check_eps(eps: float) -> None:
    if not 0.0 < eps < 1.0:
        raise ValueError(f"eps must lie in (0, 1), got {eps}")


def validate_c_epsilon(eps: float, c: float, samples: int = 10**5, seed: int = 0, s_max: float = 1e3) -> int:
    """Count samples in ``(0, s_max]`` violating ``|s^2 log s^2| <= c (s^(2-eps) + s^(2+eps))``.

    Half the samples are uniform, half log-uniform from ``1e-12``.
    """

    _check_eps(eps)
    rng = np.random.default_rng(seed)
    half = samples // 2
    uniform = s_max - rng.uniform(0.0, s_max, size=half)
    spread = 10.0 ** rng.uniform(-12.0, math.log10(s_max), size=samples - half)
    s = np.concatenate([uniform, spread])
    s2 = s * s
    lhs = np.abs(s2 * np.log(s2))
    rhs = c * (s ** (2.0 - eps) + s ** (2.0 + eps))
    return int(np.sum(lhs > rhs))


def c_epsilon_estimate(
    eps: float,
    grid_points: int = 10**6,
    inflate: float = 1.05,
    samples: int = 10**5,
    seed: int = 0,
) -> float:
    """Grid maximum of the ratio on ``[1e-12, 1e12]``, inflated and re-validated."""

    _check_eps(eps)
    grid = np.logspace(-12.0, 12.0, grid_points)
    c = inflate * float(np.max(_log_ratio(grid, eps)))
    violations = validate_c_epsilon(eps, c, samples=samples, seed=seed)
    if violations:
        raise ValueError(f"C_eps={c:.6g} for eps={eps} fails on {violations} of {samples} samples")
    log.debug("C_eps for eps=%g is %.6g", eps, c)
    return c


__all__ = [
    "DEFAULT_BOUNDS",
    "CONVERGENT",
    "DIVERGENT",
    "INCONCLUSIVE",
    "example1_u",
    "example2_u",
    "example1_build",
    "example1_verify",
    "example2_verify",
    "shell_statistics",
    "c_epsilon_estimate",
    "validate_c_epsilon",
]
