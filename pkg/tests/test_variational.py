from __future__ import annotations

import math

import numpy as np
import pytest

from graphlog import variational
from graphlog.errors import CertificateError, EnergyIdentityError, ProjectionError
from graphlog.graph_core import generate, integrate, single_vertex
from graphlog.model import GraphFamilySpec, PotentialFamilySpec
from graphlog.spaces import log_energy, potential_generate
from graphlog.variational import (
    derivative,
    energy,
    energy_array,
    fiber_root_bisect,
    fiber_value,
    level_lower_bound,
    nehari_level_certificate,
    nehari_project,
    random_trial_pool,
    residual,
)


def _constant(g, value: float):
    return potential_generate(PotentialFamilySpec(kind="constant", value=value), g)


def _positive(g, seed: int = 0):
    rng = np.random.default_rng(seed)
    return g.function(0.2 + rng.uniform(0.0, 2.0, size=g.n))


def test_single_vertex_ground_state_closed_form() -> None:
    mu, a_value = 2.0, 0.5
    g = single_vertex(mu)
    a = _constant(g, a_value)
    report = nehari_project(g, a, g.function([1.0]))
    u = report.projected.values[0]
    assert u == pytest.approx(math.exp(a_value / 2.0), rel=1e-14)
    assert report.j_at_t == pytest.approx(mu * math.exp(a_value) / 2.0, rel=1e-14)
    assert abs(residual(g, a, report.projected).values[0]) < 1e-13


def test_unit_function_is_already_on_the_nehari_set() -> None:
    g = single_vertex()
    a = _constant(g, 0.0)
    assert nehari_project(g, a, g.function([1.0])).t_u == 1.0


def test_energy_identity_and_report() -> None:
    g = generate(GraphFamilySpec(kind="cycle", n=7, weight_range=(0.5, 2.0), measure_range=(1.0, 2.0)))
    a = _constant(g, -0.3)
    u = g.function(np.random.default_rng(4).standard_normal(g.n))
    report = energy(g, a, u)
    assert report.J - 0.5 * report.nehari_defect == pytest.approx(0.5 * report.l2_sq, rel=1e-10)
    assert report.nehari_defect == pytest.approx(report.h_norm_sq - report.l2_sq - report.log_energy, rel=1e-10)
    assert report.to_dict()["J"] == report.J


def test_derivative_matches_central_differences() -> None:
    g = generate(GraphFamilySpec(kind="path", n=6))
    a = potential_generate(PotentialFamilySpec(kind="coercive", alpha=1.0, shift=-0.5), g)
    u = _positive(g, 1)
    v = g.function(np.random.default_rng(2).standard_normal(g.n))
    h = 1e-6
    plus = energy_array(g, a.values, u.values + h * v.values)
    minus = energy_array(g, a.values, u.values - h * v.values)
    assert derivative(g, a, u, v) == pytest.approx((plus - minus) / (2.0 * h), rel=1e-6)


def test_closed_form_scale_matches_bracketing() -> None:
    g = generate(GraphFamilySpec(kind="lattice2d", n=3, measure_range=(1.0, 3.0)))
    a = _constant(g, 0.2)
    u = g.function(np.random.default_rng(5).standard_normal(g.n))
    report = nehari_project(g, a, u)
    assert fiber_root_bisect(g, a, u) == pytest.approx(report.t_u, rel=1e-12)


def test_projection_is_scale_invariant() -> None:
    g = generate(GraphFamilySpec(kind="path", n=5))
    a = _constant(g, 0.0)
    u = _positive(g, 3)
    first = nehari_project(g, a, u).projected.values
    second = nehari_project(g, a, u.scaled(3.0)).projected.values
    assert np.allclose(first, second, rtol=1e-12, atol=0.0)


def test_projected_function_is_on_the_nehari_set() -> None:
    g = generate(GraphFamilySpec(kind="star", n=6))
    a = _constant(g, 0.7)
    u = _positive(g, 6)
    report = nehari_project(g, a, u)
    projected = energy(g, a, report.projected)
    assert abs(projected.nehari_defect) <= 1e-10 * projected.h_norm_sq
    assert report.j_at_t == pytest.approx(projected.J, rel=1e-12)
    assert fiber_value(g, a, u, report.t_u) == pytest.approx(report.j_at_t, rel=1e-14)
    slopes = [s for _, s in report.slope_samples]
    assert all(b < c for b, c in zip(slopes[1:], slopes[:-1]))


def test_fiber_maximum_is_at_t_u() -> None:
    g = generate(GraphFamilySpec(kind="path", n=4))
    a = _constant(g, 0.0)
    u = _positive(g, 7)
    t_u = nehari_project(g, a, u).t_u
    peak = fiber_value(g, a, u, t_u)
    for t in (0.5 * t_u, 0.9 * t_u, 1.1 * t_u, 2.0 * t_u):
        assert fiber_value(g, a, u, t) < peak


def test_projection_of_zero_is_refused() -> None:
    g = generate(GraphFamilySpec(kind="path", n=3))
    with pytest.raises(ProjectionError):
        nehari_project(g, _constant(g, 0.0), g.zeros())


def test_certificate_on_the_exact_single_vertex_solution() -> None:
    g = single_vertex(1.5)
    a = _constant(g, -0.2)
    u_star = nehari_project(g, a, g.function([1.0])).projected
    pool = random_trial_pool(g, 50, np.random.default_rng(0))
    d_hat = nehari_level_certificate(g, a, u_star, pool)
    assert d_hat == pytest.approx(1.5 * math.exp(-0.2) / 2.0, rel=1e-12)


def test_certificate_refuses_functions_off_the_nehari_set() -> None:
    g = generate(GraphFamilySpec(kind="path", n=4))
    a = _constant(g, 0.0)
    with pytest.raises(CertificateError, match="refused"):
        nehari_level_certificate(g, a, g.function([3.0, 3.0, 3.0, 3.0]), [])


def test_certificate_fails_when_a_trial_goes_lower() -> None:
    g = generate(GraphFamilySpec(kind="path", n=4))
    a = _constant(g, 0.0)
    high = nehari_project(g, a, g.function([1.0, 5.0, 5.0, 1.0])).projected
    low = g.function([1.0, 1.0, 1.0, 1.0])
    high_level = energy(g, a, high).J
    low_level = nehari_project(g, a, low).j_at_t
    assert low_level < high_level
    with pytest.raises(CertificateError, match="trial 0"):
        nehari_level_certificate(g, a, high, [low])


def test_lower_bound_holds_on_the_nehari_set() -> None:
    g = generate(GraphFamilySpec(kind="cycle", n=5))
    a = _constant(g, 0.5)
    u = nehari_project(g, a, _positive(g, 8)).projected
    report = level_lower_bound(g, a, u)
    assert report.applicable
    assert report.holds


def test_random_trial_pool_alternates_signs_and_respects_the_boundary() -> None:
    g = generate(GraphFamilySpec(kind="path", n=6))
    pool = random_trial_pool(g, 4, np.random.default_rng(1))
    assert len(pool) == 4
    assert np.all(pool[0].values >= 0)
    assert np.all(pool[2].values >= 0)


def _random_instance(rng: np.random.Generator):
    kind = ("path", "cycle", "star", "random_tree")[int(rng.integers(0, 4))]
    n = int(rng.integers(3, 12))
    g = generate(
        GraphFamilySpec(kind=kind, n=n, seed=int(rng.integers(0, 1000)), weight_range=(0.2, 3.0), measure_range=(0.5, 2.0))
    )
    a = _constant(g, float(rng.uniform(-0.9, 2.0)))
    u = g.function(rng.uniform(0.05, 3.0, size=g.n) * rng.choice([-1.0, 1.0], size=g.n))
    return g, a, u


def test_closed_form_scale_over_random_instances() -> None:
    rng = np.random.default_rng(11)
    for _ in range(200):
        g, a, u = _random_instance(rng)
        report = nehari_project(g, a, u)
        assert fiber_root_bisect(g, a, u) == pytest.approx(report.t_u, rel=1e-10)
        assert all(fiber_value(g, a, u, t) <= report.j_at_t * (1.0 + 1e-12) for t, _ in report.slope_samples)


def test_energy_identity_over_random_instances() -> None:
    rng = np.random.default_rng(12)
    for _ in range(500):
        g, a, u = _random_instance(rng)
        report = energy(g, a, u)
        scale = abs(report.J) + abs(report.nehari_defect) + report.l2_sq
        assert abs(report.J - 0.5 * report.nehari_defect - 0.5 * report.l2_sq) <= 1e-10 * scale


def test_derivative_along_a_unit_vector_is_the_weighted_residual() -> None:
    g = generate(GraphFamilySpec(kind="cycle", n=6, weight_range=(0.5, 2.0), measure_range=(1.0, 3.0)))
    a = _constant(g, 0.4)
    u = _positive(g, 5)
    res = residual(g, a, u).values
    for x in range(g.n):
        e_x = g.function(np.eye(g.n)[x])
        assert derivative(g, a, u, e_x) == pytest.approx(g.measure[x] * res[x], rel=1e-12, abs=1e-13)


def test_derivative_matches_central_differences_at_a_coarser_step() -> None:
    g = generate(GraphFamilySpec(kind="cycle", n=7, weight_range=(0.5, 2.0), measure_range=(1.0, 2.0)))
    a = _constant(g, -0.3)
    u = _positive(g, 6)
    v = g.function(np.random.default_rng(7).standard_normal(g.n))
    h = 1e-5
    plus = energy_array(g, a.values, u.values + h * v.values)
    minus = energy_array(g, a.values, u.values - h * v.values)
    assert derivative(g, a, u, v) == pytest.approx((plus - minus) / (2.0 * h), rel=1e-6)


@pytest.mark.parametrize("t", [0.1, 0.5, 2.0, 7.0])
def test_log_energy_scales_with_a_log_correction(t: float) -> None:
    g = generate(GraphFamilySpec(kind="path", n=8, measure_range=(1.0, 2.0)))
    u = _positive(g, 8)
    pos, neg = log_energy(g, u)
    scaled_pos, scaled_neg = log_energy(g, u.scaled(t))
    l2 = integrate(g, g.function(u.values * u.values))
    expected = t * t * (pos - neg) + t * t * math.log(t * t) * l2
    assert scaled_pos - scaled_neg == pytest.approx(expected, rel=1e-12, abs=1e-12)


def test_energy_identity_failure_raises(monkeypatch: pytest.MonkeyPatch) -> None:
    g = generate(GraphFamilySpec(kind="path", n=4))
    a = _constant(g, 0.0)
    u = _positive(g, 9)
    real = variational.derivative_array
    monkeypatch.setattr(variational, "derivative_array", lambda *args: real(*args) + 1.0)
    with pytest.raises(EnergyIdentityError, match="differs"):
        energy(g, a, u)
