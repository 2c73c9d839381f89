from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, seed, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from graphlog.errors import PotentialClassError
from graphlog.graph_core import generate, single_vertex
from graphlog.model import GraphFamilySpec, Potential, PotentialFamilySpec
from graphlog.spaces import (
    check_potential,
    h_norm_sq,
    interpolation_check,
    l1_tail_embedding_check,
    linf_embedding_check,
    log_energy,
    log_growth_constant,
    lp_from_l2_check,
    norm_report,
    potential_generate,
    volume_below,
)


def _constant(g, value: float) -> Potential:
    return potential_generate(PotentialFamilySpec(kind="constant", value=value), g)


def test_h_norm_on_a_single_vertex() -> None:
    g = single_vertex()
    a = _constant(g, 0.0)
    assert h_norm_sq(g, a, g.function([2.0])) == 4.0


def test_h_norm_includes_the_edge_energy() -> None:
    g = generate(GraphFamilySpec(kind="path", n=2))
    a = _constant(g, 0.0)
    assert h_norm_sq(g, a, g.function([1.0, 0.0])) == 2.0


def test_log_energy_parts() -> None:
    g = single_vertex()
    pos, neg = log_energy(g, g.function([2.0]))
    assert pos == pytest.approx(4.0 * math.log(4.0))
    assert neg == 0.0
    pos, neg = log_energy(g, g.function([0.5]))
    assert pos == 0.0
    assert neg == pytest.approx(0.25 * math.log(4.0))


def test_zero_entries_do_not_contribute_to_log_energy() -> None:
    g = generate(GraphFamilySpec(kind="path", n=3))
    assert log_energy(g, g.function([0.0, 1.0, 0.0])) == (0.0, 0.0)


def test_norm_report_fields() -> None:
    g = generate(GraphFamilySpec(kind="path", n=3))
    a = _constant(g, 1.0)
    report = norm_report(g, a, g.function([1.0, -2.0, 0.0]))
    assert report.l2_sq == 5.0
    assert report.linf == 2.0
    assert report.lp[4.0] == pytest.approx(17.0**0.25)
    assert report.log_energy == pytest.approx(4.0 * math.log(4.0))


@seed(1)
@settings(max_examples=50, deadline=None)
@given(u=arrays(np.float64, (8,), elements=st.floats(min_value=-50.0, max_value=50.0, allow_subnormal=False)))
def test_embedding_inequalities_hold(u: np.ndarray) -> None:
    if not np.any(u):
        return
    g = generate(GraphFamilySpec(kind="cycle", n=8, measure_range=(0.5, 2.0), weight_range=(0.1, 1.0)))
    a = _constant(g, -0.5)
    f = g.function(u)
    assert linf_embedding_check(g, a, f)
    assert interpolation_check(g, f, 3.0)
    assert lp_from_l2_check(g, f, 4.0)


def test_linf_embedding_needs_a_nonzero_function() -> None:
    g = generate(GraphFamilySpec(kind="path", n=3))
    with pytest.raises(ValueError):
        linf_embedding_check(g, _constant(g, 0.0), g.zeros())


def test_constant_below_minus_one_violates_a1() -> None:
    g = generate(GraphFamilySpec(kind="path", n=3))
    with pytest.raises(PotentialClassError, match=r"\(A1\)"):
        _constant(g, -1.5)


def test_declared_a0_above_the_infimum_is_rejected() -> None:
    g = generate(GraphFamilySpec(kind="path", n=3))
    with pytest.raises(PotentialClassError, match=r"\(A1\)"):
        potential_generate(PotentialFamilySpec(kind="constant", value=0.0, a0=0.5), g)


def test_coercive_potential_grows_with_distance() -> None:
    g = generate(GraphFamilySpec(kind="path", n=5))
    a = potential_generate(PotentialFamilySpec(kind="coercive", alpha=2.0, shift=-0.5, center=0), g)
    assert a.values.tolist() == [-0.5, 0.5, 3.5, 8.5, 15.5]
    assert a.a0 == -0.5
    assert volume_below(g, a, 1.0) == 2.0


def test_sign_changing_potential_declares_its_floor() -> None:
    g = generate(GraphFamilySpec(kind="path", n=6))
    a = potential_generate(
        PotentialFamilySpec(kind="sign_changing", alpha=1.0, shift=-0.4, amplitude=-0.5, center=0), g
    )
    assert a.a0 == pytest.approx(-0.9)
    assert a.values.min() < 0 < a.values.max()


def test_reciprocal_summable_rejects_square_growth() -> None:
    g = generate(GraphFamilySpec(kind="half_line_example1", n=40))
    with pytest.raises(PotentialClassError, match=r"\(A'2\)"):
        potential_generate(PotentialFamilySpec(kind="reciprocal_summable", power=2.0), g)


def test_reciprocal_summable_accepts_cubic_growth() -> None:
    g = generate(GraphFamilySpec(kind="half_line_example1", n=40))
    a = potential_generate(PotentialFamilySpec(kind="reciprocal_summable", power=3.0), g)
    assert a.class_tag == "A2prime"
    assert a.M0 == 1.0
    report = check_potential(g, a)
    assert report.ok
    assert report.reciprocal_partial_sum is not None
    assert report.reciprocal_tail_bound is not None and math.isfinite(report.reciprocal_tail_bound)


def test_reciprocal_summable_picks_the_first_summable_power() -> None:
    g = generate(GraphFamilySpec(kind="half_line_example1", n=40))
    a = potential_generate(PotentialFamilySpec(kind="reciprocal_summable"), g)
    assert a.label == "reciprocal_summable(power=3)"


def test_l1_tail_embedding() -> None:
    g = generate(GraphFamilySpec(kind="half_line_example1", n=40))
    a = potential_generate(PotentialFamilySpec(kind="reciprocal_summable", power=3.0), g)
    u = g.function(np.random.default_rng(1).standard_normal(g.n))
    assert l1_tail_embedding_check(g, a, u)
    with pytest.raises(PotentialClassError):
        l1_tail_embedding_check(g, _constant(g, 0.0), u)


def test_log_growth_constant_bounds_the_positive_log_energy() -> None:
    g = generate(GraphFamilySpec(kind="path", n=5, measure_range=(1.0, 2.0)))
    a = _constant(g, 0.25)
    c_q = log_growth_constant(g, a, 3.0)
    rng = np.random.default_rng(2)
    for _ in range(20):
        u = g.function(5.0 * rng.standard_normal(g.n))
        pos, _ = log_energy(g, u)
        assert pos <= c_q * h_norm_sq(g, a, u) ** 1.5 * (1.0 + 1e-12)
    with pytest.raises(ValueError):
        log_growth_constant(g, a, 2.0)
