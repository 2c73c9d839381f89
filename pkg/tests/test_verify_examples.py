from __future__ import annotations

import math

import pytest

from graphlog.verify_examples import (
    CONVERGENT,
    DIVERGENT,
    INCONCLUSIVE,
    c_epsilon_estimate,
    example1_build,
    example1_verify,
    example2_verify,
    validate_c_epsilon,
)

DECADES = [10, 100, 1000, 10**4, 10**5, 10**6]


@pytest.fixture(scope="module")
def example1_reports():
    return example1_verify(DECADES)


def test_example1_verdicts(example1_reports) -> None:
    l2, grad, logneg = example1_reports
    assert (l2.verdict, grad.verdict, logneg.verdict) == (CONVERGENT, CONVERGENT, DIVERGENT)


def test_example1_l2_tail_bound(example1_reports) -> None:
    l2, _, _ = example1_reports
    n, tail = l2.tail_bounds[-1]
    assert n == 10**6
    assert tail == pytest.approx(1.0 / math.log(1e6))
    assert round(tail, 4) == 0.0724


def test_example1_partial_sums_increase(example1_reports) -> None:
    for report in example1_reports:
        sums = [s for _, s in report.partial_sums]
        assert all(b >= c for b, c in zip(sums[1:], sums[:-1]))
        assert all(block > 0.0 for _, block in report.increments)
        assert [n for n, _ in report.increments] == DECADES


def test_example1_crossings(example1_reports) -> None:
    _, _, logneg = example1_reports
    first = logneg.crossings[0]
    assert first.bound == 5.0
    assert first.kind == "scanned"
    assert first.index is not None and first.index <= 10**6
    last = logneg.crossings[-1]
    assert last.bound == 20.0
    assert last.kind == "certified_bound"
    assert last.index is None
    assert last.log_index == pytest.approx(math.exp(10.0) * math.log(3.0))


def test_short_schedules_are_inconclusive() -> None:
    reports = example1_verify([3, 5])
    assert {r.verdict for r in reports} == {INCONCLUSIVE}
    reports = example1_verify([100])
    assert {r.verdict for r in reports} == {INCONCLUSIVE}


def test_schedule_must_increase() -> None:
    with pytest.raises(ValueError):
        example1_verify([100, 10])


def test_example2_on_the_half_line() -> None:
    reports = example2_verify([10, 100, 1000, 10**4, 10**5])
    assert tuple(r.verdict for r in reports) == (CONVERGENT, CONVERGENT, DIVERGENT)


def test_example1_build_needs_ten_vertices() -> None:
    with pytest.raises(ValueError):
        example1_build(5)
    g, u = example1_build(20)
    assert g.n == 21
    assert u.values[:3].tolist() == [0.0, 0.0, 0.0]
    assert u.values[3] == pytest.approx(1.0 / (3.0 * math.log(3.0)))


def test_c_epsilon_is_validated() -> None:
    c = c_epsilon_estimate(0.5, grid_points=10**5, samples=10**4)
    assert c > 0.0
    assert validate_c_epsilon(0.5, c, samples=10**4, seed=3) == 0
    assert validate_c_epsilon(0.5, 0.5 * c, samples=10**4, seed=3) > 0


def test_c_epsilon_grows_as_eps_shrinks() -> None:
    small = c_epsilon_estimate(0.25, grid_points=10**5, samples=10**4)
    large = c_epsilon_estimate(0.75, grid_points=10**5, samples=10**4)
    assert small > large


@pytest.mark.parametrize("eps", [0.0, 1.0, 1.5, -0.1])
def test_c_epsilon_rejects_eps_outside_the_unit_interval(eps: float) -> None:
    with pytest.raises(ValueError):
        c_epsilon_estimate(eps)


@pytest.mark.parametrize("eps", [0.1, 0.5, 0.9])
def test_log_bound_holds_on_the_full_sample(eps: float) -> None:
    c = c_epsilon_estimate(eps)
    assert validate_c_epsilon(eps, c, samples=10**5) == 0
    assert validate_c_epsilon(eps, c, samples=10**5, seed=11) == 0


def test_log_bound_constant_is_larger_for_smaller_eps() -> None:
    assert c_epsilon_estimate(0.1) >= c_epsilon_estimate(0.5)
