import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from bicalc.core import (
    DomainError, EstimateReport, ExtendedPoint2, Interval2, Point2, QuadrantSign, ScalarField2,
    ScalarFieldN, Verdict, contains, nsim,
)

reals = st.floats(-1e6, 1e6, allow_nan=False)


def test_point_rejects_nan_and_inf():
    with pytest.raises(ValueError):
        Point2(math.nan, 0)
    with pytest.raises(ValueError):
        Point2(math.inf, 0)
    assert ExtendedPoint2(math.inf, -math.inf).x2 == -math.inf
    with pytest.raises(ValueError):
        ExtendedPoint2(0, math.nan)


def test_contains_examples():
    assert contains(Interval2.closed((0, 0), (1, 1)), (1, 1))
    assert not contains(Interval2.open((0, 0), (1, 1)), (1, 0.5))
    assert contains(Interval2((0, 0), (math.inf, 1), (True, False, True, True)), (10, 0.5))


def test_interval_invariants():
    with pytest.raises(ValueError):
        Interval2.closed((0, 0), (0, 1))
    with pytest.raises(ValueError):
        Interval2.closed((0, 0), (math.inf, 1))
    i = Interval2((0, 0), (1, 2), (False, True, True, False))
    assert i.describe() == "(0.0,1.0]x[0.0,2.0)"
    assert i.area == 2.0
    xs = i.axis_samples(0, 4)
    assert xs[0] > 0 and xs[-1] == 1.0


def test_allowed_signs_at_boundary():
    i = Interval2.closed((0, 0), (1, 1))
    assert set(i.allowed_signs((0, 0.5))) == {QuadrantSign.PP, QuadrantSign.PM}
    assert i.allowed_signs((1, 1)) == [QuadrantSign.MM]
    assert len(i.allowed_signs((0.5, 0.5))) == 4


def test_nsim_examples():
    assert nsim((0, 0), (1, 1))
    assert not nsim((0, 0), (0, 1))
    assert not nsim((2, 3), (5, 3))


@given(reals, reals, reals, reals)
def test_nsim_symmetric(a1, a2, b1, b2):
    assert nsim((a1, a2), (b1, b2)) == nsim((b1, b2), (a1, a2))


@given(st.floats(-10, 10), st.floats(-10, 10), st.floats(0.1, 5), st.floats(0.1, 5),
       st.floats(0, 2), st.floats(0, 2), st.floats(-12, 12), st.floats(-12, 12),
       st.lists(st.booleans(), min_size=4, max_size=4))
def test_contains_monotone(a1, a2, w1, w2, g1, g2, p1, p2, flags):
    inner = Interval2((a1, a2), (a1 + w1, a2 + w2), tuple(flags))
    outer = Interval2((a1 - g1, a2 - g2), (a1 + w1 + g1, a2 + w2 + g2), (True, True, True, True))
    if contains(inner, (p1, p2)):
        assert contains(outer, (p1, p2))


def test_quadrant_sign_parse():
    assert QuadrantSign.parse("+-") is QuadrantSign.PM
    assert QuadrantSign.parse("mm") is QuadrantSign.MM
    assert {s.label for s in QuadrantSign} == {"++", "+-", "-+", "--"}
    with pytest.raises(ValueError):
        QuadrantSign.parse("+")


def test_field_maps_nan_and_errors_to_domain_error():
    f = ScalarField2(lambda x1, x2: math.log(x1))
    with pytest.raises(DomainError):
        f(-1, 0)
    g = ScalarField2(lambda x1, x2: float("nan"))
    with pytest.raises(DomainError):
        g(0, 0)
    h = ScalarField2(lambda x1, x2: x1 * x2, vectorized=lambda x1, x2: x1 / x2)
    with pytest.raises(DomainError):
        h.many(np.array([1.0, 2.0]), np.array([1.0, 0.0]))


def test_field_many_fallback_loop():
    f = ScalarField2(lambda x1, x2: x1 + 2 * x2)
    out = f.many(np.arange(3.0)[:, None], np.arange(2.0)[None, :])
    assert out.shape == (3, 2)
    assert out[2, 1] == 4.0


def test_field_n_arity():
    f = ScalarFieldN(3, lambda a, b, c: a * b * c)
    assert f(1, 2, 3) == 6
    with pytest.raises(TypeError):
        f(1, 2)
    with pytest.raises(ValueError):
        ScalarFieldN(0, lambda: 0)


def test_estimate_report_invariants():
    rep = EstimateReport(1.0, Verdict.CONVERGED, [(0.1, 1.001)], residual=0.01)
    assert rep.converged
    with pytest.raises(ValueError):
        EstimateReport(1.0, Verdict.CONVERGED, [(0.1, 1.5)], residual=0.01)
    with pytest.raises(ValueError):
        EstimateReport(None, Verdict.INCONCLUSIVE, [])
