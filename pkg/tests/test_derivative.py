import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from bicalc import families
from bicalc.core import HypothesisError, Interval2, NoBracketError, QuadrantSign, Verdict
from bicalc.derivative import (
    Monotonicity, cauchy_mvt_solve, classify_stationary, critical_points, double_derivative,
    double_limit, intermediate_point, mixed_partials_check, monotonicity_classify, mvt_solve,
    ridders, rolle_solve,
)
from bicalc.difference import continuity_probe, delta2, delta_map_field
from bicalc.exprlang import compile_field

UNIT = Interval2.closed((0, 0), (1, 1))


def fd_mixed(fn, x, y, h=1e-4):
    # independent oracle: plain central cross difference
    return (fn(x + h, y + h) - fn(x + h, y - h) - fn(x - h, y + h) + fn(x - h, y - h)) / (4 * h * h)


def test_double_limit_examples():
    rep = double_limit(compile_field("x1+x2"), (0, 0), QuadrantSign.PP)
    assert rep.verdict is Verdict.CONVERGED and rep.value == pytest.approx(0, abs=1e-9)

    F = compile_field("x1/(x1+x2)")
    g = delta_map_field(F, (1, 1))
    # Δ_x^{x+(1,1)} is singular at x = 0, so approach the corner as a limit of Δ_x^{(1,1)}
    box = compile_field("(1/2) - (1/(1 + x2)) - (x1/(x1 + 1)) + x1/(x1 + x2)")
    rep = double_limit(box, (0, 0), QuadrantSign.PP)
    assert rep.verdict is Verdict.DIVERGED
    values = sorted(v for _, v in rep.details["witnesses"])
    assert values[0] == pytest.approx(-1 / 6, abs=1e-6)
    assert values[-1] == pytest.approx(0, abs=1e-6)
    assert g(0.5, 0.5) == pytest.approx(delta2(F, (0.5, 0.5), (1.5, 1.5)))

    rep = double_limit(compile_field("(x1*x2)/(x1^2+x2^2)"), (0, 0), QuadrantSign.PP)
    assert rep.verdict in (Verdict.DIVERGED, Verdict.INCONCLUSIVE)
    assert rep.value is None


def test_double_limit_at_infinity():
    rep = double_limit(compile_field("1/(1 + x1*x2)"), (math.inf, math.inf), QuadrantSign.PP)
    assert rep.converged and rep.value == pytest.approx(0, abs=1e-6)


def test_double_derivative_examples():
    est = double_derivative(compile_field("x1^2*x2^3/2"), (1, 1))
    assert est.converged and est.value == pytest.approx(3, abs=1e-6)
    assert double_derivative(compile_field("x1^2 + sin(x2)"), (0.3, 2)).value == pytest.approx(0, abs=1e-6)
    assert double_derivative(compile_field("2*(x1-1)*(x2+3)"), (-4, 7)).value == pytest.approx(2, abs=1e-9)


def test_signed_derivatives():
    f = compile_field("if(x1>0, if(x2>0, x1*x2, 0), 0)")
    pp = double_derivative(f, (0, 0), QuadrantSign.PP)
    mm = double_derivative(f, (0, 0), QuadrantSign.MM)
    assert pp.value == pytest.approx(1, abs=1e-9)
    assert mm.value == pytest.approx(0, abs=1e-9)
    both = double_derivative(f, (0, 0))
    assert not both.converged


def test_piecewise_quadrant_family():
    rng = np.random.default_rng(2)
    for _ in range(5):
        pw = families.piecewise_quadrant(rng)
        f = compile_field(pw.source)
        for label, d in pw.slopes.items():
            est = double_derivative(f, pw.corner, QuadrantSign.parse(label))
            assert est.value == pytest.approx(d, abs=1e-6)


def test_first_order_residual_decreases():
    est = double_derivative(compile_field("exp(x1)*sin(x2) + x1^3*x2"), (0.3, 0.4), QuadrantSign.PP)
    assert est.converged
    steps = [d for d, _ in est.rho_trace]
    rho = [r for _, r in est.rho_trace]
    assert len(rho) >= 4 and steps == sorted(steps, reverse=True)
    # first order remainder: ρ shrinks in step with δ
    assert all(b < a for a, b in zip(rho, rho[1:]))
    assert est.first_order_residual == rho[-1]


def test_mixed_partials_examples():
    m = mixed_partials_check(compile_field("x1^2*x2^3/2"), (2, 1))
    assert m.agree and m.f12 == pytest.approx(6, abs=1e-6) and m.dd == pytest.approx(6, abs=1e-6)
    m = mixed_partials_check(compile_field("sin(x1*x2)"), (0, 0))
    assert m.agree and m.f21 == pytest.approx(1, abs=1e-6)
    m = mixed_partials_check(compile_field("x1^2+x2^2"), (0.7, -0.2))
    assert m.agree and abs(m.dd) <= 1e-6


def test_ridders_first_derivative():
    val, err = ridders(math.exp, 0.5, 0.1)
    assert val == pytest.approx(math.exp(0.5), rel=1e-10)
    assert err < 1e-8


def test_intermediate_point_examples():
    c = intermediate_point(compile_field("x1+x2"), UNIT, 1.0)
    assert abs(c.x1 + c.x2 - 1) <= 1e-6 and 0 < c.x1 < 1 and 0 < c.x2 < 1
    c = intermediate_point(compile_field("x1*x2"), UNIT, 0.25)
    assert abs(c.x1 * c.x2 - 0.25) <= 1e-6
    with pytest.raises(NoBracketError):
        intermediate_point(compile_field("x1*x2"), UNIT, 2.0)


def test_rolle_examples():
    box = Interval2.closed((0, 0), (math.pi, math.pi))
    r = rolle_solve(compile_field("sin(x1)*sin(x2)"), box)
    assert abs(r.achieved) <= 1e-6 and r.target == 0
    assert box.contains(r.c) and 0 < r.c.x1 < math.pi and 0 < r.c.x2 < math.pi
    assert abs(math.cos(r.c.x1) * math.cos(r.c.x2)) <= 1e-5
    r = rolle_solve(compile_field("x1^2+x2^2"), Interval2.closed((-1, 2), (3, 5)))
    assert abs(r.achieved) <= 1e-6
    with pytest.raises(HypothesisError):
        rolle_solve(compile_field("x1*x2"), UNIT)


def test_mvt_examples():
    r = mvt_solve(compile_field("x1^2*x2^2"), UNIT)
    assert r.target == pytest.approx(1)
    assert abs(4 * r.c.x1 * r.c.x2 - 1) <= 1e-5
    assert r.residual <= 1e-6
    r = mvt_solve(compile_field("7*x1*x2"), Interval2.closed((-2, 1), (3, 4)))
    assert r.achieved == pytest.approx(7, abs=1e-6) and r.target == pytest.approx(7)
    r = mvt_solve(compile_field("x1^3 + cos(x2)"), UNIT)
    assert abs(r.target) <= 1e-12 and abs(r.achieved) <= 1e-6


def test_cauchy_examples():
    f = compile_field("x1^2*x2^2")
    g = compile_field("x1^2*x2")
    res = cauchy_mvt_solve(f, g, UNIT)
    assert abs(res.lhs - res.rhs) <= 1e-6 * max(1, abs(res.lhs), abs(res.rhs))
    # the oracle: f'(c)Δg = g'(c)Δf with f' = 4c1c2, g' = 2c1 and Δf = Δg = 1
    c = res.c
    assert abs(4 * c.x1 * c.x2 - 2 * c.x1) <= 1e-5
    swapped = cauchy_mvt_solve(g, f, UNIT)
    assert abs(swapped.lhs - swapped.rhs) <= 1e-6 * max(1, abs(swapped.lhs))
    plain = cauchy_mvt_solve(f, compile_field("x1*x2"), UNIT)
    assert abs(4 * plain.c.x1 * plain.c.x2 - 1) <= 1e-5
    sep = cauchy_mvt_solve(compile_field("sin(x1) + x2^2"), compile_field("exp(x1*x2)"), UNIT)
    assert abs(sep.lhs) <= 1e-6 and abs(sep.rhs) <= 1e-6


def test_monotonicity_examples():
    box = Interval2.closed((0, 0), (2, 2))
    assert monotonicity_classify(compile_field("3*(x1-1)*(x2-1)"), box) is Monotonicity.INCREASING
    assert monotonicity_classify(compile_field("-3*(x1-1)*(x2-1)"), box) is Monotonicity.DECREASING
    assert monotonicity_classify(compile_field("x1^2+x2^2"), box) is Monotonicity.CONSTANT
    assert monotonicity_classify(compile_field("x1^2*x2^2"), Interval2.closed((-1, -1), (1, 1))) \
        is Monotonicity.MIXED


@pytest.mark.parametrize("d,kind", [(-1, "double_max"), (1, "double_min")])
def test_critical_points_examples(d, kind):
    box = Interval2.closed((0, 0), (2, 4))
    pts = critical_points(compile_field(f"({d})*(x1-1)^2*(x2-2)^2"), box)
    stationary = [p for p in pts if p.kind == "stationary"]
    assert len(stationary) == 1
    p = stationary[0]
    assert math.hypot(p.location.x1 - 1, p.location.x2 - 2) <= 1e-4
    assert p.classification == kind


def test_no_critical_points_for_bilinear():
    assert critical_points(compile_field("x1*x2"), Interval2.closed((-1, -1), (1, 1))) == []


def test_classify_stationary_examples():
    box = Interval2.closed((-1, -1), (1, 1))
    assert classify_stationary(compile_field("-(x1)^2*(x2)^2"), (0, 0), box) == "double_max"
    assert classify_stationary(compile_field("(x1)^2*(x2)^2"), (0, 0), box) == "double_min"
    assert classify_stationary(compile_field("x1*x2"), (0, 0), box) == "neither"


def brute_extremes(f, box, n):
    xs = np.linspace(box.lower.x1, box.upper.x1, n)
    ys = np.linspace(box.lower.x2, box.upper.x2, n)
    vals = f.many(xs[:, None], ys[None, :])
    found = []
    for i in range(1, n - 1):
        for j in range(1, n - 1):
            d = (vals + vals[i, j]) - vals[i][None, :] - vals[:, j][:, None]
            d = np.delete(np.delete(d, i, axis=0), j, axis=1)
            if np.all(d < 0) or np.all(d > 0):
                found.append((xs[i], ys[j]))
    return found, (xs[1] - xs[0], ys[1] - ys[0])


@pytest.mark.parametrize("src,box", [
    ("-2*(x1-1.3)^2*(x2-0.6)^2", Interval2.closed((0, 0), (2, 2))),
    ("0.5*(x1+0.2)^2*(x2-0.1)^2 + sin(x1) - x2^3", Interval2.closed((-1.2, -0.9), (0.8, 1.1))),
])
def test_fermat_sampled(src, box):
    f = compile_field(src)
    found, (h1, h2) = brute_extremes(f, box, 11)
    assert found
    reported = [p.location for p in critical_points(f, box)]
    for x, y in found:
        assert any(abs(p.x1 - x) <= h1 and abs(p.x2 - y) <= h2 for p in reported)


coords = st.floats(-1, 1)


@given(st.integers(0, 10_000), coords, coords)
@settings(max_examples=15, deadline=None)
def test_differentiable_implies_continuous(seed, x, y):
    f = compile_field(families.smooth(np.random.default_rng(seed)))
    est = double_derivative(f, (x, y))
    if est.converged:
        assert continuity_probe(f, (x, y), span=1.0).passed


@given(st.integers(0, 10_000), coords, coords)
@settings(max_examples=15, deadline=None)
def test_schwarz_agreement(seed, x, y):
    f = compile_field(families.smooth(np.random.default_rng(seed)))
    m = mixed_partials_check(f, (x, y), tol=1e-4)
    assert abs(m.f12 - m.f21) <= 1e-4
    assert abs(m.dd - m.f12) <= 1e-4
    assert m.f12 == pytest.approx(fd_mixed(f, x, y), abs=1e-3 * max(1, abs(m.f12)))


@given(st.floats(-2, 2).filter(lambda d: abs(d) > 0.1), st.floats(-0.5, 0.5), st.floats(-0.5, 0.5))
@settings(max_examples=6, deadline=None)
def test_sector_pattern_soundness(d, c1, c2):
    f = compile_field(f"({d!r})*(x1-({c1!r}))^2*(x2-({c2!r}))^2")
    box = Interval2.closed((c1 - 1, c2 - 1), (c1 + 1, c2 + 1))
    expected = "double_max" if d < 0 else "double_min"
    assert classify_stationary(f, (c1, c2), box) == expected
