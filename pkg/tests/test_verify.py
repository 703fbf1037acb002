import numpy as np
import pytest

from bicalc import families
from bicalc.core import Interval2
from bicalc.derivative import mixed_partials_check
from bicalc.difference import delta2, is_double_constant
from bicalc.exprlang import compile_field
from bicalc.verify import Check, SUITES, verify


def test_families_are_seeded():
    a = [families.smooth(np.random.default_rng(9)) for _ in range(2)]
    assert a[0] == a[1]
    assert families.polynomial(np.random.default_rng(1)) != families.polynomial(np.random.default_rng(2))


def test_family_sources_compile():
    rng = np.random.default_rng(0)
    for _ in range(20):
        for src in (families.polynomial(rng), families.trigonometric(rng), families.smooth(rng),
                    families.separable(rng)[0], families.piecewise_quadrant(rng).source,
                    *families.primitive_pair(rng)):
            fld = compile_field(src)
            assert np.isfinite(fld(0.1, -0.2))


def test_separable_family_is_double_constant():
    rng = np.random.default_rng(3)
    for _ in range(10):
        f, g, h = families.separable(rng)
        fld = compile_field(f)
        assert is_double_constant(fld, Interval2.closed((-1, -1), (1, 1)), tol=1e-12)
        gx, hy = compile_field(g), compile_field(h)
        assert fld(0.3, 0.7) == pytest.approx(gx(0.3, 0) + hy(0, 0.7), abs=1e-14)


def test_primitive_pair_mixed_partial():
    rng = np.random.default_rng(8)
    for _ in range(5):
        f, F = (compile_field(s) for s in families.primitive_pair(rng))
        m = mixed_partials_check(F, (0.2, -0.4))
        assert m.f12 == pytest.approx(f(0.2, -0.4), abs=1e-6 * max(1, abs(m.f12)))


def test_random_box_is_proper():
    rng = np.random.default_rng(1)
    for _ in range(20):
        a, b = families.random_box(rng, min_side=0.1)
        assert b[0] - a[0] >= 0.1 and b[1] - a[1] >= 0.1
        assert delta2(compile_field("x1*x2"), a, b) > 0


def test_check_records_failures():
    c = Check("demo")
    c.record(0.5, 1.0, lambda: "unused")
    c.record(2.0, 1.0, lambda: "first")
    c.record(float("nan"), 1.0, lambda: "second")
    assert (c.trials, c.failures, c.max_error, c.first_failure) == (3, 2, 2.0, "first")


@pytest.mark.parametrize("suite,seed", [("difference", 42), ("derivative", 1), ("integral", 7)])
def test_suites_pass(suite, seed):
    summary = verify(suite, seed)
    assert summary.checks
    assert summary.failures == 0, [c for c in summary.checks if c.failures]
    assert summary.as_dict()["suite"] == suite


def test_unknown_suite():
    with pytest.raises(ValueError):
        verify("geometry")
    assert SUITES == ("difference", "derivative", "integral")
