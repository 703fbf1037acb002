"""Executable property suites over seeded random function families."""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from typing import Callable

import numpy as np

from . import families as fam
from .core import Interval2, QuadrantSign, ScalarFieldN
from .derivative import (
    cauchy_mvt_solve, double_derivative, mixed_partials_check, mvt_solve,
)
from .difference import (
    continuity_probe, delta2, delta_n, split_double_constant,
)
from .exprlang import compile_field
from .integral import (
    RiemannConfig, accumulate_field, ftc2_check, newton_integral, riemann_integral, riemann_sum,
)

SUITES = ("difference", "derivative", "integral")


@dataclass
class Check:
    name: str
    trials: int = 0
    failures: int = 0
    max_error: float = 0.0
    first_failure: str = ""

    def record(self, error: float, bound: float, context: Callable[[], str]):
        self.trials += 1
        if not math.isnan(error):
            self.max_error = max(self.max_error, error)
        if not error <= bound:
            self.failures += 1
            if not self.first_failure:
                self.first_failure = context()


def _rel(x: float, scale: float) -> float:
    return abs(x) / max(1.0, scale)


def subdivision_identities(rng: np.random.Generator, trials: int = 200,
                           rtol: float = 1e-10) -> list[Check]:
    """Properties (a)-(d) of the double difference on random smooth fields."""
    checks = {k: Check(f"subdivision ({k})") for k in ("a", "b", "c", "d")}
    for _ in range(trials):
        src = fam.smooth(rng)
        f = compile_field(src)
        a, b = fam.random_box(rng)
        x = tuple(float(rng.uniform(lo, hi)) for lo, hi in zip(a, b))
        scale = max(abs(f(*p)) for p in (a, b, x, (a[0], b[1]), (b[0], a[1])))
        d = delta2(f, a, b)

        def ctx():
            return f"f={src} a={a} b={b} x={x}"
        err_a = max(abs(delta2(f, a, a)), abs(d - delta2(f, b, a)),
                    abs(d + delta2(f, (a[0], b[1]), (b[0], a[1]))))
        checks["a"].record(_rel(err_a, scale), rtol, ctx)
        err_b = d - (delta2(f, a, (x[0], b[1])) + delta2(f, (x[0], a[1]), b))
        checks["b"].record(_rel(err_b, scale), rtol, ctx)
        err_c = d - (delta2(f, a, (b[0], x[1])) + delta2(f, (a[0], x[1]), b))
        checks["c"].record(_rel(err_c, scale), rtol, ctx)
        four = (delta2(f, a, x) + delta2(f, x, b) + delta2(f, (a[0], x[1]), (x[0], b[1]))
                + delta2(f, (x[0], a[1]), (b[0], x[1])))
        checks["d"].record(_rel(d - four, scale), rtol, ctx)
    return list(checks.values())


def delta_n_agreement(rng: np.random.Generator, trials: int = 100) -> Check:
    check = Check("delta_n(n=2) == delta2 bitwise")
    for _ in range(trials):
        src = fam.smooth(rng)
        f = compile_field(src)
        fn = ScalarFieldN(2, f)
        a, b = fam.random_box(rng)
        check.record(0.0 if delta_n(fn, a, b) == delta2(f, a, b) else 1.0, 0.0,
                     lambda: f"f={src} a={a} b={b}")
    return check


def separable_suite(rng: np.random.Generator, trials: int = 100, probes: int = 3
                    ) -> list[Check]:
    """Separable fields (with jumps): Δ vanishes, the probe passes, the split reconstructs."""
    zero = Check("separable: delta2 == 0")
    cont = Check("separable: continuity_probe passes")
    split = Check("separable: split reconstructs on 9x9 lattice")
    box = Interval2.closed((-1, -1), (1, 1))
    for _ in range(trials):
        src, _, _ = fam.separable(rng, discontinuous=True)
        f = compile_field(src, domain_hint=box)

        def ctx():
            return f"f={src}"
        for _ in range(probes):
            a, b = fam.random_box(rng)
            zero.record(abs(delta2(f, a, b)), 1e-12, ctx)
            p = fam.random_points(rng, 1, -0.9, 0.9)[0]
            cont.record(0.0 if continuity_probe(f, p).passed else 1.0, 0.0, ctx)
        anchor = fam.random_points(rng, 1)[0]
        dec = split_double_constant(f, box, anchor)
        split.record(dec.lattice_deviation(box, 9), 1e-10, ctx)
    return [zero, cont, split]


def continuity_suite(rng: np.random.Generator, trials: int = 20) -> Check:
    check = Check("smooth: continuity_probe passes")
    for _ in range(trials):
        src = fam.smooth(rng)
        f = compile_field(src, domain_hint=Interval2.closed((-1, -1), (1, 1)))
        p = fam.random_points(rng, 1, -0.9, 0.9)[0]
        rep = continuity_probe(f, p)
        check.record(0.0 if rep.passed else rep.worst_deviation, 0.0, lambda: f"f={src} at {p}")
    return check


def schwarz_suite(rng: np.random.Generator, functions: int = 10, points: int = 20,
                  tol: float = 1e-4) -> Check:
    """|f12 − f21| and |dd − f12| on a smooth family at random points."""
    check = Check("Schwarz: f12 = f21 = double derivative")
    for _ in range(functions):
        src = fam.smooth(rng)
        f = compile_field(src)
        for p in fam.random_points(rng, points):
            mp = mixed_partials_check(f, p, tol=tol)
            err = max(abs(mp.f12 - mp.f21), abs(mp.dd - mp.f12))
            check.record(err, tol, lambda: f"f={src} at {p}: {mp}")
    return check


def signed_derivative_suite(rng: np.random.Generator, trials: int = 10,
                            tol: float = 1e-6) -> Check:
    check = Check("piecewise-quadrant: signed derivatives at the corner")
    for _ in range(trials):
        pw = fam.piecewise_quadrant(rng)
        f = compile_field(pw.source)
        for s in QuadrantSign:
            est = double_derivative(f, pw.corner, sign=s, tol=tol)
            err = abs(est.value - pw.slopes[s.label]) if est.converged else math.inf
            check.record(err, 10 * tol, lambda: f"f={pw.source} sign {s.label}")
    return check


def differentiable_continuous_suite(rng: np.random.Generator, trials: int = 10) -> Check:
    check = Check("differentiable implies double continuous")
    for _ in range(trials):
        src = fam.smooth(rng)
        f = compile_field(src, domain_hint=Interval2.closed((-1, -1), (1, 1)))
        p = fam.random_points(rng, 1, -0.9, 0.9)[0]
        if double_derivative(f, p).converged:
            check.record(0.0 if continuity_probe(f, p).passed else 1.0, 0.0,
                         lambda: f"f={src} at {p}")
    return check


def mean_value_suite(rng: np.random.Generator, trials: int = 4, tol: float = 1e-6) -> list[Check]:
    mvt = Check("MVT: |f'(c) - mean slope| <= tol")
    cauchy = Check("Cauchy MVT: swapping f and g swaps the sides")
    for _ in range(trials):
        f_src, F_src = fam.primitive_pair(rng)
        a, b = fam.random_box(rng, min_side=0.3)
        i = Interval2.closed(a, b)
        F = compile_field(F_src)
        try:
            r = mvt_solve(F, i, tol)
            mvt.record(r.residual, tol, lambda: f"F={F_src} on {i.describe()}")
        except (ArithmeticError, RuntimeError, ValueError) as exc:
            mvt.record(math.inf, tol, lambda exc=exc: f"F={F_src} on {i.describe()}: {exc}")
        g = compile_field("x1^2*x2 + x1*x2")
        try:
            r1 = cauchy_mvt_solve(F, g, i, tol)
            r2 = cauchy_mvt_solve(g, F, i, tol)
            err = max(abs(r1.lhs - r2.rhs), abs(r1.rhs - r2.lhs)) if r1.c == r2.c else \
                abs(abs(r1.lhs - r1.rhs) - abs(r2.lhs - r2.rhs))
            cauchy.record(err, tol * max(1.0, abs(r1.lhs)), lambda: f"F={F_src}")
        except (ArithmeticError, RuntimeError, ValueError) as exc:
            cauchy.record(math.inf, tol, lambda exc=exc: f"F={F_src}: {exc}")
    return [mvt, cauchy]


def newton_suite(rng: np.random.Generator, trials: int = 100, rtol: float = 1e-10
                 ) -> list[Check]:
    props = Check("Newton integral properties (a)-(d)")
    indep = Check("Newton integral independent of primitive")
    accum = Check("accumulated field: Δ_b^x(G) = Δ_b^x(F)")
    for _ in range(trials):
        _, F_src = fam.primitive_pair(rng)
        F = compile_field(F_src)
        a, b = fam.random_box(rng)
        x = tuple(float(rng.uniform(lo, hi)) for lo, hi in zip(a, b))
        scale = max(abs(F(*p)) for p in (a, b, x, (a[0], b[1]), (b[0], a[1])))
        errs = [subdivision_error(F, a, b, x)]
        props.record(_rel(max(errs), scale), rtol, lambda: f"F={F_src} a={a} b={b}")
        s_src, t_src = fam._univariate(rng, "x1", False), fam._univariate(rng, "x2", True)
        F2 = compile_field(f"({F_src}) + ({s_src}) + ({t_src})")
        err = abs(newton_integral(F, a, b) - newton_integral(F2, a, b))
        indep.record(_rel(err, scale), rtol, lambda: f"F={F_src} + {s_src} + {t_src}")
        G = accumulate_field(F, a)
        p = fam.random_points(rng, 1)[0]
        err = abs(delta2(G, b, p) - delta2(F, b, p))
        accum.record(_rel(err, scale), rtol, lambda: f"F={F_src} a={a} b={b} x={p}")
    return [props, indep, accum]


def subdivision_error(F, a, b, x) -> float:
    d = newton_integral(F, a, b)
    errs = [abs(newton_integral(F, a, a)), abs(d - newton_integral(F, b, a)),
            abs(d + newton_integral(F, (a[0], b[1]), (b[0], a[1]))),
            abs(d - newton_integral(F, a, (x[0], b[1])) - newton_integral(F, (x[0], a[1]), b)),
            abs(d - newton_integral(F, a, (b[0], x[1])) - newton_integral(F, (a[0], x[1]), b)),
            abs(d - (newton_integral(F, a, x) + newton_integral(F, x, b)
                     + newton_integral(F, (a[0], x[1]), (x[0], b[1]))
                     + newton_integral(F, (x[0], a[1]), (b[0], x[1]))))]
    return max(errs)


def riemann_suite(rng: np.random.Generator, trials: int = 6, tol: float = 1e-6) -> list[Check]:
    ftc2 = Check("FTC2: Riemann integral = Newton integral")
    rules = Check("sample-rule independence")
    linear = Check("Riemann linearity at fixed partition")
    for _ in range(trials):
        f_src, F_src = fam.primitive_pair(rng)
        f, F = compile_field(f_src), compile_field(F_src)
        a, b = fam.random_box(rng, min_side=0.2)
        i = Interval2.closed(a, b)
        res = ftc2_check(f, F, i, RiemannConfig(tol=tol, extrapolate=True))
        ftc2.record(abs(res.riemann - res.newton) / max(1.0, abs(res.newton)), tol,
                    lambda: f"f={f_src} on {i.describe()}")
        vals = []
        for rule in ("midpoint", "corner", "random"):
            rep = riemann_integral(f, i, RiemannConfig(4, 4, 9, tol, rule, seed=3, extrapolate=True))
            vals.append(rep.value if rep.value is not None else math.nan)
        rules.record(max(vals) - min(vals), 10 * tol, lambda: f"f={f_src} rules {vals}")
        g = compile_field(fam.smooth(rng))
        al, be = float(rng.uniform(-2, 2)), float(rng.uniform(-2, 2))
        comb = compile_field(f"({al!r})*({f_src}) + ({be!r})*({g.label})")
        lhs = riemann_sum(comb, i, 64, 64)
        rhs = al * riemann_sum(f, i, 64, 64) + be * riemann_sum(g, i, 64, 64)
        linear.record(abs(lhs - rhs) / max(1.0, abs(lhs)), 1e-12, lambda: f"f={f_src}")
    return [ftc2, rules, linear]


@dataclass
class Summary:
    suite: str
    seed: int
    tol: float
    checks: list = field(default_factory=list)

    @property
    def failures(self) -> int:
        return sum(c.failures for c in self.checks)

    def as_dict(self) -> dict:
        return {"suite": self.suite, "seed": self.seed, "tol": self.tol,
                "failures": self.failures, "checks": [asdict(c) for c in self.checks]}


def verify(suite: str = "all", seed: int = 0, tol: float = 1e-6) -> Summary:
    """Run the named property suite(s) with a seeded generator."""
    if suite != "all" and suite not in SUITES:
        raise ValueError(f"unknown suite {suite!r}; choose from all, {', '.join(SUITES)}")
    rng = np.random.default_rng(seed)
    out = Summary(suite, seed, tol)
    chosen = SUITES if suite == "all" else (suite,)
    if "difference" in chosen:
        out.checks += subdivision_identities(rng)
        out.checks.append(delta_n_agreement(rng))
        out.checks += separable_suite(rng, trials=30)
        out.checks.append(continuity_suite(rng))
    if "derivative" in chosen:
        out.checks.append(schwarz_suite(rng, functions=5, points=4, tol=max(tol, 1e-4)))
        out.checks.append(signed_derivative_suite(rng, tol=tol))
        out.checks.append(differentiable_continuous_suite(rng))
        out.checks += mean_value_suite(rng, tol=tol)
    if "integral" in chosen:
        out.checks += newton_suite(rng)
        out.checks += riemann_suite(rng, tol=tol)
    return out
