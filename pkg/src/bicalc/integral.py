"""Newton and Riemann double integrals, the two fundamental theorems, improper
integrals with divergence witnesses, and change of variables."""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import NamedTuple, Optional, Union

import numpy as np

from ._nets import FAMILIES, NetEstimate, extrapolate, separation, split_pair, unbounded
from .core import (
    DegenerateError, DomainError, EstimateReport, Interval2, Point2, ScalarField2,
    Verdict, as_point,
)
from .derivative import MeanValueResult, double_derivative, mvt_solve
from .difference import delta2

log = logging.getLogger(__name__)

DEFAULT_TOL = 1e-6
CHUNK = 1 << 21          # samples evaluated per vectorized call
SAMPLE_RULES = ("midpoint", "corner", "random")


@dataclass(frozen=True)
class RiemannConfig:
    """Uniform dyadic refinement schedule for double Riemann sums.

    Refinement k uses an (initial_m·2^k) × (initial_n·2^k) partition. With
    ``extrapolate`` the successive sums are Richardson-extrapolated in the
    mesh size (in h² for the midpoint rule; the random rule is never
    extrapolated).
    """

    initial_m: int = 1
    initial_n: int = 1
    max_refinements: int = 12
    tol: float = DEFAULT_TOL
    sample_rule: str = "midpoint"
    seed: Optional[int] = None
    extrapolate: bool = False

    def __post_init__(self):
        if self.initial_m < 1 or self.initial_n < 1:
            raise ValueError("initial_m and initial_n must be >= 1")
        if not self.tol > 0:
            raise ValueError("tol must be positive")
        if self.max_refinements < 1:
            raise ValueError("max_refinements must be >= 1")
        if self.sample_rule not in SAMPLE_RULES:
            raise ValueError(f"sample_rule must be one of {SAMPLE_RULES}")


def newton_integral(F: ScalarField2, a, b) -> float:
    """Double Newton integral of F' from a to b, i.e. Δ_a^b(F)."""
    return delta2(F, a, b)


def accumulate_field(F: ScalarField2, a) -> ScalarField2:
    """G(x) = Δ_a^x(F): the integral of F' from a to x, as a field."""
    a = as_point(a)
    fa = F(a.x1, a.x2)

    def g(x1, x2):
        return (F(x1, x2) + fa) - F(x1, a.x2) - F(a.x1, x2)

    vec = None
    if F.vectorized:
        def vec(x1, x2):
            return (F.many(x1, x2) + fa) - F.many(x1, a.x2) - F.many(a.x1, x2)
    return ScalarField2(g, vectorized=vec, domain_hint=F.domain_hint,
                        label=f"Δ_({a.x1!r},{a.x2!r})^x({F.label})")


def integral_mean_point(f: ScalarField2, F: ScalarField2, i: Interval2,
                        tol: float = DEFAULT_TOL) -> MeanValueResult:
    """A point c inside i where f(c) equals the mean of f over i (F a primitive of f)."""
    r = mvt_solve(F, i, tol)
    achieved = f(r.c.x1, r.c.x2)
    return MeanValueResult(r.c, r.target, achieved, abs(achieved - r.target), r.halvings, r.trace)


def riemann_sum(f: ScalarField2, i: Interval2, m: int, n: int, rule: str = "midpoint",
                rng: Optional[np.random.Generator] = None) -> float:
    """R(f, P) on the uniform m × n partition of a finite interval.

    Rows (x1 cells) are summed pairwise along x2, then the row sums pairwise,
    so the result does not depend on the chunk size.
    """
    lo, hi = i.lower, i.upper
    dx1, dx2 = (hi.x1 - lo.x1) / m, (hi.x2 - lo.x2) / n
    j = np.arange(n, dtype=float)
    rows = max(1, CHUNK // n)
    row_sums = np.empty(m)
    for start in range(0, m, rows):
        idx = np.arange(start, min(m, start + rows), dtype=float)
        if rule == "midpoint":
            x1 = (lo.x1 + (idx + 0.5) * dx1)[:, None]
            x2 = (lo.x2 + (j + 0.5) * dx2)[None, :]
        elif rule == "corner":
            x1 = (lo.x1 + idx * dx1)[:, None]
            x2 = (lo.x2 + j * dx2)[None, :]
        else:
            shape = (idx.size, n)
            x1 = lo.x1 + (idx[:, None] + rng.random(shape)) * dx1
            x2 = lo.x2 + (j[None, :] + rng.random(shape)) * dx2
        vals = np.broadcast_to(f.many(x1, x2), (idx.size, n))
        row_sums[start:start + idx.size] = vals.sum(axis=1)
    return float(row_sums.sum()) * dx1 * dx2


def riemann_integral(f: ScalarField2, i: Interval2, cfg: RiemannConfig = RiemannConfig()
                     ) -> EstimateReport:
    """Double Riemann integral by dyadic refinement until successive sums agree within tol.

    The trace holds (refinement level k, estimate) pairs.
    """
    if not i.is_finite:
        raise ValueError("riemann_integral needs a bounded interval")
    rng = None
    # midpoint sums expand in even powers of the mesh, corner sums in all powers
    base = 4.0 if cfg.sample_rule == "midpoint" else 2.0
    table: list[list[float]] = []
    trace = []
    value, residual = None, math.inf
    evals = 0
    for k in range(cfg.max_refinements + 1):
        m, n = cfg.initial_m << k, cfg.initial_n << k
        if cfg.sample_rule == "random":
            rng = np.random.default_rng([cfg.seed or 0, k])
        r = riemann_sum(f, i, m, n, cfg.sample_rule, rng)
        evals += m * n
        row = [r]
        if cfg.extrapolate and table and cfg.sample_rule != "random":
            for jj in range(1, len(table) + 1):
                fac = base ** jj
                row.append(row[jj - 1] + (row[jj - 1] - table[-1][jj - 1]) / (fac - 1.0))
        est = row[-1]
        if table:
            residual = abs(est - table[-1][-1])
        table.append(row)
        trace.append((k, est))
        value = est
        if k > 0 and residual <= cfg.tol:
            return EstimateReport(value, Verdict.CONVERGED, trace, residual, evals)
    return EstimateReport(value, Verdict.INCONCLUSIVE, trace, residual, evals,
                          f"no agreement within {cfg.tol} after {cfg.max_refinements} refinements")


@dataclass
class Ftc1Result:
    ok: bool
    points: list = field(default_factory=list)   # (point, sign label, G', f, residual)
    diagnostic: str = ""

    def __bool__(self):
        return self.ok


def _halton(k: int, base: int) -> float:
    f, r = 1.0, 0.0
    while k > 0:
        f /= base
        r += f * (k % base)
        k //= base
    return r


def ftc1_check(f: ScalarField2, i: Interval2, sample_points: int = 5, tol: float = DEFAULT_TOL,
               boundary: bool = True) -> Ftc1Result:
    """Check that G(x) = ∬ over [lower, x] of f has double derivative f.

    Interior points come from a Halton sequence; with ``boundary`` the edge
    midpoints and the lower-left corner are added, and only the quadrant signs
    that stay inside i are checked there.
    """
    if not i.is_finite:
        raise ValueError("ftc1_check needs a bounded interval")
    lo, hi = i.lower, i.upper
    c0 = i.center
    scale = max(1.0, abs(f(c0.x1, c0.x2)) * i.area)
    inner = RiemannConfig(1, 1, 10, 1e-13 * scale, extrapolate=True)
    unsettled = []

    def g(x1, x2):
        if x1 <= lo.x1 or x2 <= lo.x2:
            return 0.0
        rep = riemann_integral(f, Interval2.closed((lo.x1, lo.x2), (x1, x2)), inner)
        if not rep.converged:
            unsettled.append((x1, x2))
        return rep.value

    G = ScalarField2(g, domain_hint=i, label=f"∬{f.label}")
    pts = [Point2(lo.x1 + (hi.x1 - lo.x1) * _halton(k, 2), lo.x2 + (hi.x2 - lo.x2) * _halton(k, 3))
           for k in range(1, sample_points + 1)]
    if boundary:
        c = i.center
        pts += [Point2(lo.x1, c.x2), Point2(c.x1, lo.x2), Point2(hi.x1, c.x2), Point2(c.x1, hi.x2),
                Point2(lo.x1, lo.x2)]
    rows, problems = [], []
    for p in pts:
        fp = f(p.x1, p.x2)
        for s in i.allowed_signs(p):
            est = double_derivative(G, p, sign=s, tol=tol)
            if not est.converged:
                problems.append(f"G'_{s.label} at {p.as_tuple()} {est.report.verdict}")
                rows.append((p, s.label, None, fp, math.inf))
                continue
            res = abs(est.value - fp)
            rows.append((p, s.label, est.value, fp, res))
            if res > tol:
                problems.append(f"|G'_{s.label} - f| = {res:.3g} at {p.as_tuple()}")
    ok = not problems
    if unsettled:
        problems.append(f"{len(unsettled)} inner integrals did not settle")
    return Ftc1Result(ok, rows, "; ".join(problems[:5]))


class Ftc2Result(NamedTuple):
    riemann: float
    newton: float
    agree: bool
    diagnostic: str = ""


def ftc2_check(f: ScalarField2, F: ScalarField2, i: Interval2,
               cfg: RiemannConfig = RiemannConfig()) -> Ftc2Result:
    """Compare the Riemann integral of f over i with the Newton integral Δ(F)."""
    rep = riemann_integral(f, i, cfg)
    newton = newton_integral(F, i.lower.finite(), i.upper.finite())
    if not rep.converged:
        return Ftc2Result(rep.value, newton, False, rep.message)
    agree = abs(rep.value - newton) <= cfg.tol * max(1.0, abs(newton))
    diag = "" if agree else f"|riemann - newton| = {abs(rep.value - newton):.3g}"
    return Ftc2Result(rep.value, newton, agree, diag)


# ---------------------------------------------------------------- improper


@dataclass
class Convergent:
    value: float
    corner_limits: Optional[tuple] = None   # (A, B, C, D)
    trace: list = field(default_factory=list)
    diagnostic: str = ""
    kind = "convergent"


@dataclass
class Divergent:
    witnesses: list                          # [(family, limit), (family, limit)]
    trace: list = field(default_factory=list)
    diagnostic: str = ""
    kind = "divergent"


@dataclass
class Inconclusive:
    trace: list = field(default_factory=list)
    diagnostic: str = ""
    kind = "inconclusive"


ImproperVerdict = Union[Convergent, Divergent, Inconclusive]


def _coord(lo, hi, closed, at_hi: bool, m: float, d: float) -> float:
    """Net coordinate approaching one end of the axis [lo, hi]."""
    end, other = (hi, lo) if at_hi else (lo, hi)
    if closed:
        return end
    if math.isinf(end):
        base = other if math.isfinite(other) else 0.0
        return base + math.copysign(m / d, end)
    span = (other - end) if math.isfinite(other) else math.copysign(1.0, other - end)
    return end + m * d * span


def _corner_point(i: Interval2, hi1: bool, hi2: bool, fam, d):
    lo1, up1, c_lo1, c_hi1 = i.axis(0)
    lo2, up2, c_lo2, c_hi2 = i.axis(1)
    return (_coord(lo1, up1, c_hi1 if hi1 else c_lo1, hi1, fam[0], d),
            _coord(lo2, up2, c_hi2 if hi2 else c_lo2, hi2, fam[1], d))


# corner order A, B, C, D = (b), (a), (b1, a2), (a1, b2)
_CORNERS = ((True, True), (False, False), (True, False), (False, True))


def _family_estimates(fn, steps, delta0, min_steps):
    return [extrapolate(lambda d, fam=fam: fn(fam, d), delta0, steps, fam, min_steps=min_steps)
            for fam in FAMILIES]


def _agree(ests: list[NetEstimate], tol: float) -> bool:
    return (all(e.settled for e in ests) and separation(ests) <= tol
            and all(e.error <= tol for e in ests))


def improper_newton_integral(F: ScalarField2, i: Interval2, steps: int = 30,
                             tol: float = DEFAULT_TOL, delta0: float = 0.125) -> ImproperVerdict:
    """Improper double Newton integral: the limit of Δ_x^y(F) as x -> lower, y -> upper.

    Closed edges are not approached; their coordinate stays on the edge. The
    four corner limits A, B, C, D are tried first; when one of them fails the
    joint limit is followed along the (s,s), (s,2s) and (2s,s) families, and two
    families settling on different values witness divergence.
    """
    trace: list = []
    notes: list[str] = []
    corners = []
    try:
        for hi1, hi2 in _CORNERS:
            ests = _family_estimates(lambda fam, d: F(*_corner_point(i, hi1, hi2, fam, d)),
                                     steps, delta0, 6)
            corners.append(ests)
    except DomainError as exc:
        notes.append(f"corner limit: {exc}")
        corners = []
    if corners and all(_agree(e, tol) for e in corners):
        A, B, C, D = (e[0].value for e in corners)
        value = (A + B) - C - D
        trace = [(d, v) for d, v in corners[0][0].trace]
        return Convergent(value, (A, B, C, D), trace, "corner limits")
    if corners:
        notes.append("corner limits unsettled: "
                      + ", ".join(k for k, e in zip("ABCD", corners) if not _agree(e, tol)))

    def joint(fam, d):
        x = _corner_point(i, False, False, fam, d)
        y = _corner_point(i, True, True, fam, d)
        if x[0] >= y[0] or x[1] >= y[1]:
            raise DegenerateError("net points crossed")
        return delta2(F, x, y)

    try:
        ests = _family_estimates(joint, steps, delta0, 6)
    except (DomainError, DegenerateError) as exc:
        notes.append(f"joint net: {exc}")
        return Inconclusive(trace, "; ".join(notes))
    trace = [(d, v) for d, v in ests[0].trace]
    fam_msg = ", ".join(f"{e.family}: {e.value!r} ± {e.error:.2g}" for e in ests)
    if _agree(ests, tol):
        return Convergent(ests[0].value, None, trace, "joint net; " + fam_msg)
    pair = split_pair(ests, tol)
    if pair is not None:
        return Divergent([(p.family, p.value) for p in pair], trace, "joint net; " + fam_msg)
    if any(unbounded(e, tol) for e in ests):
        notes.append("joint net values unbounded")
    notes.append(fam_msg)
    return Inconclusive(trace, "; ".join(notes))


# ------------------------------------------------------- change of variables


@dataclass(frozen=True)
class Jacobian:
    """Either an analytic determinant field or central finite differences of the map."""

    kind: str = "finite_difference"
    field: Optional[ScalarField2] = None
    step: float = 1e-5

    @classmethod
    def analytic(cls, fld: ScalarField2) -> "Jacobian":
        return cls("analytic", fld)

    @classmethod
    def finite_difference(cls, step: float = 1e-5) -> "Jacobian":
        if not step > 0:
            raise ValueError("finite-difference step must be positive")
        return cls("finite_difference", None, step)


@dataclass(frozen=True)
class CovSpec:
    map_h: tuple          # (h1, h2) as ScalarField2
    jacobian: Jacobian
    param_interval: Interval2

    def __post_init__(self):
        if len(self.map_h) != 2:
            raise ValueError("map_h needs two component fields")
        if self.jacobian.kind == "analytic" and self.jacobian.field is None:
            raise ValueError("analytic Jacobian needs a field")


def _fd_jacobian(h1: ScalarField2, h2: ScalarField2, step: float) -> ScalarField2:
    def det(u, v, e1, e2, mx):
        su, sv = step * mx(1.0, abs(u)), step * mx(1.0, abs(v))
        d1u = (e1(u + su, v) - e1(u - su, v)) / (2 * su)
        d1v = (e1(u, v + sv) - e1(u, v - sv)) / (2 * sv)
        d2u = (e2(u + su, v) - e2(u - su, v)) / (2 * su)
        d2v = (e2(u, v + sv) - e2(u, v - sv)) / (2 * sv)
        return d1u * d2v - d1v * d2u

    vec = None
    if h1.vectorized and h2.vectorized:
        def vec(u, v):
            return det(np.asarray(u, float), np.asarray(v, float), h1.many, h2.many, np.maximum)
    return ScalarField2(lambda u, v: det(u, v, h1, h2, max), vectorized=vec, label="J_fd")


def pullback(f: ScalarField2, cov: CovSpec) -> ScalarField2:
    """g(u, v) = f(h(u, v))·|J(u, v)|."""
    h1, h2 = cov.map_h
    jac = cov.jacobian.field if cov.jacobian.kind == "analytic" else \
        _fd_jacobian(h1, h2, cov.jacobian.step)

    def g(u, v):
        return f(h1(u, v), h2(u, v)) * abs(jac(u, v))

    vec = None
    if f.vectorized and h1.vectorized and h2.vectorized and jac.vectorized:
        def vec(u, v):
            return f.many(h1.many(u, v), h2.many(u, v)) * np.abs(jac.many(u, v))
    return ScalarField2(g, vectorized=vec, domain_hint=cov.param_interval,
                        label=f"({f.label})∘h·|J|")


def _interior_probe_points(i: Interval2, count: int = 3) -> list[Point2]:
    out = []
    for k in range(1, count + 1):
        coords = []
        for ax, base in ((0, 2), (1, 3)):
            lo, hi, _, _ = i.axis(ax)
            t = 0.2 + 0.6 * _halton(k, base)
            if math.isfinite(lo) and math.isfinite(hi):
                coords.append(lo + t * (hi - lo))
            elif math.isfinite(lo):
                coords.append(lo + 4 * t)
            elif math.isfinite(hi):
                coords.append(hi - 4 * t)
            else:
                coords.append(8 * t - 4)
        out.append(Point2(*coords))
    return out


def _exhausting(i: Interval2, d: float) -> Interval2:
    lo, hi = [], []
    for ax in (0, 1):
        a, b, _, _ = i.axis(ax)
        fa, fb = math.isfinite(a), math.isfinite(b)
        span = (b - a) if fa and fb else 1.0
        a2 = a + d * span if fa else (b if fb else 0.0) - 1.0 / d
        b2 = b - d * span if fb else (a if fa else 0.0) + 1.0 / d
        lo.append(a2)
        hi.append(b2)
    return Interval2.closed(lo, hi)


def change_of_variables_integral(f: ScalarField2, cov: CovSpec,
                                 primitive_G: Optional[ScalarField2] = None, steps: int = 30,
                                 tol: float = DEFAULT_TOL) -> ImproperVerdict:
    """∬ over h(I) of f, computed in the parameter domain as the integral of (f∘h)·|J|.

    With a primitive G of the pulled-back integrand the improper Newton integral
    of G is returned, after spot-checking G' against the integrand at three
    interior points. Without one, Riemann integrals over an exhausting family of
    compact sub-intervals are extrapolated.
    """
    g = pullback(f, cov)
    i = cov.param_interval
    if primitive_G is not None:
        for p in _interior_probe_points(i):
            try:
                gp = g(p.x1, p.x2)
                est = double_derivative(primitive_G, p, tol=max(tol, 1e-6))
            except DomainError as exc:
                return Inconclusive([], f"primitive check at {p.as_tuple()}: {exc}")
            if est.value is None or abs(est.value - gp) > 1e-4 * max(1.0, abs(gp)):
                got = "no estimate" if est.value is None else repr(est.value)
                return Inconclusive([], f"G' = {got} but (f∘h)|J| = {gp!r} at {p.as_tuple()}; "
                                        "G is not a primitive of the pulled-back integrand")
        return improper_newton_integral(primitive_G, i, steps, tol)

    inner = RiemannConfig(4, 4, 9, tol * 1e-2, extrapolate=True)
    zero_hits = []

    def seq(d):
        sub = _exhausting(i, d)
        rep = riemann_integral(g, sub, inner)
        if not rep.converged:
            zero_hits.append(d)
        return rep.value

    try:
        est = extrapolate(seq, 0.25, min(steps, 16), (1, 1), min_steps=4)
    except DomainError as exc:
        return Inconclusive([], f"integrand undefined on the sub-interval: {exc}")
    trace = list(est.trace)
    if est.settled and est.error <= tol:
        return Convergent(est.value, None, trace, "exhausting Riemann sequence")
    diag = f"exhausting sequence error {est.error:.3g}"
    if zero_hits:
        diag += f"; {len(zero_hits)} inner Riemann integrals did not settle"
    return Inconclusive(trace, diag)
