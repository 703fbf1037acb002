"""Double limits and derivatives, mixed partials, and the mean-value solvers."""
from __future__ import annotations

import enum
import logging
import math
from dataclasses import dataclass, field
from typing import NamedTuple, Optional

import numpy as np

from ._nets import FAMILIES, NetEstimate, extrapolate, separation, split_pair, unbounded
from .core import (
    ConvergenceError, Counter, EstimateReport, HypothesisError, Interval2,
    NoBracketError, Point2, QuadrantSign, ScalarField2, Verdict, as_extended, as_point,
    field_scale, roundoff,
)
from .difference import delta2, mean_slope

log = logging.getLogger(__name__)

DEFAULT_TOL = 1e-6
DEFAULT_DELTA0 = 0.125
BISECTION_STEPS = 60
ALL_SIGNS = (QuadrantSign.PP, QuadrantSign.PM, QuadrantSign.MP, QuadrantSign.MM)


def _net_point(a, sign: Optional[QuadrantSign], fam, d, fixed=(False, False)):
    out = []
    for k, (ak, m) in enumerate(zip(a, fam)):
        s = sign.value[k] if sign is not None else 1
        if fixed[k]:
            out.append(ak)
        elif math.isinf(ak):
            out.append(math.copysign(m / d, ak))
        else:
            out.append(ak + s * m * d)
    return out[0], out[1]


def _limit_verdict(ests: list[NetEstimate], tol: float):
    if any(not e.settled for e in ests):
        return Verdict.INCONCLUSIVE, None
    spread = separation(ests)
    if spread <= tol and all(e.error <= tol for e in ests):
        return Verdict.CONVERGED, None
    pair = split_pair(ests, tol)
    if pair is not None:
        return Verdict.DIVERGED, pair
    if any(unbounded(e, tol) for e in ests):
        return Verdict.DIVERGED, None
    return Verdict.INCONCLUSIVE, None


def net_limit(g, a, sign: Optional[QuadrantSign], steps: int = 30, tol: float = DEFAULT_TOL,
              delta0: float = DEFAULT_DELTA0, fixed=(False, False), families=FAMILIES,
              min_steps: int = 6) -> tuple[EstimateReport, list[NetEstimate]]:
    """Three-family net limit of ``g`` toward ``a``; coordinates flagged ``fixed`` stay put."""
    counted = Counter(g)
    ests = []
    for fam in families:
        ests.append(extrapolate(lambda d, fam=fam: counted(*_net_point(a, sign, fam, d, fixed)),
                                delta0, steps, fam, min_steps=min_steps))
    verdict, pair = _limit_verdict(ests, tol)
    diag = ests[0]
    errs = max(e.error for e in ests)
    residual = max(separation(ests), errs)
    details = {"families": {f"{e.family[0]},{e.family[1]}": [e.value, e.error] for e in ests}}
    if pair is not None:
        details["witnesses"] = [(p.family, p.value) for p in pair]
    msg = "; ".join(e.message for e in ests if e.message)
    if verdict is Verdict.CONVERGED:
        report = EstimateReport(diag.value, verdict, list(diag.trace), residual, counted.count,
                                msg, details)
    else:
        report = EstimateReport(None, verdict, list(diag.trace) or [(delta0, math.nan)],
                                residual, counted.count, msg, details)
    return report, ests


def double_limit(g, a, sign: QuadrantSign, steps: int = 30, tol: float = DEFAULT_TOL,
                 delta0: float = DEFAULT_DELTA0) -> EstimateReport:
    """Signed double limit of ``g`` as x approaches ``a`` (components may be infinite).

    Three path families x = a + sign·(δ, δ), (δ, 2δ), (2δ, δ) are followed as
    δ halves; infinite components move out as m/δ instead. The verdict is
    converged when all three agree within ``tol``, diverged when two settle on
    limits more than 10·tol apart (or values blow up), inconclusive otherwise.
    """
    a = as_extended(a)
    report, _ = net_limit(g, a.as_tuple(), sign, steps, tol, delta0)
    return report


@dataclass
class DerivEstimate:
    report: EstimateReport
    sign: Optional[QuadrantSign]
    first_order_residual: float
    rho_trace: list = field(default_factory=list)

    @property
    def value(self) -> Optional[float]:
        return self.report.value

    @property
    def converged(self) -> bool:
        return self.report.converged


def _derivative_delta0(f: ScalarField2, a: Point2, sign, delta0):
    hint = f.domain_hint
    if hint is None or not hint.is_finite:
        return delta0
    room = []
    for k, v in enumerate(a):
        lo, hi, _, _ = hint.axis(k)
        signs = (sign.value[k],) if sign else (1, -1)
        for s in signs:
            r = (hi - v) if s > 0 else (v - lo)
            if r > 0:
                room.append(r / 2)
    return min([delta0] + room)


def double_derivative(f: ScalarField2, a, sign: Optional[QuadrantSign] = None, steps: int = 20,
                      tol: float = DEFAULT_TOL, delta0: float = DEFAULT_DELTA0) -> DerivEstimate:
    """Double derivative of f at a: the double limit of the mean slope m_a^x(f).

    Without ``sign`` all four signed derivatives are estimated and must agree
    within ``tol``.
    """
    a = as_point(a)
    signs = (sign,) if sign is not None else ALL_SIGNS
    counted = Counter(f)
    fa = counted(a.x1, a.x2)
    d0 = _derivative_delta0(f, a, sign, delta0)

    def slope(x1, x2):
        num = (counted(x1, x2) + fa) - counted(x1, a.x2) - counted(a.x1, x2)
        return num / ((x1 - a.x1) * (x2 - a.x2))

    per_sign = []
    all_ests = []
    for s in signs:
        ests = [extrapolate(lambda d, fam=fam, s=s: slope(*_net_point(a, s, fam, d)), d0, steps, fam)
                for fam in FAMILIES]
        per_sign.append((s, ests, _limit_verdict(ests, tol)[0]))
        all_ests.extend(ests)

    diag = per_sign[0][1][0]
    spread = separation(all_ests)
    errs = max(e.error for e in all_ests)
    residual = max(spread, errs)
    details = {"signs": {s.label: [e[0].value, v.value] for s, e, v in per_sign}}
    if all(v is Verdict.CONVERGED for _, _, v in per_sign) and spread <= tol:
        value = float(np.mean([ests[0].value for _, ests, _ in per_sign]))
        verdict = Verdict.CONVERGED
    else:
        value = None
        if any(v is Verdict.DIVERGED for _, _, v in per_sign) or split_pair(all_ests, tol):
            verdict = Verdict.DIVERGED
        else:
            verdict = Verdict.INCONCLUSIVE
    report = EstimateReport(value, verdict, list(diag.trace), residual, counted.count,
                            "; ".join(e.message for e in all_ests if e.message), details)
    ref = value if value is not None else diag.value
    rho_trace = [(d, abs(m - ref)) for d, m in diag.raw] if ref is not None else []
    rho = rho_trace[-1][1] if rho_trace else math.inf
    return DerivEstimate(report, sign, rho, rho_trace)


class MixedPartials(NamedTuple):
    f12: float
    f21: float
    dd: float
    agree: bool


def ridders(fn, x: float, h0: float, ntab: int = 10, con: float = 1.4) -> tuple[float, float]:
    """Central-difference derivative of a 1-D function with Ridders' extrapolation."""
    con2 = con * con
    a = [[0.0] * ntab for _ in range(ntab)]
    h = h0
    a[0][0] = (fn(x + h) - fn(x - h)) / (2.0 * h)
    err = math.inf
    ans = a[0][0]
    for i in range(1, ntab):
        h /= con
        a[0][i] = (fn(x + h) - fn(x - h)) / (2.0 * h)
        fac = con2
        for j in range(1, i + 1):
            a[j][i] = (a[j - 1][i] * fac - a[j - 1][i - 1]) / (fac - 1.0)
            fac *= con2
            errt = max(abs(a[j][i] - a[j - 1][i]), abs(a[j][i] - a[j - 1][i - 1]))
            if errt <= err:
                err, ans = errt, a[j][i]
        if abs(a[i][i] - a[i - 1][i - 1]) >= 2.0 * err:
            break
    return ans, err


def mixed_partials_check(f: ScalarField2, a, h0: float = 0.1, steps: int = 20,
                         tol: float = DEFAULT_TOL) -> MixedPartials:
    """Estimate f12 = (f_1)_2 and f21 = (f_2)_1 by nested Ridders differences and
    compare both with the double derivative."""
    a = as_point(a)
    f12, _ = ridders(lambda t: ridders(lambda s: f(s, t), a.x1, h0)[0], a.x2, h0)
    f21, _ = ridders(lambda s: ridders(lambda t: f(s, t), a.x2, h0)[0], a.x1, h0)
    est = double_derivative(f, a, steps=steps, tol=tol)
    dd = est.value if est.value is not None else math.nan
    agree = (est.converged and abs(f12 - f21) <= tol and abs(dd - f12) <= tol
             and abs(dd - f21) <= tol)
    return MixedPartials(f12, f21, dd, agree)


def intermediate_point(f: ScalarField2, i: Interval2, d: float, tol: float = DEFAULT_TOL,
                       max_grid: int = 64) -> Point2:
    """A point c inside i with |f(c) - d| <= tol, for d strictly inside the corner-value hull."""
    lo, hi = i.lower.finite(), i.upper.finite()
    corners = [f(lo.x1, lo.x2), f(hi.x1, lo.x2), f(lo.x1, hi.x2), f(hi.x1, hi.x2)]
    if not (min(corners) < d < max(corners)):
        raise NoBracketError(f"no bracket: {d} is not strictly between "
                             f"{min(corners)} and {max(corners)}")
    below = above = None
    n = 4
    while n <= max_grid and (below is None or above is None):
        for x in i.interior_samples(0, n):
            for y in i.interior_samples(1, n):
                v = f(x, y)
                if abs(v - d) <= tol:
                    return Point2(x, y)
                if v < d and below is None:
                    below = (x, y)
                elif v > d and above is None:
                    above = (x, y)
        n *= 2
    if below is None or above is None:
        raise NoBracketError(f"no bracket for level {d} among interior samples")

    def at(u):
        return (below[0] + u * (above[0] - below[0]), below[1] + u * (above[1] - below[1]))

    lo_u, hi_u = 0.0, 1.0
    for _ in range(200):
        mid = 0.5 * (lo_u + hi_u)
        v = f(*at(mid)) - d
        if abs(v) <= tol:
            return Point2(*at(mid))
        if v < 0:
            lo_u = mid
        else:
            hi_u = mid
    raise ConvergenceError(f"bisection for level {d} did not reach tol {tol}")


@dataclass
class MeanValueResult:
    c: Point2
    target: float
    achieved: float
    residual: float
    halvings: int = 0
    trace: list = field(default_factory=list)


def _bisect_segment(g, p, q, gp, gq, thr):
    """Zero of g on the segment p -> q, given g(p), g(q) of opposite signs."""
    lo, hi = 0.0, 1.0
    best = (p, gp) if abs(gp) <= abs(gq) else (q, gq)
    for _ in range(BISECTION_STEPS):
        mid = 0.5 * (lo + hi)
        x = (p[0] + mid * (q[0] - p[0]), p[1] + mid * (q[1] - p[1]))
        v = g(x)
        if abs(v) < abs(best[1]):
            best = (x, v)
        if abs(v) <= thr:
            return x, v
        if (v > 0) == (gp > 0):
            lo = mid
        else:
            hi = mid
    return best


def rolle_solve(f: ScalarField2, i: Interval2, tol: float = DEFAULT_TOL,
                max_halvings: int = 40) -> MeanValueResult:
    """Constructive double Rolle: a point c inside i with f'(c) = 0, given Δ over i = 0.

    Each halving looks at g(x) = Δ_x^{x+h}(f), h = half the current span, at the
    four tiling anchors (their values sum to the current Δ, which is zero). A
    vanishing g at the first anchor keeps that corner square; otherwise g is
    bisected along the segment between a positive and a negative anchor and the
    square starting at the zero is kept. Halving stops once the mean slope over
    the next square could no longer be resolved at tol/100 in binary64.
    """
    if not i.is_finite:
        raise ValueError("rolle_solve needs a bounded interval")
    lo, hi = i.lower.finite(), i.upper.finite()
    scale = field_scale([f(p.x1, p.x2) for p in Interval2.closed(lo, hi).lattice(5)])
    total = delta2(f, lo, hi)
    if abs(total) > tol * scale + roundoff(scale):
        raise HypothesisError(f"Rolle hypothesis fails: Δ over the interval is {total:.6g}, not 0")

    p = (lo.x1, lo.x2)
    span = (hi.x1 - lo.x1, hi.x2 - lo.x2)
    halvings = 0
    trace = [(Point2(p[0] + span[0] / 2, p[1] + span[1] / 2), total)]
    while halvings < max_halvings and max(span) >= tol:
        h = (span[0] / 2, span[1] / 2)
        local = [abs(f(p[0] + u * h[0], p[1] + w * h[1])) for u in (0, 1, 2) for w in (0, 1, 2)]
        noise = roundoff(max(local))
        if noise / (h[0] * h[1]) > tol * 1e-2:
            break

        def g(x):
            return delta2(f, x, (x[0] + h[0], x[1] + h[1]))

        anchors = [p, (p[0], p[1] + h[1]), (p[0] + h[0], p[1]), (p[0] + h[0], p[1] + h[1])]
        gv = [g(x) for x in anchors]
        if abs(gv[0]) <= noise:
            new_p, gnew = anchors[0], gv[0]
        else:
            pos = [k for k, v in enumerate(gv) if v > noise]
            neg = [k for k, v in enumerate(gv) if v < -noise]
            small = [k for k, v in enumerate(gv) if abs(v) <= noise]
            if pos and neg:
                k1, k2 = sorted((pos[0], neg[0]))
                new_p, gnew = _bisect_segment(g, anchors[k1], anchors[k2], gv[k1], gv[k2], noise)
            elif small:
                new_p, gnew = anchors[small[0]], gv[small[0]]
            else:
                k = int(np.argmin(np.abs(gv)))
                log.debug("rolle: no sign change among anchors %s; keeping anchor %d", gv, k)
                new_p, gnew = anchors[k], gv[k]
        p, span = new_p, h
        halvings += 1
        trace.append((Point2(p[0] + span[0] / 2, p[1] + span[1] / 2), gnew))

    c = Point2(p[0] + span[0] / 2, p[1] + span[1] / 2)
    est = double_derivative(f, c, tol=tol)
    if not est.converged:
        raise ConvergenceError(f"double derivative at {c.as_tuple()} did not converge "
                               f"({est.report.verdict})")
    achieved = est.value
    if abs(achieved) > tol / 10:
        c, achieved = _polish(f, p, span, c, achieved, tol)
        trace.append((c, achieved))
    res = MeanValueResult(c, 0.0, achieved, abs(achieved), halvings, trace)
    if res.residual > tol:
        raise ConvergenceError(f"Rolle point {c.as_tuple()} has |f'(c)| = {res.residual:.3g} > {tol}")
    return res


def _polish(f: ScalarField2, p, span, c: Point2, dc: float, tol: float):
    """Bisect the estimated derivative inside the final square.

    The mean slope over that square vanishes, so f' changes sign in it; halving
    stops at the binary64 resolution limit, which leaves an O(span²) residual
    at the centre that this step removes.
    """
    def deriv(x):
        est = double_derivative(f, x, tol=tol)
        return est.value if est.converged else None

    probes = [(p[0] + u * span[0], p[1] + w * span[1]) for u in (0.05, 0.95) for w in (0.05, 0.95)]
    opposite = None
    for q in probes:
        v = deriv(q)
        if v is not None and (v > 0) != (dc > 0):
            opposite = (q, v)
            break
    if opposite is None:
        return c, dc
    a, fa_ = c.as_tuple(), dc
    b, _ = opposite
    best = (c, dc)
    for _ in range(BISECTION_STEPS):
        mid = ((a[0] + b[0]) / 2, (a[1] + b[1]) / 2)
        v = deriv(mid)
        if v is None:
            break
        if abs(v) < abs(best[1]):
            best = (Point2(*mid), v)
        if abs(v) <= tol / 10:
            break
        if (v > 0) == (fa_ > 0):
            a, fa_ = mid, v
        else:
            b = mid
    return best


def _minus(f: ScalarField2, k: float, g) -> ScalarField2:
    """The field f - k·g (g a callable of two reals)."""
    def fn(x1, x2):
        return f(x1, x2) - k * g(x1, x2)
    return ScalarField2(fn, domain_hint=f.domain_hint, label=f"({f.label}) - {k!r}*(...)")


def mvt_solve(f: ScalarField2, i: Interval2, tol: float = DEFAULT_TOL,
              max_halvings: int = 40) -> MeanValueResult:
    """A point c inside i whose double derivative equals the mean slope over i."""
    lo, hi = i.lower.finite(), i.upper.finite()
    m = mean_slope(f, lo, hi)
    aux = _minus(f, m, lambda x1, x2: (x1 - lo.x1) * (x2 - lo.x2))
    r = rolle_solve(aux, i, tol, max_halvings)
    est = double_derivative(f, r.c, tol=tol)
    if not est.converged:
        raise ConvergenceError(f"double derivative at {r.c.as_tuple()} did not converge")
    res = MeanValueResult(r.c, m, est.value, abs(est.value - m), r.halvings, r.trace)
    if res.residual > tol:
        raise ConvergenceError(f"MVT residual {res.residual:.3g} exceeds {tol}")
    return res


class CauchyResult(NamedTuple):
    c: Point2
    lhs: float
    rhs: float


def cauchy_mvt_solve(f: ScalarField2, g: ScalarField2, i: Interval2, tol: float = DEFAULT_TOL,
                     max_halvings: int = 40) -> CauchyResult:
    """A point c with f'(c)·Δ(g) = g'(c)·Δ(f) over i."""
    lo, hi = i.lower.finite(), i.upper.finite()
    df, dg = delta2(f, lo, hi), delta2(g, lo, hi)
    gscale = field_scale([g(lo.x1, lo.x2), g(hi.x1, lo.x2), g(lo.x1, hi.x2), g(hi.x1, hi.x2)])
    if abs(dg) <= tol * gscale + roundoff(gscale):
        r = rolle_solve(g, i, tol, max_halvings)
    else:
        r = rolle_solve(_minus(f, df / dg, g), i, tol, max_halvings)
    fd = double_derivative(f, r.c, tol=tol)
    gd = double_derivative(g, r.c, tol=tol)
    if not (fd.converged and gd.converged):
        raise ConvergenceError(f"derivatives at {r.c.as_tuple()} did not converge")
    lhs, rhs = fd.value * dg, gd.value * df
    if abs(lhs - rhs) > tol * max(1.0, abs(lhs), abs(rhs)):
        raise ConvergenceError(f"Cauchy identity residual {abs(lhs - rhs):.3g} exceeds tolerance")
    return CauchyResult(r.c, lhs, rhs)


class Monotonicity(str, enum.Enum):
    INCREASING = "double_increasing"
    DECREASING = "double_decreasing"
    CONSTANT = "double_constant"
    MIXED = "mixed"

    def __str__(self):
        return self.value


def monotonicity_classify(f: ScalarField2, i: Interval2, grid: int = 5,
                          tol: float = DEFAULT_TOL) -> Monotonicity:
    """Classify f on i by the sign of its double derivative on an interior grid."""
    vals = []
    for x in i.interior_samples(0, grid):
        for y in i.interior_samples(1, grid):
            est = double_derivative(f, (x, y), tol=tol)
            if not est.converged:
                log.warning("double derivative at (%g, %g) did not converge: %s", x, y,
                            est.report.verdict)
                return Monotonicity.MIXED
            vals.append(est.value)
    if all(v > tol for v in vals):
        return Monotonicity.INCREASING
    if all(v < -tol for v in vals):
        return Monotonicity.DECREASING
    if all(abs(v) <= tol for v in vals):
        return Monotonicity.CONSTANT
    return Monotonicity.MIXED


@dataclass
class CriticalPoint:
    location: Point2
    kind: str            # stationary, nondifferentiable
    classification: str  # double_max, double_min, neither, unknown
    derivative: Optional[float] = None
    tol: float = DEFAULT_TOL


def _sector_points(c: Point2, i: Interval2, s1: int, s2: int, samples: int):
    lo, hi = i.lower.finite(), i.upper.finite()
    r1 = (hi.x1 - c.x1) if s1 > 0 else (c.x1 - lo.x1)
    r2 = (hi.x2 - c.x2) if s2 > 0 else (c.x2 - lo.x2)
    n_ang = max(1, math.ceil(samples / 3))
    pts = []
    for rad in (0.25, 0.5, 0.75):
        for j in range(n_ang):
            th = (j + 0.5) / n_ang * math.pi / 2
            pts.append(Point2(c.x1 + s1 * rad * r1 * math.cos(th), c.x2 + s2 * rad * r2 * math.sin(th)))
    return pts[:max(samples, 1)]


# sectors: (a,c), (c,b), ((a1,c2),(c1,b2)), ((c1,a2),(b1,c2))
_SECTORS = ((-1, -1), (1, 1), (-1, 1), (1, -1))


def classify_stationary(f: ScalarField2, c, i: Interval2, sectors_samples: int = 16,
                        tol: float = DEFAULT_TOL) -> str:
    """First-derivative-test classification of a stationary point c inside i."""
    c = as_point(c)
    signs = []
    for s1, s2 in _SECTORS:
        vals = []
        for p in _sector_points(c, i, s1, s2, sectors_samples):
            est = double_derivative(f, p, tol=tol)
            if not est.converged:
                return "unknown"
            vals.append(est.value)
        if all(v > tol for v in vals):
            signs.append(1)
        elif all(v < -tol for v in vals):
            signs.append(-1)
        else:
            return "unknown"
    if signs == [-1, -1, 1, 1]:
        return "double_max"
    if signs == [1, 1, -1, -1]:
        return "double_min"
    if len(set(signs)) == 1:
        return "neither"
    return "unknown"


def _checkerboard(ll, lr, ul, ur) -> bool:
    return ll * ur > 0 and lr * ul > 0 and ll * lr < 0


def critical_points(f: ScalarField2, i: Interval2, grid: int = 8, tol: float = DEFAULT_TOL,
                    sectors_samples: int = 16) -> list[CriticalPoint]:
    """Locate double critical points inside i.

    Grid cells whose corner derivative signs change along both axes are refined
    by repeated quartering (keeping the quarter that still changes sign along
    both axes); grid points where the derivative does not converge are reported
    as nondifferentiable.
    """
    xs, ys = i.interior_samples(0, grid), i.interior_samples(1, grid)
    cache = {}

    def fd(x, y):
        key = (x, y)
        if key not in cache:
            cache[key] = double_derivative(f, (x, y), tol=tol)
        return cache[key]

    out: list[CriticalPoint] = []
    vals = np.empty((grid, grid))
    for a, x in enumerate(xs):
        for b, y in enumerate(ys):
            est = fd(x, y)
            if est.converged:
                vals[a, b] = est.value
            else:
                vals[a, b] = np.nan
                out.append(CriticalPoint(Point2(x, y), "nondifferentiable", "unknown", None, tol))

    cell = max(i.span[0] / (grid + 1), i.span[1] / (grid + 1))
    for a in range(grid - 1):
        for b in range(grid - 1):
            ll, lr, ul, ur = vals[a, b], vals[a + 1, b], vals[a, b + 1], vals[a + 1, b + 1]
            if np.isnan([ll, lr, ul, ur]).any() or not _checkerboard(ll, lr, ul, ur):
                continue
            x0, x1_, y0, y1_ = xs[a], xs[a + 1], ys[b], ys[b + 1]
            loc = _refine_crossing(fd, x0, x1_, y0, y1_, tol)
            if loc is None or any(abs(loc.x1 - q.location.x1) < cell and abs(loc.x2 - q.location.x2) < cell
                                  for q in out):
                continue
            est = double_derivative(f, loc, tol=tol)
            if not est.converged:
                out.append(CriticalPoint(loc, "nondifferentiable", "unknown", None, tol))
            elif abs(est.value) <= tol:
                cls = classify_stationary(f, loc, i, sectors_samples, tol)
                out.append(CriticalPoint(loc, "stationary", cls, est.value, tol))
    return out


def _refine_crossing(fd, x0, x1, y0, y1, tol, max_iter: int = 60) -> Optional[Point2]:
    def val(x, y):
        e = fd(x, y)
        return e.value if e.converged else None

    for _ in range(max_iter):
        xm, ym = 0.5 * (x0 + x1), 0.5 * (y0 + y1)
        if max(x1 - x0, y1 - y0) < 1e-12 * max(1.0, abs(xm), abs(ym)):
            break
        grid = {}
        for x in (x0, xm, x1):
            for y in (y0, ym, y1):
                v = val(x, y)
                if v is None:
                    return None
                # signs of values at noise level are meaningless
                grid[(x, y)] = v if abs(v) > 1e-3 * tol else 0.0
        if not any(grid.values()):
            break
        for (xa, xb) in ((x0, xm), (xm, x1)):
            for (ya, yb) in ((y0, ym), (ym, y1)):
                if _checkerboard(grid[(xa, ya)], grid[(xb, ya)], grid[(xa, yb)], grid[(xb, yb)]):
                    x0, x1, y0, y1 = xa, xb, ya, yb
                    break
            else:
                continue
            break
        else:
            # the crossing sits on a dividing line; keep the central quarter
            x0, x1 = 0.5 * (x0 + xm), 0.5 * (xm + x1)
            y0, y1 = 0.5 * (y0 + ym), 0.5 * (ym + y1)
    return Point2(0.5 * (x0 + x1), 0.5 * (y0 + y1))
