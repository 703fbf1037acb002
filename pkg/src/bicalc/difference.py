"""The double difference operator, double constancy, and continuity probes."""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .core import (
    DegenerateError, DomainError, Interval2, Point2, QuadrantSign, ScalarField2,
    ScalarFieldN, as_point, nsim, roundoff,
)

SHRINK = 0.5
INITIAL_OFFSET = 2.0 ** -3
DEFAULT_SHRINK_STEPS = 20
DEFAULT_TOL = 1e-6


def delta2(f, a, b) -> float:
    """Four-corner alternating sum of f from a to b.

    Positive corners are summed first: (f(b) + f(a)) - f(b1,a2) - f(a1,b2).
    """
    a1, a2 = a
    b1, b2 = b
    pos = f(b1, b2) + f(a1, a2)
    return pos - f(b1, a2) - f(a1, b2)


def delta_n(f: ScalarFieldN, a: Sequence[float], b: Sequence[float]) -> float:
    """n-dimensional double difference: sum over s in {0,1}^n of (-1)^|s| f(s*a + (1-s)*b).

    Same ordering rule as :func:`delta2` (positive corners first, lexicographic
    within each group), so the n = 2 case matches it bit for bit.
    """
    n = len(a)
    if len(b) != n:
        raise ValueError(f"points have different lengths {len(a)} and {len(b)}")
    if n != f.arity:
        raise ValueError(f"field has arity {f.arity}, points have length {n}")
    pos, neg = [], []
    for s in itertools.product((0, 1), repeat=n):
        corner = [a[k] if s[k] else b[k] for k in range(n)]
        (neg if sum(s) % 2 else pos).append(corner)
    total = 0.0
    for c in pos:
        total += f(*c)
    for c in neg:
        total -= f(*c)
    return total


def mean_slope(f, a, b) -> float:
    """Double difference divided by (b1 - a1)(b2 - a2); needs a ≁ b."""
    if not nsim(a, b):
        raise DegenerateError(f"mean slope needs a ≁ b, got a={tuple(a)} b={tuple(b)}")
    a1, a2 = a
    b1, b2 = b
    return delta2(f, a, b) / ((b1 - a1) * (b2 - a2))


def _lattice_values(f: ScalarField2, i: Interval2, grid: int):
    xs, ys = i.axis_samples(0, grid), i.axis_samples(1, grid)
    vals = f.many(xs[:, None], ys[None, :])
    return xs, ys, vals


def is_double_constant(f: ScalarField2, i: Interval2, grid: int = 9, tol: float = 1e-10) -> bool:
    """Sampled test of Δ_a^b(f) = 0 over all lattice pairs a, b in i."""
    if grid < 2:
        raise ValueError("grid must be >= 2")
    _, _, vals = _lattice_values(f, i, grid)
    return max_lattice_delta(vals) <= tol


def max_lattice_delta(vals: np.ndarray) -> float:
    # Δ over lattice pairs: f(k,l) + f(i,j) - f(k,j) - f(i,l)
    v = vals
    worst = 0.0
    for ii in range(v.shape[0]):
        pos = v[:, None, :] + v[ii][None, :, None]          # (k, j, l): f(k,l) + f(ii,j)
        neg = v[:, :, None] + v[ii][None, None, :]          # (k, j, l): f(k,j) + f(ii,l)
        worst = max(worst, float(np.max(np.abs(pos - neg))))
    return worst


@dataclass(frozen=True)
class SplitDecomposition:
    """f(x) = g(x1) + h(x2) around an anchor, built as in the double-constant construction."""

    base: Point2
    field: ScalarField2

    def g(self, s: float) -> float:
        return self.field(s, self.base.x2)

    def h(self, t: float) -> float:
        return self.field(self.base.x1, t) - self.field(self.base.x1, self.base.x2)

    def reconstruct(self, x1: float, x2: float) -> float:
        return self.g(x1) + self.h(x2)

    def deviation(self, points) -> float:
        """Largest |g(x1) + h(x2) - f(x)| over the given points."""
        worst = 0.0
        for p in points:
            x1, x2 = p
            worst = max(worst, abs(self.reconstruct(x1, x2) - self.field(x1, x2)))
        return worst

    def lattice_deviation(self, i: Interval2, grid: int = 9) -> float:
        return self.deviation(i.lattice(grid))


def split_double_constant(f: ScalarField2, i: Interval2, anchor) -> SplitDecomposition:
    anchor = as_point(anchor)
    if not i.contains(anchor):
        raise ValueError(f"anchor {anchor.as_tuple()} is not in {i.describe()}")
    return SplitDecomposition(anchor, f)


@dataclass
class ContinuityReport:
    point: Point2
    sign: Optional[QuadrantSign]
    verdict: str  # pass, fail, inconclusive
    worst_axis: str  # x1-sweep or x2-sweep
    worst_deviation: float
    samples: int
    tol: float = DEFAULT_TOL
    message: str = ""

    def __post_init__(self):
        if self.verdict == "fail" and not self.message and not self.worst_deviation > self.tol:
            raise ValueError("fail verdict needs worst_deviation above the tolerance")

    @property
    def passed(self) -> bool:
        return self.verdict == "pass"


def _verdict(worst: float, monotone: bool, tol: float) -> str:
    if worst <= tol and monotone:
        return "pass"
    if worst <= 10 * tol and not monotone:
        return "inconclusive"
    return "fail"


def _decreasing_tail(seq: Sequence[float], noise: float) -> bool:
    tail = seq[-3:]
    return all(tail[k + 1] <= tail[k] + noise for k in range(len(tail) - 1))


def _sweep_offsets(radius: float, sweep: int, sides: Sequence[int]) -> list[float]:
    """Fixed-coordinate offsets: ``sweep`` values spread over (0, radius] per side."""
    per_side = max(1, sweep // len(sides)) if len(sides) > 1 else sweep
    return [s * radius * j / per_side for s in sides for j in range(1, per_side + 1)]


def _probe_spans(f: ScalarField2, a: Point2, span) -> tuple[float, float]:
    if span is not None:
        s1, s2 = (span, span) if np.isscalar(span) else span
        return float(s1), float(s2)
    hint = f.domain_hint
    if hint is not None and hint.is_finite:
        return hint.span
    return (1.0, 1.0)


def continuity_probe(f: ScalarField2, a, sign: Optional[QuadrantSign] = None, sweep: int = 8,
                     shrink_steps: int = DEFAULT_SHRINK_STEPS, tol: float = DEFAULT_TOL,
                     span=None) -> ContinuityReport:
    """Sampled check of double continuity at ``a``.

    For each of ``sweep`` fixed values of x1 the other coordinate x2 is driven to
    a2 through geometrically shrinking offsets (and symmetrically with the roles
    swapped); |Δ_a^x(f)| at the final offset is the deviation. With ``sign`` the
    fixed values and the approach are restricted to that quadrant.
    """
    a = as_point(a)
    span1, span2 = _probe_spans(f, a, span)
    offsets1 = [INITIAL_OFFSET * span1 * SHRINK ** k for k in range(shrink_steps)]
    offsets2 = [INITIAL_OFFSET * span2 * SHRINK ** k for k in range(shrink_steps)]
    sides1 = (sign.s1,) if sign else (1, -1)
    sides2 = (sign.s2,) if sign else (1, -1)
    try:
        fa = f(a.x1, a.x2)
    except DomainError as exc:
        return ContinuityReport(a, sign, "fail", "x1-sweep", math.inf, 1, tol, str(exc))

    worst = {"x1-sweep": 0.0, "x2-sweep": 0.0}
    monotone = True
    samples = 1
    scale = abs(fa)
    axes = (
        ("x1-sweep", _sweep_offsets(INITIAL_OFFSET * span1, sweep, sides1), sides2, offsets2),
        ("x2-sweep", _sweep_offsets(INITIAL_OFFSET * span2, sweep, sides2), sides1, offsets1),
    )
    try:
        for axis, fixed_offsets, move_sides, moves in axes:
            for fo in fixed_offsets:
                for ms in move_sides:
                    seq = []
                    for d in moves:
                        if axis == "x1-sweep":
                            x1, x2 = a.x1 + fo, a.x2 + ms * d
                        else:
                            x1, x2 = a.x1 + ms * d, a.x2 + fo
                        corners = (f(x1, x2), f(x1, a.x2), f(a.x1, x2))
                        samples += 3
                        scale = max(scale, *(abs(c) for c in corners))
                        seq.append(abs((corners[0] + fa) - corners[1] - corners[2]))
                    noise = 1e-3 * tol + roundoff(scale, 64)
                    if not _decreasing_tail(seq, noise):
                        monotone = False
                    worst[axis] = max(worst[axis], seq[-1])
    except DomainError as exc:
        return ContinuityReport(a, sign, "fail", axis, math.inf, samples, tol, str(exc))
    axis = max(worst, key=worst.get)
    return ContinuityReport(a, sign, _verdict(worst[axis], monotone, tol), axis, worst[axis],
                            samples, tol)


def global_continuity_probe(f: ScalarField2, i: Interval2, grid: int = 5,
                            shrink_steps: int = DEFAULT_SHRINK_STEPS,
                            tol: float = DEFAULT_TOL) -> ContinuityReport:
    """Sampled global double continuity on a bounded interval.

    For lattice values c, d on one axis and e on the other, drives the moving
    coordinate to e from every side that stays in i and tracks
    |Δ_{(d,e)}^{(c,x2)}(f)| (and the transposed family).
    """
    if not i.is_finite:
        raise ValueError("global continuity probe needs a bounded interval")
    span1, span2 = i.span
    xs, ys = i.axis_samples(0, grid), i.axis_samples(1, grid)
    worst = {"x1-sweep": 0.0, "x2-sweep": 0.0}
    where = {"x1-sweep": i.center, "x2-sweep": i.center}
    monotone = True
    samples = 0
    scale = 0.0

    def moves(k, e):
        lo, hi, _, _ = i.axis(k)
        span = span1 if k == 0 else span2
        out = []
        for s in (1, -1):
            if (s > 0 and e < hi) or (s < 0 and e > lo):
                room = (hi - e) if s > 0 else (e - lo)
                d0 = min(INITIAL_OFFSET * span, room)
                out.append([e + s * d0 * SHRINK ** k_ for k_ in range(shrink_steps)])
        return out

    try:
        for axis, fixed, other, k_move in (("x1-sweep", xs, ys, 1), ("x2-sweep", ys, xs, 0)):
            for c in fixed:
                for d in fixed:
                    if c == d:
                        continue
                    for e in other:
                        for path in moves(k_move, e):
                            seq = []
                            for t in path:
                                if axis == "x1-sweep":
                                    vals = (f(c, t), f(d, e), f(c, e), f(d, t))
                                    p = Point2(d, e)
                                else:
                                    vals = (f(t, c), f(e, d), f(e, c), f(t, d))
                                    p = Point2(e, d)
                                samples += 4
                                scale = max(scale, *(abs(v) for v in vals))
                                seq.append(abs((vals[0] + vals[1]) - vals[2] - vals[3]))
                            if not _decreasing_tail(seq, 1e-3 * tol + roundoff(scale, 64)):
                                monotone = False
                            if seq[-1] >= worst[axis]:
                                worst[axis] = seq[-1]
                                where[axis] = p
    except DomainError as exc:
        return ContinuityReport(i.center, None, "fail", axis, math.inf, samples, tol, str(exc))
    axis = max(worst, key=worst.get)
    return ContinuityReport(where[axis], None, _verdict(worst[axis], monotone, tol), axis,
                            worst[axis], samples, tol)


def delta_map_field(f: ScalarField2, h) -> ScalarField2:
    """The field x -> Δ_x^{x+h}(f)."""
    h1, h2 = h
    if not nsim((h1, h2), (0.0, 0.0)):
        raise DegenerateError("delta map needs h ≁ 0")

    def fn(x1, x2):
        return delta2(f, (x1, x2), (x1 + h1, x2 + h2))

    vec = None
    if f.vectorized:
        def vec(x1, x2):
            return (f.many(x1 + h1, x2 + h2) + f.many(x1, x2)) - f.many(x1 + h1, x2) \
                - f.many(x1, x2 + h2)

    hint = None
    if f.domain_hint is not None:
        d = f.domain_hint
        lo1 = d.lower.x1 - min(h1, 0.0)
        hi1 = d.upper.x1 - max(h1, 0.0)
        lo2 = d.lower.x2 - min(h2, 0.0)
        hi2 = d.upper.x2 - max(h2, 0.0)
        if lo1 < hi1 and lo2 < hi2:
            hint = Interval2((lo1, lo2), (hi1, hi2), d.edge_closed)
    return ScalarField2(fn, vectorized=vec, domain_hint=hint,
                        label=f"Δ_x^(x+({h1},{h2}))[{f.label}]")
