"""Shared domain types: points, double intervals, quadrant signs, fields, reports."""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence, Union

import numpy as np

Real = float
StepParam = Union[float, "Point2", tuple]


class BicalcError(Exception):
    """Base class for errors raised by this package."""


class DomainError(BicalcError, ArithmeticError):
    """A field could not be evaluated at a point (NaN, overflow, log of a negative, ...)."""


class DegenerateError(BicalcError, ValueError):
    """Two points share a coordinate where the operation needs a ≁ b."""


class HypothesisError(BicalcError, ValueError):
    """An input violates a numerically checked theorem hypothesis."""


class ConvergenceError(BicalcError, RuntimeError):
    """An iterative solver ran out of budget before meeting its tolerance."""


class NoBracketError(BicalcError, ValueError):
    """No pair of sample points brackets the requested level."""


def _check_real(v: float, name: str, allow_inf: bool) -> float:
    v = float(v)
    if math.isnan(v):
        raise ValueError(f"{name} is NaN")
    if not allow_inf and math.isinf(v):
        raise ValueError(f"{name} must be finite, got {v}")
    return v


@dataclass(frozen=True)
class Point2:
    x1: float
    x2: float

    def __post_init__(self):
        object.__setattr__(self, "x1", _check_real(self.x1, "x1", False))
        object.__setattr__(self, "x2", _check_real(self.x2, "x2", False))

    def __iter__(self):
        yield self.x1
        yield self.x2

    def __add__(self, other):
        o1, o2 = other
        return Point2(self.x1 + o1, self.x2 + o2)

    def __sub__(self, other):
        o1, o2 = other
        return Point2(self.x1 - o1, self.x2 - o2)

    def as_tuple(self) -> tuple[float, float]:
        return (self.x1, self.x2)


@dataclass(frozen=True)
class ExtendedPoint2:
    """A point of the extended plane; components may be +inf or -inf."""

    x1: float
    x2: float

    def __post_init__(self):
        object.__setattr__(self, "x1", _check_real(self.x1, "x1", True))
        object.__setattr__(self, "x2", _check_real(self.x2, "x2", True))

    def __iter__(self):
        yield self.x1
        yield self.x2

    @property
    def is_finite(self) -> bool:
        return math.isfinite(self.x1) and math.isfinite(self.x2)

    def finite(self) -> Point2:
        return Point2(self.x1, self.x2)

    def as_tuple(self) -> tuple[float, float]:
        return (self.x1, self.x2)


def as_point(p) -> Point2:
    if isinstance(p, Point2):
        return p
    x1, x2 = p
    return Point2(x1, x2)


def as_extended(p) -> ExtendedPoint2:
    if isinstance(p, ExtendedPoint2):
        return p
    x1, x2 = p
    return ExtendedPoint2(x1, x2)


def nsim(a, b) -> bool:
    """True iff a and b differ in both coordinates (a ≁ b)."""
    a1, a2 = a
    b1, b2 = b
    return a1 != b1 and a2 != b2


class QuadrantSign(enum.Enum):
    PP = (1, 1)
    PM = (1, -1)
    MP = (-1, 1)
    MM = (-1, -1)

    @property
    def s1(self) -> int:
        return self.value[0]

    @property
    def s2(self) -> int:
        return self.value[1]

    @property
    def label(self) -> str:
        return "".join("+" if s > 0 else "-" for s in self.value)

    @classmethod
    def parse(cls, text: str) -> "QuadrantSign":
        t = text.strip().replace("−", "-").upper()
        table = {"++": cls.PP, "+-": cls.PM, "-+": cls.MP, "--": cls.MM,
                 "PP": cls.PP, "PM": cls.PM, "MP": cls.MP, "MM": cls.MM}
        try:
            return table[t]
        except KeyError:
            raise ValueError(f"unknown quadrant sign {text!r}") from None

    @classmethod
    def from_signs(cls, s1: int, s2: int) -> "QuadrantSign":
        return cls((1 if s1 > 0 else -1, 1 if s2 > 0 else -1))

    def __str__(self):
        return self.label


@dataclass(frozen=True)
class Interval2:
    """Double interval with per-edge closure flags (left, right, bottom, top)."""

    lower: ExtendedPoint2
    upper: ExtendedPoint2
    edge_closed: tuple[bool, bool, bool, bool] = (True, True, True, True)

    def __post_init__(self):
        lo, up = as_extended(self.lower), as_extended(self.upper)
        object.__setattr__(self, "lower", lo)
        object.__setattr__(self, "upper", up)
        flags = tuple(bool(f) for f in self.edge_closed)
        if len(flags) != 4:
            raise ValueError("edge_closed needs four flags (left, right, bottom, top)")
        object.__setattr__(self, "edge_closed", flags)
        if not (lo.x1 < up.x1 and lo.x2 < up.x2):
            raise ValueError(f"degenerate interval: lower={lo.as_tuple()} upper={up.as_tuple()}")
        bounds = (lo.x1, up.x1, lo.x2, up.x2)
        for b, closed in zip(bounds, flags):
            if closed and math.isinf(b):
                raise ValueError("an edge at infinity must be open")

    @classmethod
    def closed(cls, lower, upper) -> "Interval2":
        return cls(as_extended(lower), as_extended(upper), (True, True, True, True))

    @classmethod
    def open(cls, lower, upper) -> "Interval2":
        return cls(as_extended(lower), as_extended(upper), (False, False, False, False))

    @property
    def left_closed(self) -> bool:
        return self.edge_closed[0]

    @property
    def right_closed(self) -> bool:
        return self.edge_closed[1]

    @property
    def bottom_closed(self) -> bool:
        return self.edge_closed[2]

    @property
    def top_closed(self) -> bool:
        return self.edge_closed[3]

    @property
    def is_finite(self) -> bool:
        return self.lower.is_finite and self.upper.is_finite

    @property
    def span(self) -> tuple[float, float]:
        return (self.upper.x1 - self.lower.x1, self.upper.x2 - self.lower.x2)

    @property
    def area(self) -> float:
        s1, s2 = self.span
        return s1 * s2

    @property
    def center(self) -> Point2:
        self._require_finite()
        return Point2((self.lower.x1 + self.upper.x1) / 2, (self.lower.x2 + self.upper.x2) / 2)

    def _require_finite(self):
        if not self.is_finite:
            raise ValueError("operation needs a bounded interval")

    def axis(self, k: int) -> tuple[float, float, bool, bool]:
        """(lo, hi, lo_closed, hi_closed) along axis k (0 or 1)."""
        if k == 0:
            return self.lower.x1, self.upper.x1, self.edge_closed[0], self.edge_closed[1]
        return self.lower.x2, self.upper.x2, self.edge_closed[2], self.edge_closed[3]

    def contains(self, p) -> bool:
        return contains(self, p)

    def axis_samples(self, k: int, n: int) -> np.ndarray:
        """n sample abscissae on axis k: endpoints included only on closed edges."""
        self._require_finite()
        lo, hi, lo_c, hi_c = self.axis(k)
        if n == 1:
            return np.array([(lo + hi) / 2])
        pad = (0 if lo_c else 1) + (0 if hi_c else 1)
        pts = np.linspace(lo, hi, n + pad)
        start = 0 if lo_c else 1
        return pts[start:start + n]

    def interior_samples(self, k: int, n: int) -> np.ndarray:
        self._require_finite()
        lo, hi, _, _ = self.axis(k)
        return np.linspace(lo, hi, n + 2)[1:-1]

    def lattice(self, n: int) -> list[Point2]:
        xs, ys = self.axis_samples(0, n), self.axis_samples(1, n)
        return [Point2(x, y) for x in xs for y in ys]

    def sub(self, lower, upper) -> "Interval2":
        return Interval2.closed(lower, upper)

    def describe(self) -> str:
        l = "[" if self.edge_closed[0] else "("
        r = "]" if self.edge_closed[1] else ")"
        b = "[" if self.edge_closed[2] else "("
        t = "]" if self.edge_closed[3] else ")"
        return (f"{l}{_fmt(self.lower.x1)},{_fmt(self.upper.x1)}{r}x"
                f"{b}{_fmt(self.lower.x2)},{_fmt(self.upper.x2)}{t}")

    def allowed_signs(self, p) -> list[QuadrantSign]:
        """Quadrant signs that keep a signed neighbourhood of p inside the interval."""
        p1, p2 = p
        dirs = []
        for k, v in enumerate((p1, p2)):
            lo, hi, _, _ = self.axis(k)
            d = []
            if v < hi:
                d.append(1)
            if v > lo:
                d.append(-1)
            dirs.append(d)
        return [QuadrantSign.from_signs(s1, s2) for s1 in dirs[0] for s2 in dirs[1]]


def _fmt(v: float) -> str:
    if math.isinf(v):
        return "inf" if v > 0 else "-inf"
    return repr(float(v))


def contains(i: Interval2, p) -> bool:
    p1, p2 = p
    for k, v in enumerate((p1, p2)):
        lo, hi, lo_c, hi_c = i.axis(k)
        if math.isinf(v) or math.isnan(v):
            return False
        if v < lo or (v == lo and not lo_c):
            return False
        if v > hi or (v == hi and not hi_c):
            return False
    return True


_EPS = np.finfo(float).eps


class ScalarField2:
    """A deterministic real function of two variables.

    ``fn(x1, x2)`` is the scalar evaluator. ``vectorized``, when given, accepts
    broadcastable numpy arrays and is used by the grid-based routines.
    Evaluation raises :class:`DomainError` instead of returning NaN or inf.
    """

    def __init__(self, fn: Callable[[float, float], float], *,
                 vectorized: Optional[Callable[[np.ndarray, np.ndarray], np.ndarray]] = None,
                 domain_hint: Optional[Interval2] = None, label: str = "<callable>"):
        self._fn = fn
        self._vec = vectorized
        self.domain_hint = domain_hint
        self.label = label

    @classmethod
    def from_expr(cls, src: str, domain_hint: Optional[Interval2] = None) -> "ScalarField2":
        from .exprlang import compile_field
        return compile_field(src, domain_hint=domain_hint)

    def __call__(self, x1: float, x2: float) -> float:
        try:
            v = self._fn(x1, x2)
        except (ValueError, ZeroDivisionError, OverflowError) as exc:
            raise DomainError(f"{self.label} undefined at ({x1!r}, {x2!r}): {exc}") from None
        v = float(v)
        if not math.isfinite(v):
            raise DomainError(f"{self.label} is not finite at ({x1!r}, {x2!r})")
        return v

    def at(self, p) -> float:
        x1, x2 = p
        return self(x1, x2)

    def many(self, x1, x2) -> np.ndarray:
        """Evaluate on broadcastable arrays; raises DomainError if any value is not finite."""
        x1 = np.asarray(x1, dtype=float)
        x2 = np.asarray(x2, dtype=float)
        if self._vec is not None:
            with np.errstate(all="ignore"):
                out = np.asarray(self._vec(x1, x2), dtype=float)
            out = np.broadcast_to(out, np.broadcast_shapes(x1.shape, x2.shape))
            if not np.all(np.isfinite(out)):
                bad = np.argwhere(~np.isfinite(out))[0]
                b1, b2 = np.broadcast_arrays(x1, x2)
                raise DomainError(f"{self.label} is not finite at "
                                  f"({b1[tuple(bad)]!r}, {b2[tuple(bad)]!r})")
            return out
        b1, b2 = np.broadcast_arrays(x1, x2)
        out = np.empty(b1.shape)
        for idx in np.ndindex(b1.shape):
            out[idx] = self(float(b1[idx]), float(b2[idx]))
        return out

    @property
    def vectorized(self) -> bool:
        return self._vec is not None

    def with_hint(self, hint: Optional[Interval2]) -> "ScalarField2":
        return ScalarField2(self._fn, vectorized=self._vec, domain_hint=hint, label=self.label)

    def __repr__(self):
        return f"ScalarField2({self.label})"


class ScalarFieldN:
    """A deterministic real function of ``arity`` variables."""

    def __init__(self, arity: int, fn: Callable[..., float], label: str = "<callable>"):
        if arity < 1:
            raise ValueError("arity must be >= 1")
        self.arity = arity
        self._fn = fn
        self.label = label

    @classmethod
    def from_expr(cls, src: str, arity: int) -> "ScalarFieldN":
        from .exprlang import compile_field_n
        return compile_field_n(src, arity)

    def __call__(self, *xs: float) -> float:
        if len(xs) != self.arity:
            raise TypeError(f"{self.label} takes {self.arity} arguments, got {len(xs)}")
        try:
            v = float(self._fn(*xs))
        except (ValueError, ZeroDivisionError, OverflowError) as exc:
            raise DomainError(f"{self.label} undefined at {xs!r}: {exc}") from None
        if not math.isfinite(v):
            raise DomainError(f"{self.label} is not finite at {xs!r}")
        return v

    def __repr__(self):
        return f"ScalarFieldN({self.arity}, {self.label})"


class Verdict(str, enum.Enum):
    CONVERGED = "converged"
    DIVERGED = "diverged"
    INCONCLUSIVE = "inconclusive"

    def __str__(self):
        return self.value


@dataclass
class EstimateReport:
    """Numeric estimate with its convergence trace.

    ``trace`` holds ``(step_parameter, estimate)`` pairs in the order computed.
    """

    value: Optional[float]
    verdict: Verdict
    trace: list = field(default_factory=list)
    residual: float = math.inf
    evaluations: int = 0
    message: str = ""
    details: dict = field(default_factory=dict)

    def __post_init__(self):
        if not self.trace:
            raise ValueError("EstimateReport needs a nonempty trace")
        if self.verdict is Verdict.CONVERGED:
            if self.value is None:
                raise ValueError("converged report without a value")
            if abs(self.trace[-1][1] - self.value) > self.residual:
                raise ValueError("last trace estimate farther from value than the residual")

    @property
    def converged(self) -> bool:
        return self.verdict is Verdict.CONVERGED


class Counter:
    """Wrap a field and count its scalar evaluations."""

    def __init__(self, f):
        self.f = f
        self.count = 0

    def __call__(self, x1, x2):
        self.count += 1
        return self.f(x1, x2)


def field_scale(values: Sequence[float]) -> float:
    return max((abs(v) for v in values), default=0.0)


def roundoff(scale: float, ulps: float = 16.0) -> float:
    """Rounding noise expected in a handful of additions of magnitude ``scale``."""
    return ulps * _EPS * scale
