"""Geometric nets with Richardson extrapolation (Ridders-style error control)."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

from .core import DegenerateError, DomainError

FAMILIES = ((1, 1), (1, 2), (2, 1))
SAFE = 2.0
MAX_ORDER = 6


@dataclass
class NetEstimate:
    """Limit estimate of one path family ``x(δ)`` as δ -> 0."""

    family: tuple
    value: Optional[float]
    error: float
    raw: list = field(default_factory=list)     # (δ, g(x(δ)))
    trace: list = field(default_factory=list)   # (δ, best estimate so far)
    message: str = ""

    @property
    def settled(self) -> bool:
        return self.value is not None and math.isfinite(self.error)


def extrapolate(seq: Callable[[float], float], delta0: float, steps: int,
                family: tuple = (1, 1), richardson: bool = True,
                min_steps: int = 6) -> NetEstimate:
    """Evaluate ``seq(δ_k)`` for δ_k = delta0 / 2^k and extrapolate to δ -> 0.

    The Neville tableau eliminates integer powers of δ column by column (at
    most MAX_ORDER of them). Each entry's error is its distance to its two
    parents and to the same-order entry of the previous row (raw samples use
    the last two differences). The returned error is the smallest seen, and
    the loop stops once the diagonal moves by more than SAFE times that error
    (roundoff has taken over). The loop never stops before ``min_steps`` rows.
    """
    rows: list[list[float]] = []
    est = NetEstimate(family, None, math.inf)
    best, err = None, math.inf
    for k in range(steps):
        d = delta0 * 0.5 ** k
        try:
            v = seq(d)
        except (DomainError, DegenerateError) as exc:
            est.message = f"net stopped at δ={d:g}: {exc}"
            if not rows:
                raise
            break
        est.raw.append((d, v))
        row = [v]
        if rows:
            e_raw = abs(v - rows[-1][0])
            if len(rows) >= 2:
                # two equal raw samples can be a coincidence (a net crossing a zero twice)
                e_raw = max(e_raw, abs(rows[-1][0] - rows[-2][0]))
            if e_raw <= err:
                best, err = v, e_raw
            if richardson:
                prev = rows[-1]
                for j in range(1, min(k, MAX_ORDER) + 1):
                    fac = 2.0 ** j
                    t = row[j - 1] + (row[j - 1] - prev[j - 1]) / (fac - 1.0)
                    row.append(t)
                    e = max(abs(t - row[j - 1]), abs(t - prev[j - 1]))
                    if j < len(prev):
                        e = max(e, abs(t - prev[j]))
                    if e <= err:
                        best, err = t, e
        else:
            best = v
        rows.append(row)
        est.trace.append((d, best))
        if richardson and len(rows) >= 2 and k + 1 >= min_steps:
            if abs(row[-1] - rows[-2][-1]) >= SAFE * err and k >= 2:
                break
    est.value = best
    est.error = err
    return est


def unbounded(est: NetEstimate, tol: float) -> bool:
    """Raw values growing monotonically in magnitude beyond 1/tol."""
    vals = [abs(v) for _, v in est.raw[-4:]]
    if len(vals) < 3:
        return False
    return all(b > a for a, b in zip(vals, vals[1:])) and vals[-1] > 1.0 / tol


def separation(ests: list[NetEstimate]) -> float:
    vals = [e.value for e in ests if e.value is not None]
    if len(vals) < 2:
        return 0.0
    return max(vals) - min(vals)


def split_pair(ests: list[NetEstimate], tol: float):
    """Two settled families whose limits differ by > 10·tol, or None."""
    for i in range(len(ests)):
        for j in range(i + 1, len(ests)):
            a, b = ests[i], ests[j]
            if a.value is None or b.value is None:
                continue
            gap = abs(a.value - b.value)
            if gap > 10 * tol and max(a.error, b.error) < gap / 10 and _persistent(a, b, 10 * tol):
                return a, b
    return None


def _persistent(a: NetEstimate, b: NetEstimate, gap: float) -> bool:
    n = min(len(a.raw), len(b.raw), 3)
    if n == 0:
        return False
    return all(abs(a.raw[-k][1] - b.raw[-k][1]) > gap for k in range(1, n + 1))
