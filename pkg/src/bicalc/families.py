"""Seeded random function families, written as expression sources.

Every generator takes a ``numpy.random.Generator`` and returns source text
(or a tuple of sources) that ``compile_field`` accepts, so that a failing
trial can be replayed from its printed form.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np


def _c(rng: np.random.Generator, lo: float = -2.0, hi: float = 2.0) -> str:
    v = round(float(rng.uniform(lo, hi)), 3)
    return f"({v!r})"


def polynomial(rng: np.random.Generator, degree: int = 3) -> str:
    """Random polynomial with mixed terms up to ``degree`` in each variable."""
    terms = []
    for i in range(degree + 1):
        for j in range(degree + 1 - i):
            if rng.random() < 0.6 or (i, j) == (1, 1):
                terms.append(f"{_c(rng)}*x1^{i}*x2^{j}")
    return " + ".join(terms)


def trigonometric(rng: np.random.Generator, terms: int = 3) -> str:
    """Random trigonometric polynomial in x1, x2 with small integer frequencies."""
    out = []
    for _ in range(terms):
        p, q = (int(k) for k in rng.integers(0, 3, size=2))
        fn = ("sin", "cos")[int(rng.integers(0, 2))]
        out.append(f"{_c(rng)}*{fn}({p}*x1 + {q}*x2)")
    out.append(f"{_c(rng)}*sin(x1)*cos(x2)")
    return " + ".join(out)


def smooth(rng: np.random.Generator) -> str:
    """A smooth field mixing polynomial, trigonometric and exponential parts."""
    kind = int(rng.integers(0, 3))
    if kind == 0:
        return polynomial(rng)
    if kind == 1:
        return trigonometric(rng)
    return f"exp({_c(rng, -1, 1)}*x1*x2) + {_c(rng)}*sin(x1 + {_c(rng, -1, 1)}*x2^2)"


def _univariate(rng: np.random.Generator, var: str, jumps: bool) -> str:
    pieces = [f"{_c(rng)}*{var}^2", f"{_c(rng)}*sin({_c(rng, 0.5, 3)}*{var})"]
    if jumps:
        cut = round(float(rng.uniform(-0.8, 0.8)), 3)
        pieces.append(f"if({var} > {cut!r}, {_c(rng, 1, 5)}, 0)")
    if rng.random() < 0.5:
        pieces.append(f"abs({var} - {_c(rng, -1, 1)})")
    return " + ".join(pieces)


def separable(rng: np.random.Generator, discontinuous: bool = True) -> tuple[str, str, str]:
    """f = g(x1) + h(x2); h carries a jump when ``discontinuous``. Returns (f, g, h)."""
    g = _univariate(rng, "x1", False)
    h = _univariate(rng, "x2", discontinuous)
    return f"({g}) + ({h})", g, h


@dataclass(frozen=True)
class Piecewise:
    source: str
    corner: tuple[float, float]
    slopes: dict          # quadrant label -> signed double derivative at the corner


def piecewise_quadrant(rng: np.random.Generator) -> Piecewise:
    """D_q·(x1−c1)(x2−c2) on each quadrant q around c, plus a shared separable part.

    The signed double derivative at c from quadrant q is exactly D_q.
    """
    c1, c2 = (round(float(v), 3) for v in rng.uniform(-0.5, 0.5, size=2))
    d = {q: round(float(rng.uniform(-3, 3)), 3) for q in ("++", "+-", "-+", "--")}
    prod = f"(x1 - ({c1!r}))*(x2 - ({c2!r}))"
    src = (f"if(x1 >= {c1!r}, if(x2 >= {c2!r}, ({d['++']!r})*{prod}, ({d['+-']!r})*{prod}), "
           f"if(x2 >= {c2!r}, ({d['-+']!r})*{prod}, ({d['--']!r})*{prod})) "
           f"+ {_c(rng)}*x1^2 + cos(x2)")
    return Piecewise(src, (c1, c2), d)


def primitive_pair(rng: np.random.Generator) -> tuple[str, str]:
    """(f, F) with F a double primitive of f, i.e. the mixed partial of F is f."""
    f_terms, F_terms = [], []
    p, q = (int(k) for k in rng.integers(1, 4, size=2))
    a = _c(rng)
    F_terms.append(f"{a}*x1^{p}*x2^{q}")
    f_terms.append(f"{a}*{p * q}*x1^{p - 1}*x2^{q - 1}")
    s, t = _c(rng, 0.5, 2), _c(rng, 0.5, 2)
    b = _c(rng)
    F_terms.append(f"{b}*sin({s}*x1)*cos({t}*x2)")
    f_terms.append(f"-{b}*{s}*{t}*cos({s}*x1)*sin({t}*x2)")
    u, v = _c(rng, -1, 1), _c(rng, -1, 1)
    e = _c(rng)
    F_terms.append(f"{e}*exp({u}*x1 + {v}*x2)")
    f_terms.append(f"{e}*{u}*{v}*exp({u}*x1 + {v}*x2)")
    # a separable part changes F but not f
    F_terms.append(f"{_c(rng)}*x1^3 + cos({_c(rng)}*x2)")
    return " + ".join(f_terms), " + ".join(F_terms)


def random_points(rng: np.random.Generator, n: int, lo: float = -1.0, hi: float = 1.0):
    return [tuple(float(v) for v in rng.uniform(lo, hi, size=2)) for _ in range(n)]


def random_box(rng: np.random.Generator, lo: float = -1.0, hi: float = 1.0,
               min_side: float = 0.05):
    """Random a < b (componentwise) inside [lo, hi]²."""
    while True:
        x = np.sort(rng.uniform(lo, hi, size=(2, 2)), axis=1)
        if np.all(x[:, 1] - x[:, 0] >= min_side):
            return (float(x[0, 0]), float(x[1, 0])), (float(x[0, 1]), float(x[1, 1]))
