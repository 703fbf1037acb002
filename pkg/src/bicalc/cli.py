"""Command-line interface: one operation per invocation, one JSON document on stdout.

Exit codes: 0 when a verdict was computed (divergent included), 1 for usage
errors, 2 for expression parse errors, 3 for numerical failures (and, with
``--strict``, for inconclusive verdicts).
"""
from __future__ import annotations

import argparse
import dataclasses
import enum
import json
import logging
import math
import re
import sys
import time
from typing import Any, Optional

from . import derivative as dv
from . import difference as df
from . import integral as ig
from .core import (
    BicalcError, ConvergenceError, DegenerateError, DomainError, EstimateReport, ExtendedPoint2,
    HypothesisError, Interval2, NoBracketError, Point2, QuadrantSign, ScalarField2, ScalarFieldN,
)
from .exprlang import ParseError, compile_field, compile_field_n
from .verify import SUITES, verify

EXIT_OK, EXIT_USAGE, EXIT_PARSE, EXIT_NUMERIC = 0, 1, 2, 3
NUMERIC_ERRORS = (DomainError, ConvergenceError, HypothesisError, NoBracketError, DegenerateError)

log = logging.getLogger("bicalc")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


# ------------------------------------------------------------------ parsing

_NUM = r"\s*([+-]?(?:inf|infinity|[0-9.]+(?:e[+-]?\d+)?))\s*"
_INTERVAL = re.compile(rf"^\s*([\[(]){_NUM},{_NUM}([\])])\s*[x×]\s*([\[(]){_NUM},{_NUM}([\])])\s*$",
                       re.IGNORECASE)


def parse_reals(text: str) -> list[float]:
    try:
        return [float(t) for t in text.split(",")]
    except ValueError:
        raise UsageError(f"not a comma-separated list of reals: {text!r}") from None


def parse_point(text: str, extended: bool = False):
    vals = parse_reals(text)
    if len(vals) != 2:
        raise UsageError(f"a point needs two coordinates, got {text!r}")
    if any(math.isnan(v) for v in vals) or (not extended and any(math.isinf(v) for v in vals)):
        raise UsageError(f"invalid point {text!r}")
    return ExtendedPoint2(*vals) if extended else Point2(*vals)


def parse_interval(text: str) -> Interval2:
    m = _INTERVAL.match(text)
    if not m:
        raise UsageError(f"interval must look like [a1,b1]x[a2,b2] (parentheses for open edges), "
                         f"got {text!r}")
    l1, a1, b1, r1, l2, a2, b2, r2 = m.groups()
    try:
        return Interval2(ExtendedPoint2(float(a1), float(a2)), ExtendedPoint2(float(b1), float(b2)),
                         (l1 == "[", r1 == "]", l2 == "[", r2 == "]"))
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def parse_sign(text: Optional[str]) -> Optional[QuadrantSign]:
    if text is None:
        return None
    try:
        return QuadrantSign.parse(text)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _join_negative_values(argv: list[str]) -> list[str]:
    """Let ``-a -1,2`` mean ``-a=-1,2``: argparse would read -1,2 as an option."""
    out: list[str] = []
    for tok in argv:
        if (out and re.match(r"^-(\d|\.\d|inf)", tok, re.IGNORECASE) and out[-1].startswith("-")
                and "=" not in out[-1] and not re.match(r"^-(\d|\.\d)", out[-1])):
            out[-1] = f"{out[-1]}={tok}"
        else:
            out.append(tok)
    return out


# ------------------------------------------------------------------ output


def to_json(obj: Any) -> Any:
    """Convert results to JSON-safe values; non-finite floats become strings."""
    if isinstance(obj, bool) or obj is None or isinstance(obj, (str, int)):
        return obj
    if isinstance(obj, float):
        if math.isfinite(obj):
            return obj
        return "nan" if math.isnan(obj) else ("inf" if obj > 0 else "-inf")
    if isinstance(obj, (Point2, ExtendedPoint2)):
        return [to_json(obj.x1), to_json(obj.x2)]
    if isinstance(obj, QuadrantSign):
        return obj.label
    if isinstance(obj, enum.Enum):
        return to_json(obj.value)
    if isinstance(obj, Interval2):
        return obj.describe()
    if isinstance(obj, (ScalarField2, ScalarFieldN)):
        return obj.label
    if isinstance(obj, dict):
        return {str(k): to_json(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_json(v) for v in obj]
    if dataclasses.is_dataclass(obj):
        return {f.name: to_json(getattr(obj, f.name)) for f in dataclasses.fields(obj)}
    if hasattr(obj, "item"):
        return to_json(obj.item())
    return str(obj)


def _report_result(rep: EstimateReport) -> tuple[dict, str, list]:
    res = {"value": rep.value, "residual": rep.residual, "evaluations": rep.evaluations}
    if rep.message:
        res["message"] = rep.message
    if rep.details:
        res["details"] = rep.details
    return res, str(rep.verdict), rep.trace


# ------------------------------------------------------------------ commands


def _field(args, name: str = "f", hint: Optional[Interval2] = None) -> ScalarField2:
    return compile_field(getattr(args, name), domain_hint=hint)


def cmd_eval(a):
    f = _field(a)
    p = parse_point(a.a)
    return {"value": f(p.x1, p.x2)}, "ok", None


def cmd_delta(a):
    return {"value": df.delta2(_field(a), parse_point(a.a), parse_point(a.b))}, "ok", None


def cmd_delta_n(a):
    f = compile_field_n(a.f, a.arity)
    lo, hi = parse_reals(a.a), parse_reals(a.b)
    if len(lo) != a.arity or len(hi) != a.arity:
        raise UsageError(f"points need {a.arity} coordinates")
    return {"value": df.delta_n(f, lo, hi)}, "ok", None


def cmd_slope(a):
    return {"value": df.mean_slope(_field(a), parse_point(a.a), parse_point(a.b))}, "ok", None


def cmd_deriv(a):
    est = dv.double_derivative(_field(a), parse_point(a.a), parse_sign(a.sign), a.steps or 20,
                               a.tol)
    res, verdict, trace = _report_result(est.report)
    res["sign"] = est.sign
    res["first_order_residual"] = est.first_order_residual
    return res, verdict, trace


def cmd_limit(a):
    sign = parse_sign(a.sign or "++")
    rep = dv.double_limit(_field(a, "g"), parse_point(a.a, extended=True), sign, a.steps or 30,
                          a.tol)
    return _report_result(rep)


def cmd_schwarz(a):
    mp = dv.mixed_partials_check(_field(a), parse_point(a.a), a.h0, a.steps or 20, a.tol)
    return mp._asdict(), "agree" if mp.agree else "disagree", None


def cmd_continuity(a):
    rep = df.continuity_probe(_field(a), parse_point(a.a), parse_sign(a.sign), a.sweep,
                              a.steps or df.DEFAULT_SHRINK_STEPS, a.tol,
                              span=parse_point(a.span) if a.span else None)
    return to_json(rep), rep.verdict, None


def cmd_global_continuity(a):
    i = parse_interval(a.interval)
    rep = df.global_continuity_probe(_field(a, hint=i), i, a.grid,
                                     a.steps or df.DEFAULT_SHRINK_STEPS, a.tol)
    return to_json(rep), rep.verdict, None


def cmd_double_constant(a):
    i = parse_interval(a.interval)
    ok = df.is_double_constant(_field(a, hint=i), i, a.grid, a.tol)
    return {"double_constant": ok}, "pass" if ok else "fail", None


def cmd_split(a):
    i = parse_interval(a.interval)
    f = _field(a, hint=i)
    dec = df.split_double_constant(f, i, parse_point(a.anchor))
    dev = dec.lattice_deviation(i, a.grid)
    return ({"anchor": dec.base, "g": f"f(x1, {dec.base.x2!r})",
             "h": f"f({dec.base.x1!r}, x2) - f({dec.base.x1!r}, {dec.base.x2!r})",
             "lattice_deviation": dev}, "pass" if dev <= a.tol else "fail", None)


def cmd_intermediate(a):
    i = parse_interval(a.interval)
    f = _field(a, hint=i)
    c = dv.intermediate_point(f, i, a.d, a.tol)
    return {"c": c, "value": f(c.x1, c.x2)}, "ok", None


def _mv(r: dv.MeanValueResult):
    return ({"c": r.c, "target": r.target, "achieved": r.achieved, "residual": r.residual,
             "halvings": r.halvings}, "ok", [(k, p, v) for k, (p, v) in enumerate(r.trace)])


def cmd_rolle(a):
    i = parse_interval(a.interval)
    return _mv(dv.rolle_solve(_field(a, hint=i), i, a.tol, a.max_halvings))


def cmd_mvt(a):
    i = parse_interval(a.interval)
    return _mv(dv.mvt_solve(_field(a, hint=i), i, a.tol, a.max_halvings))


def cmd_cauchy_mvt(a):
    i = parse_interval(a.interval)
    r = dv.cauchy_mvt_solve(_field(a, hint=i), _field(a, "g", i), i, a.tol, a.max_halvings)
    return r._asdict(), "ok", None


def cmd_classify(a):
    i = parse_interval(a.interval)
    return {"classification": dv.monotonicity_classify(_field(a, hint=i), i, a.grid, a.tol)}, \
        "ok", None


def cmd_stationary(a):
    i = parse_interval(a.interval)
    cls = dv.classify_stationary(_field(a, hint=i), parse_point(a.c), i, a.samples, a.tol)
    return {"classification": cls}, "ok", None


def cmd_critical(a):
    i = parse_interval(a.interval)
    pts = dv.critical_points(_field(a, hint=i), i, a.grid, a.tol)
    return {"points": pts}, "ok", None


def cmd_newton_int(a):
    return {"value": ig.newton_integral(_field(a, "F"), parse_point(a.a), parse_point(a.b))}, \
        "ok", None


def _riemann_cfg(a) -> ig.RiemannConfig:
    try:
        return ig.RiemannConfig(a.m, a.n, a.max_refinements, a.tol, a.rule, a.seed, a.extrapolate)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def cmd_riemann_int(a):
    i = parse_interval(a.interval)
    return _report_result(ig.riemann_integral(_field(a, hint=i), i, _riemann_cfg(a)))


def cmd_integral_mean(a):
    i = parse_interval(a.interval)
    return _mv(ig.integral_mean_point(_field(a, hint=i), _field(a, "F", i), i, a.tol))


def cmd_ftc1(a):
    i = parse_interval(a.interval)
    r = ig.ftc1_check(_field(a, hint=i), i, a.points, a.tol)
    rows = [{"point": p, "sign": s, "G_prime": g, "f": fv, "residual": res}
            for p, s, g, fv, res in r.points]
    return {"holds": r.ok, "checks": rows, "diagnostic": r.diagnostic}, \
        "pass" if r.ok else "fail", None


def cmd_ftc2(a):
    i = parse_interval(a.interval)
    r = ig.ftc2_check(_field(a, hint=i), _field(a, "F", i), i, _riemann_cfg(a))
    return r._asdict(), "agree" if r.agree else "disagree", None


def _improper(v) -> tuple[dict, str, list]:
    res: dict = {"diagnostic": v.diagnostic}
    if isinstance(v, ig.Convergent):
        res["value"] = v.value
        if v.corner_limits is not None:
            res["corner_limits"] = dict(zip("ABCD", v.corner_limits))
    elif isinstance(v, ig.Divergent):
        res["witnesses"] = [{"family": list(fam), "limit": lim} for fam, lim in v.witnesses]
    return res, v.kind, v.trace


def cmd_improper(a):
    i = parse_interval(a.interval)
    return _improper(ig.improper_newton_integral(_field(a, "F"), i, a.steps or 30, a.tol))


def cmd_cov(a):
    i = parse_interval(a.interval)
    jac = ig.Jacobian.analytic(compile_field(a.jacobian)) if a.jacobian \
        else ig.Jacobian.finite_difference(a.fd_step)
    mapping = ig.CovSpec((compile_field(a.h1), compile_field(a.h2)), jac, i)
    G = compile_field(a.G) if a.G else None
    return _improper(ig.change_of_variables_integral(_field(a), mapping, G, a.steps or 30, a.tol))


def cmd_verify(a):
    s = verify(a.suite, a.seed, a.tol)
    return s.as_dict(), "pass" if s.failures == 0 else "fail", None


# ------------------------------------------------------------------ parser


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="bicalc", description="Double differences, derivatives and integrals.")
    p.add_argument("--tol", type=float, default=1e-6, help="tolerance (default 1e-6)")
    p.add_argument("--steps", type=int, default=None, help="bound on every iterative net")
    p.add_argument("--strict", action="store_true",
                   help="exit 3 on inconclusive or non-converged verdicts")
    p.add_argument("-v", "--verbose", action="store_true", help="diagnostics on stderr")
    sub = p.add_subparsers(dest="command", metavar="COMMAND", parser_class=_Parser)

    def add(name, fn, help_, *fields):
        sp = sub.add_parser(name, help=help_)
        for flag in fields:
            if flag == "f":
                sp.add_argument("-f", required=True, help="field expression in x1, x2")
            elif flag == "F":
                sp.add_argument("-F", required=True, help="double primitive expression")
            elif flag == "g":
                sp.add_argument("-g", required=True, help="second field expression")
            elif flag == "a":
                sp.add_argument("-a", required=True, help="point r1,r2")
            elif flag == "b":
                sp.add_argument("-b", required=True, help="point r1,r2")
            elif flag == "interval":
                sp.add_argument("--interval", "-i", required=True, help="[a1,b1]x[a2,b2]")
            elif flag == "sign":
                sp.add_argument("--sign", help="quadrant sign: ++, +-, -+ or --")
            elif flag == "grid":
                sp.add_argument("--grid", type=int, default=8)
            elif flag == "halvings":
                sp.add_argument("--max-halvings", type=int, default=40)
            elif flag == "riemann":
                sp.add_argument("--m", type=int, default=1)
                sp.add_argument("--n", type=int, default=1)
                sp.add_argument("--max-refinements", type=int, default=12)
                sp.add_argument("--rule", default="midpoint", choices=ig.SAMPLE_RULES)
                sp.add_argument("--seed", type=int, default=None)
                sp.add_argument("--extrapolate", action="store_true")
        sp.set_defaults(func=fn)
        return sp

    add("eval", cmd_eval, "evaluate f at a point", "f", "a")
    add("delta", cmd_delta, "double difference of f from a to b", "f", "a", "b")
    sp = add("delta-n", cmd_delta_n, "n-fold difference", "f", "a", "b")
    sp.add_argument("--arity", type=int, default=2)
    add("slope", cmd_slope, "double mean slope", "f", "a", "b")
    add("deriv", cmd_deriv, "double derivative (optionally signed)", "f", "a", "sign")
    add("limit", cmd_limit, "signed double limit of g toward a", "g", "a", "sign")
    sp = add("schwarz", cmd_schwarz, "compare f12, f21 and the double derivative", "f", "a")
    sp.add_argument("--h0", type=float, default=0.1)
    sp = add("continuity", cmd_continuity, "sampled double continuity at a", "f", "a", "sign")
    sp.add_argument("--sweep", type=int, default=8)
    sp.add_argument("--span", help="probe span s1,s2 (defaults to 1,1)")
    sp = add("global-continuity", cmd_global_continuity, "sampled global double continuity",
             "f", "interval")
    sp.add_argument("--grid", type=int, default=5)
    sp = add("double-constant", cmd_double_constant, "lattice test for Δ = 0", "f", "interval")
    sp.add_argument("--grid", type=int, default=9)
    sp = add("split", cmd_split, "split a double constant into g(x1) + h(x2)", "f", "interval")
    sp.add_argument("--anchor", required=True)
    sp.add_argument("--grid", type=int, default=9)
    sp = add("intermediate", cmd_intermediate, "point with f(c) = d", "f", "interval")
    sp.add_argument("-d", type=float, required=True)
    add("rolle", cmd_rolle, "double Rolle point", "f", "interval", "halvings")
    add("mvt", cmd_mvt, "double mean value point", "f", "interval", "halvings")
    add("cauchy-mvt", cmd_cauchy_mvt, "double Cauchy mean value point", "f", "g", "interval",
        "halvings")
    sp = add("classify", cmd_classify, "double monotonicity on an interval", "f", "interval")
    sp.add_argument("--grid", type=int, default=5)
    sp = add("stationary", cmd_stationary, "first derivative test at a stationary point",
             "f", "interval")
    sp.add_argument("-c", required=True, help="stationary point r1,r2")
    sp.add_argument("--samples", type=int, default=16)
    add("critical", cmd_critical, "double critical points", "f", "interval", "grid")
    add("newton-int", cmd_newton_int, "double Newton integral Δ_a^b(F)", "F", "a", "b")
    add("riemann-int", cmd_riemann_int, "double Riemann integral", "f", "interval", "riemann")
    add("integral-mean", cmd_integral_mean, "point where f equals its mean", "f", "F", "interval")
    sp = add("ftc1", cmd_ftc1, "check that the accumulated integral differentiates to f",
             "f", "interval")
    sp.add_argument("--points", type=int, default=5)
    add("ftc2", cmd_ftc2, "compare Riemann and Newton integrals", "f", "F", "interval", "riemann")
    add("improper", cmd_improper, "improper double Newton integral", "F", "interval")
    sp = add("cov", cmd_cov, "integral by change of variables", "f", "interval")
    sp.add_argument("--h1", required=True, help="first component of h(u, v)")
    sp.add_argument("--h2", required=True, help="second component of h(u, v)")
    sp.add_argument("--jacobian", help="analytic Jacobian determinant in u, v")
    sp.add_argument("--fd-step", type=float, default=1e-5)
    sp.add_argument("-G", help="double primitive of the pulled-back integrand")
    sp = add("verify", cmd_verify, "run the property suites")
    sp.add_argument("--suite", default="all", choices=("all",) + SUITES)
    sp.add_argument("--seed", type=int, default=0)
    return p


_UNSETTLED = {"inconclusive", "diverged", "fail", "disagree"}


def run(argv: list[str]) -> tuple[int, dict]:
    """Execute one command; returns (exit code, JSON report)."""
    start = time.perf_counter()
    report: dict = {"command": None, "inputs": None, "result": None, "verdict": None,
                    "trace": None, "error": None, "elapsed_s": None}
    code = EXIT_OK
    try:
        args = build_parser().parse_args(_join_negative_values(argv))
        if args.command is None:
            raise UsageError("no command given")
        logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                            stream=sys.stderr)
        report["command"] = args.command
        report["inputs"] = {k: v for k, v in sorted(vars(args).items())
                            if k not in ("func", "command", "verbose")}
        result, verdict, trace = args.func(args)
        report["result"], report["verdict"], report["trace"] = result, verdict, trace
        if args.strict and verdict in _UNSETTLED and args.command != "verify":
            code = EXIT_NUMERIC
    except UsageError as exc:
        code = EXIT_USAGE
        report["error"] = {"kind": "usage", "message": str(exc), "position": None}
    except ParseError as exc:
        code = EXIT_PARSE
        report["error"] = {"kind": "parse", "message": str(exc), "position": exc.position}
    except NUMERIC_ERRORS as exc:
        code = EXIT_NUMERIC
        report["error"] = {"kind": type(exc).__name__, "message": str(exc), "position": None}
    except (BicalcError, ValueError) as exc:
        code = EXIT_USAGE
        report["error"] = {"kind": type(exc).__name__, "message": str(exc), "position": None}
    if report["command"] == "verify" and report["result"] and report["result"]["failures"]:
        code = EXIT_NUMERIC
    report["elapsed_s"] = round(time.perf_counter() - start, 6)
    return code, to_json(report)


def main(argv: Optional[list[str]] = None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    if argv and argv[0] in ("-h", "--help"):
        build_parser().print_help()
        return EXIT_OK
    code, report = run(argv)
    json.dump(report, sys.stdout, indent=2, allow_nan=False)
    sys.stdout.write("\n")
    return code


if __name__ == "__main__":
    sys.exit(main())
