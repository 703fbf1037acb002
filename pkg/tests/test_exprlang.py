import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from bicalc.core import DomainError
from bicalc.exprlang import (
    Binary, Call, Cond, Number, ParseError, Unary, Var, compile_field, compile_field_n, evaluate,
    parse, to_source, tokenize,
)


def test_parse_shape():
    node = parse("3*x1*x2^2", 2)
    assert isinstance(node, Binary) and node.op == "*"
    assert node.right == Binary("^", Var(2), Number(2.0))
    assert node.left == Binary("*", Number(3.0), Var(1))


def test_parse_cond_node():
    node = parse("if(x1>0, x1^x2 * x2^x1, 0)", 2)
    assert isinstance(node, Cond) and node.cmp == ">"


def test_parse_error_position():
    with pytest.raises(ParseError) as err:
        parse("x1 + + 2", 2)
    assert err.value.position == 5
    assert err.value.found == "'+'"


def test_unknown_variable_and_function():
    with pytest.raises(ParseError) as err:
        parse("x1 + x3", 2)
    assert err.value.position == 5
    with pytest.raises(ParseError):
        parse("foo(x1)", 2)
    with pytest.raises(ParseError):
        parse("pow(x1)", 2)


def test_precedence():
    assert parse("-x1^2") == Unary("neg", Binary("^", Var(1), Number(2.0)))
    assert parse("2^3^2") == Binary("^", Number(2.0), Binary("^", Number(3.0), Number(2.0)))
    assert evaluate(parse("2^-1"), [0, 0]) == 0.5
    assert evaluate(parse("1 - 2 - 3"), [0, 0]) == -4


def test_aliases_and_constants():
    assert parse("x*y") == parse("x1*x2")
    assert parse("u*v") == parse("x1*x2")
    assert evaluate(parse("pi"), [0, 0]) == math.pi
    assert evaluate(parse("e"), [0, 0]) == math.e


def test_tokens_positions_increase():
    toks = tokenize("if(x1 >= 2.5e-3, sin(x2), -1)")
    pos = [t.position for t in toks]
    assert pos == sorted(pos) and len(set(pos)) == len(pos)


def test_evaluate_examples():
    assert evaluate(parse("3*x1*x2^2"), [2, 3]) == 54
    v = evaluate(parse("if(x1>0, x1^x2 * x2^x1, 0)"), [0.5, 0.5])
    assert v == pytest.approx(0.5, rel=1e-15)
    with pytest.raises(DomainError):
        evaluate(parse("ln(x1)"), [-1, 0])


@pytest.mark.parametrize("src,point", [
    ("1/x1", (0, 1)),
    ("(-2)^x2", (0, 0.5)),
    ("sqrt(x1)", (-1, 0)),
    ("exp(x1)", (1000, 0)),
    ("x1^x2", (0, -1)),
])
def test_domain_errors(src, point):
    with pytest.raises(DomainError):
        evaluate(parse(src), list(point))


def test_zero_to_zero_and_integer_powers():
    assert evaluate(parse("x1^x2"), [0, 0]) == 1.0
    assert evaluate(parse("x1^3"), [-2, 0]) == -8.0


def test_cond_short_circuit():
    f = compile_field("if(x1 > 0, 1/x2, 7)")
    assert f(-1, 0) == 7
    vals = f.many(np.array([-1.0, 2.0]), np.array([0.0, 4.0]))
    assert vals.tolist() == [7.0, 0.25]


def test_builtins():
    assert evaluate(parse("min(x1, x2, 3)"), [5, 4]) == 3
    assert evaluate(parse("max(x1, x2)"), [5, 4]) == 5
    assert evaluate(parse("pow(x1, x2)"), [2, 10]) == 1024
    assert evaluate(parse("atan(x1) + abs(x2)"), [1, -2]) == pytest.approx(math.pi / 4 + 2)


def test_vector_matches_scalar():
    f = compile_field("x1^x2 * x2^x1 + sin(x1*x2) - 3/(1 + x1^2)")
    x1 = np.linspace(0.1, 2, 7)[:, None]
    x2 = np.linspace(0.2, 3, 5)[None, :]
    grid = f.many(x1, x2)
    for i in range(7):
        for j in range(5):
            assert grid[i, j] == pytest.approx(f(float(x1[i, 0]), float(x2[0, j])), rel=1e-14)


def test_field_n():
    f = compile_field_n("x1*x2*x3", 3)
    assert f(1, 2, 3) == 6
    with pytest.raises(ParseError):
        compile_field_n("x4", 3)


# random ASTs as the parser produces them (numbers are non-negative literals)
_leaves = st.one_of(st.floats(0, 1e3, allow_nan=False).map(Number),
                    st.integers(1, 2).map(Var))


def _extend(children):
    return st.one_of(
        children.map(lambda c: Unary("neg", c)),
        st.tuples(st.sampled_from("+-*/^"), children, children).map(lambda t: Binary(*t)),
        st.tuples(st.sampled_from(["sin", "exp", "abs"]), children).map(
            lambda t: Call(t[0], (t[1],))),
        st.tuples(children, children).map(lambda t: Call("max", t)),
        st.tuples(st.sampled_from(["<", "<=", ">", ">=", "=="]), children, children, children,
                  children).map(lambda t: Cond(*t)),
    )


asts = st.recursive(_leaves, _extend, max_leaves=12)


@given(asts)
def test_round_trip(node):
    assert parse(to_source(node), 2) == node


@given(asts, st.floats(-3, 3), st.floats(-3, 3))
@settings(max_examples=200)
def test_evaluation_is_total(node, a, b):
    try:
        v = evaluate(node, [a, b])
    except DomainError:
        return
    assert math.isfinite(v)
