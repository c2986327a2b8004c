import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from subdiff_lab import Box, format_function, normalize, parse, parse_box
from subdiff_lab.errors import (NegativeScaleError, NonlinearityError, ParseError,
                                PieceCapExceeded)
from subdiff_lab.instances import random_instance, rng_for
from subdiff_lab.parser import (Abs, Const, FunctionAST, Max, Min, Scale, Sum, Var,
                                evaluate_ast, load_plf, parse_function, save_plf, unparse)
from subdiff_lab.suite import random_ast

from conftest import pl


def pieces(f):
    return [sorted((tuple(p.gradient), p.offset) for p in c.pieces) for c in f.components]


def test_parse_max():
    ast = parse("max(2*x + 1, -x)")
    assert ast.body == Max((Sum((Scale(2.0, Var(1)), Const(1.0))), Scale(-1.0, Var(1))))
    assert pieces(normalize(ast)) == [[((-1.0,), 0.0), ((2.0,), 1.0)]]


def test_parse_min_of_abs():
    f = parse_function("min(abs(x - 1), abs(x + 1))")
    assert len(f.components) == 2 and f.n_pieces == 4
    assert f(0) == 1 and f(1) == 0


def test_sum_of_abs_distributes():
    f = parse_function("abs(x1) + abs(x2)")
    assert f.is_convex and f.n_pieces == 4
    assert {tuple(p.gradient) for p in f.components[0].pieces} == {
        (1, 1), (1, -1), (-1, 1), (-1, -1)}


def test_positive_scale_and_min():
    assert pieces(parse_function("2 * max(x, -x)")) == [[((-2.0,), 0.0), ((2.0,), 0.0)]]
    f = parse_function("min(x, -x)")
    assert [len(c.pieces) for c in f.components] == [1, 1]


def test_variables_and_box():
    ast = parse("max(x, y) on box(-1,1; -2, 2)")
    assert ast.dim == 2 and ast.box == ((-1, 1), (-2, 2))
    assert parse("x3").dim == 3
    f = parse_function("max(x,-x) on box(-1,1)")
    assert f.domain == Box((-1,), (1,)) and f(2) == math.inf


def test_nonlinearity_error():
    with pytest.raises(NonlinearityError) as e:
        parse("x * y")
    assert (e.value.line, e.value.column) == (1, 3)


def test_negative_scale_error():
    with pytest.raises(NegativeScaleError):
        parse("-max(x, 1)")
    with pytest.raises(NegativeScaleError):
        parse("1 - min(x, 2)")
    with pytest.raises(NegativeScaleError):
        parse("-2 * abs(x)")


def test_syntax_error_position():
    with pytest.raises(ParseError) as e:
        parse("max(x,\n  1))")
    assert (e.value.line, e.value.column) == (2, 5)
    with pytest.raises(ParseError):
        parse("max(x,, 1)")
    with pytest.raises(ParseError):
        parse("x / 2")
    with pytest.raises(ParseError):
        parse("sin(x)")
    with pytest.raises(ParseError):
        parse("abs(max(x, 1))")


def test_piece_cap():
    text = " + ".join(f"abs(x1 + {k}*x2 + {k * k})" for k in range(1, 14))
    with pytest.raises(PieceCapExceeded):
        parse_function(text)


def test_format_examples(absf):
    assert format_function(absf) == "max(1*x + 0, -1*x + 0)"
    assert format_function(absf.with_domain(Box((-1,), (1,)))) == \
        "max(1*x + 0, -1*x + 0) on box(-1,1)"


def test_format_round_trip_2d():
    f = pl([((1, 1), 0), ((1, -1), 0.5), ((-1, 1), -0.25), ((-1, -1), 0)])
    g = parse_function(format_function(f))
    P = rng_for(3).uniform(-2, 2, (1000, 2))
    assert np.array_equal(f.values(P), g.values(P))


def test_parse_box_flag():
    assert parse_box("box(-1, 1; 0, 2.5)") == Box((-1, 0), (1, 2.5))
    with pytest.raises(ParseError):
        parse_box("box(-1, inf)")
    with pytest.raises(ParseError):
        parse_box("box(1, -1)")


def test_plf_file(tmp_path, kinked):
    path = tmp_path / "f.plf"
    save_plf(kinked, path)
    assert load_plf(path)(0.25) == kinked(0.25)
    assert parse_function(f"@{path}")(-1) == kinked(-1)


def test_unparse_reparses():
    ast = FunctionAST(Min((Abs(Sum((Var(1), Const(-1.0)))), Scale(2.0, Var(2)))), None, 2)
    assert parse(unparse(ast)) is not None
    x = [0.3, -0.7]
    assert evaluate_ast(parse(unparse(ast)), x) == evaluate_ast(ast, x)


@settings(max_examples=60, deadline=None)
@given(seed=st.integers(0, 100_000), dim=st.integers(1, 3))
def test_normalization_sound(seed, dim):
    rng = rng_for(seed)
    ast = FunctionAST(random_ast(rng, dim), None, dim)
    f = normalize(ast)
    P = rng.uniform(-2, 2, (200, dim))
    direct = np.array([evaluate_ast(ast, p) for p in P])
    assert np.allclose(f.values(P), direct, rtol=0, atol=1e-12 * (1 + np.abs(direct).max()))


@settings(max_examples=60, deadline=None)
@given(seed=st.integers(0, 100_000), dim=st.integers(1, 3), convex=st.booleans())
def test_format_round_trip_random(seed, dim, convex):
    rng = rng_for(seed)
    f = random_instance(rng, dim, convex, int(rng.integers(2, 8)))
    g = parse_function(format_function(f))
    P = rng.uniform(-3, 3, (300, dim))
    assert np.array_equal(f.values(P), g.values(P))
