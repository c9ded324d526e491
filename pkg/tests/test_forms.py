import math
import random

import pytest
import sympy
from hypothesis import given, settings
from hypothesis import strategies as st

from weylforms.forms import (Box, Form, FormSyntaxError, FormSystem, bilinear_family,
                             components, evaluate, format_form, format_system, gradient,
                             multilinear_basis_row, parse_form, parse_fraction, parse_system,
                             partial, pencil_form, polarize, restrict)

from conftest import forms, random_form, vectors


def sym_polarize(f: Form, xs):
    """d-th mixed derivative of f(t1 x1 + ... + td xd) in t1..td, by sympy."""
    t = sympy.symbols(f"t0:{f.degree}")
    point = [sum(t[i] * xs[i][k] for i in range(f.degree)) for k in range(f.n_vars)]
    expr = sum(c * sympy.prod([point[k] ** e[k] for k in range(f.n_vars)])
               for e, c in f.items())
    return int(sympy.diff(sympy.expand(expr), *t))


# parsing --------------------------------------------------------------

def test_parse_difference_of_squares():
    f = parse_form("x1^2 - x2^2", 2)
    assert f.degree == 2
    assert f.terms == {(2, 0): 1, (0, 2): -1}


def test_parse_bilinear_instance_matches_family():
    # x1*y11 + x2*y21 renamed to x1..x4 with y11 -> x3, y21 -> x4
    f = parse_form("x1*x3 + x2*x4", 4)
    assert FormSystem([f]) == bilinear_family(1, 2)


@pytest.mark.parametrize("text", ["x1^2 + x2", "x1 + 1", "3"])
def test_parse_rejects_inhomogeneous(text):
    with pytest.raises(FormSyntaxError):
        parse_form(text, 2)


@pytest.mark.parametrize("text", ["x3^2", "x0^2", "x1^^2", "x1 x2", "", "x1^2 +"])
def test_parse_rejects_malformed(text):
    with pytest.raises(FormSyntaxError):
        parse_form(text, 2)


def test_parse_collects_and_cancels_terms():
    assert parse_form("x1*x2 + 2*x2*x1", 2).terms == {(1, 1): 3}
    with pytest.raises(FormSyntaxError):
        parse_form("x1^2 - x1^2", 1)


@given(forms())
@settings(max_examples=60, deadline=None)
def test_format_parse_round_trip(f):
    assert parse_form(format_form(f), f.n_vars) == f


def test_system_file_round_trip():
    text = "# comment\nn=3 d=2 r=2\nx1^2 + x2*x3\nx3^2 - 2*x1*x2\n"
    s = parse_system(text)
    assert (s.n_vars, s.degree, s.r) == (3, 2, 2)
    assert parse_system(format_system(s)) == s


def test_system_header_mismatch():
    with pytest.raises(ValueError):
        parse_system("n=2 d=2 r=2\nx1^2\n")
    with pytest.raises(ValueError):
        parse_system("n=2 d=3 r=1\nx1^2\n")


def test_parse_fraction_rejects_decimals():
    assert parse_fraction("-3/6") == parse_fraction("-1/2")
    with pytest.raises(ValueError):
        parse_fraction("0.5")


# evaluation -------------------------------------------------------------

@pytest.mark.parametrize("text,n,x,val", [
    ("x1^2 - x2^2", 2, (3, 3), 0),
    ("x1^2 - x2^2", 2, (5, 4), 9),
    ("x1*x2*x3", 3, (2, 3, -1), -6),
])
def test_evaluate(text, n, x, val):
    assert evaluate(parse_form(text, n), x) == val


def test_evaluate_checks_dimension():
    with pytest.raises(ValueError):
        evaluate(parse_form("x1^2", 1), (1, 2))


def test_gradient_examples():
    assert gradient(parse_form("x1^2 - x2^2", 2), (1, 2)) == [2, -4]
    assert gradient(parse_form("x1*x2*x3", 3), (1, 1, 1)) == [1, 1, 1]


@given(forms(), st.data())
@settings(max_examples=80, deadline=None)
def test_euler_relation(f, data):
    # sum_j x_j d_j f(x) = d f(x)
    x = data.draw(vectors(f.n_vars))
    assert sum(a * g for a, g in zip(x, gradient(f, x))) == f.degree * evaluate(f, x)


@given(forms(max_d=4))
@settings(max_examples=40, deadline=None)
def test_gradient_vanishes_at_origin(f):
    if f.degree >= 2:
        assert gradient(f, [0] * f.n_vars) == [0] * f.n_vars


# pencils ---------------------------------------------------------------

def test_pencil_examples():
    s = FormSystem([parse_form("x1^2", 2), parse_form("x2^2", 2)])
    assert pencil_form(s, (1, -1)) == parse_form("x1^2 - x2^2", 2)
    same = FormSystem([parse_form("x1*x2", 2)] * 2)
    assert pencil_form(same, (1, -1)).is_zero()
    q = bilinear_family(2, 2)
    assert pencil_form(q, (0, 1)) == q[1]
    with pytest.raises(ValueError):
        pencil_form(s, (0, 0))


@given(st.data())
@settings(max_examples=40, deadline=None)
def test_pencil_linearity(data):
    rng = random.Random(data.draw(st.integers(0, 10 ** 6)))
    n, d = rng.randint(1, 4), rng.randint(1, 3)
    s = FormSystem([random_form(rng, n, d) for _ in range(3)])
    b = data.draw(vectors(3, 4).filter(any))
    x = data.draw(vectors(n))
    assert evaluate(pencil_form(s, b), x) == sum(bi * v for bi, v in zip(b, s.evaluate(x)))


# polarization -----------------------------------------------------------

def test_polarize_examples():
    assert polarize(parse_form("x1*x2", 2), [(1, 0), (0, 1)]) == 1
    for c in range(-4, 5):
        assert polarize(parse_form("x1^2", 1), [(c,), (c,)]) == 2 * c * c
    assert polarize(parse_form("x1^2*x2", 2), [(1, 0), (1, 0), (0, 1)]) == 2


def test_multilinear_basis_row_examples():
    sq = FormSystem([parse_form("x1^2", 1)])
    for c in range(-3, 4):
        assert multilinear_basis_row(sq, 0, 0, [(c,)]) == 2 * c
    s = FormSystem([parse_form("x1*x2", 2)])
    assert multilinear_basis_row(s, 0, 0, [(5, 7)]) == 7
    assert multilinear_basis_row(s, 0, 1, [(5, 7)]) == 5
    with pytest.raises(IndexError):
        multilinear_basis_row(s, 0, 2, [(5, 7)])


@given(forms(), st.data())
@settings(max_examples=60, deadline=None)
def test_polarize_diagonal(f, data):
    x = data.draw(vectors(f.n_vars))
    assert polarize(f, [x] * f.degree) == math.factorial(f.degree) * evaluate(f, x)


@given(forms(max_n=3, max_d=3), st.data())
@settings(max_examples=25, deadline=None)
def test_polarize_matches_symbolic_oracle(f, data):
    xs = [data.draw(vectors(f.n_vars, 4)) for _ in range(f.degree)]
    assert polarize(f, xs) == sym_polarize(f, xs)


@given(forms(max_d=3), st.data())
@settings(max_examples=40, deadline=None)
def test_polarize_first_slot_is_derivative(f, data):
    # Gamma_f(e_j, y2, ..., yd) = Gamma_{d_j f}(y2, ..., yd)
    if f.degree < 2:
        return
    j = data.draw(st.integers(0, f.n_vars - 1))
    ys = [data.draw(vectors(f.n_vars)) for _ in range(f.degree - 1)]
    e = [0] * f.n_vars
    e[j] = 1
    df = partial(f, j)
    expected = 0 if df.is_zero() else polarize(df, ys)
    assert polarize(f, [e, *ys]) == expected


@given(forms(max_d=3), st.data())
@settings(max_examples=40, deadline=None)
def test_polarize_is_additive_in_first_slot(f, data):
    xs = [data.draw(vectors(f.n_vars)) for _ in range(f.degree)]
    y = data.draw(vectors(f.n_vars))
    c = data.draw(st.integers(-3, 3))
    z = [c * a + b for a, b in zip(xs[0], y)]
    assert polarize(f, [z, *xs[1:]]) == c * polarize(f, xs) + polarize(f, [y, *xs[1:]])


# components and boxes ---------------------------------------------------

def test_components_split_disjoint_variables():
    s = FormSystem([parse_form("x1^2 + x2*x3 - x4^2", 4)])
    assert sorted(map(sorted, components(s))) == [[0], [1, 2], [3]]
    assert restrict(s[0], [1, 2]) == parse_form("x1*x2", 2)


def test_box_integer_ranges_and_parse():
    b = Box.parse("-1/2:1", 2)
    assert b.integer_ranges(5) == [(-2, 5), (-2, 5)]
    assert Box.parse("unit", 3) == Box.unit(3)
    assert Box.positive(2).volume() == 1
    with pytest.raises(ValueError):
        Box.parse("0:2", 1)
    with pytest.raises(ValueError):
        Box.parse("0.1:1", 1)


def test_bilinear_family_shape():
    q = bilinear_family(2, 7)
    assert (q.n_vars, q.degree, q.r) == (21, 2, 2)
