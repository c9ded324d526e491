import cmath
import itertools
import math
import random
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from weylforms._numeric import PrecisionError
from weylforms.counting import count_solutions, count_weyl_near_solutions
from weylforms.exact import det, left_kernel_check, matmul, adjugate
from weylforms.forms import Box, FormSystem, parse_form, quadratic_from_gram
from weylforms.weyl import (MajorArc, MinorArcEvidence, RankDeficient, build_psi,
                            exponential_sum, major_arc_approximation, run_dichotomy)

from conftest import random_form


def sys1(text, n):
    return FormSystem([parse_form(text, n)])


def direct_sum(system, alpha, box, P):
    ranges = box.integer_ranges(P)
    total = 0j
    for x in itertools.product(*(range(lo, hi + 1) for lo, hi in ranges)):
        t = sum(float(a) * v for a, v in zip(alpha, system.evaluate(x)))
        total += cmath.exp(2j * math.pi * t)
    return total


# exponential sums -------------------------------------------------------

def test_zero_phase_counts_lattice_points():
    s = sys1("x1^2-x2*x3", 3)
    assert exponential_sum(s, [0], Box.unit(3), 4) == 9 ** 3


@pytest.mark.parametrize("P", [2, 4, 10, 30])
def test_half_phase_parity(P):
    assert abs(exponential_sum(sys1("x1^2", 1), ["1/2"], Box.unit(1), P) - 1) < 1e-12


@given(st.integers(0, 10 ** 6))
@settings(max_examples=25, deadline=None)
def test_exact_and_float_paths_agree(seed):
    rng = random.Random(seed)
    n, d, r = rng.randint(1, 3), rng.randint(2, 3), rng.randint(1, 2)
    s = FormSystem([random_form(rng, n, d, n_terms=3, coef=4) for _ in range(r)])
    alpha = [Fraction(rng.randint(-20, 20), rng.randint(1, 30)) for _ in range(r)]
    P = rng.randint(1, 6)
    exact = exponential_sum(s, alpha, Box.unit(n), P, exact=True)
    flt = exponential_sum(s, alpha, Box.unit(n), P, exact=False)
    assert abs(exact - flt) < 1e-10
    assert abs(exact - direct_sum(s, alpha, Box.unit(n), P)) < 1e-8


@given(st.integers(0, 10 ** 6))
@settings(max_examples=25, deadline=None)
def test_conjugation_and_trivial_bound(seed):
    rng = random.Random(seed)
    n = rng.randint(1, 3)
    s = FormSystem([random_form(rng, n, 2, coef=3)])
    a = Fraction(rng.randint(1, 40), rng.randint(2, 41))
    P = rng.randint(1, 8)
    box = Box.unit(n)
    S_pos = exponential_sum(s, [a], box, P)
    S_neg = exponential_sum(s, [-a], box, P)
    assert abs(S_neg - S_pos.conjugate()) < 1e-10
    assert abs(S_pos) <= exponential_sum(s, [0], box, P).real + 1e-9


def test_irrational_phase_matches_direct_sum():
    s = sys1("x1^2+x1*x2", 2)
    S = exponential_sum(s, ["sqrt(2)"], Box.unit(2), 7)
    assert abs(S - direct_sum(s, [math.sqrt(2)], Box.unit(2), 7)) < 1e-9


# psi ---------------------------------------------------------------

def test_psi_example():
    psi = build_psi(sys1("x1^2", 1), ["1/3"], 1, 10)
    assert psi.n_columns == 7
    assert sorted(psi.entries[0]) == sorted(2 * x for x in (0, 3, -3, 6, -6, 9, -9))
    assert psi.column_labels[1] == (0, ((3,),))  # graded order, +h before -h


def test_psi_zero_matrix_without_nontrivial_near_tuples():
    psi = build_psi(sys1("x1^2", 1), ["sqrt(2)"], Fraction(1, 2), 100)
    assert psi.n_columns == 1 and psi.entries == [[0]]
    assert psi.rank_with_certificate()[0] == 0


def test_psi_identical_forms_give_equal_rows():
    f = parse_form("x1^2+3*x1*x2-x2^2", 2)
    psi = build_psi(FormSystem([f, f]), ["1/5", "2/7"], 1, 6)
    assert psi.entries[0] == psi.entries[1]


def test_psi_columns_are_near_tuples():
    s = sys1("x1^2+x2^2-x1*x2", 2)
    psi = build_psi(s, ["2/9"], 1, 12)
    tuples = {t for _, t in psi.column_labels}
    assert len(tuples) == count_weyl_near_solutions(s, ["2/9"], 1, 1, 12)
    assert psi.n_columns == 2 * len(tuples)


# major arcs -----------------------------------------------------------

def test_major_arc_hand_trace():
    o = major_arc_approximation(sys1("x1^2", 1), ["1/3"], 1, 10)
    assert isinstance(o, MajorArc)
    assert o.minor == ((6,),) and o.det == 6 and o.a_tilde == (2,)
    assert (o.q, o.a, o.errors) == (3, (1,), (0,))


def test_identical_forms_rank_deficient():
    f = parse_form("x1*x2", 2)
    o = major_arc_approximation(FormSystem([f, f]), ["1/3", "1/5"], 1, 8)
    assert isinstance(o, RankDeficient)
    assert o.b == (1, -1) and o.witness_pencil.is_zero()


def nonsingular_quadratic(rng, n):
    while True:
        A = [[0] * n for _ in range(n)]
        for i in range(n):
            for j in range(i, n):
                A[i][j] = A[j][i] = rng.randint(-2, 2)
            A[i][i] = 2 * rng.randint(-2, 2) or 2
        if det(A) != 0:
            return quadratic_from_gram(A)


@given(st.integers(0, 10 ** 6))
@settings(max_examples=15, deadline=None)
def test_rational_phase_recovered_exactly(seed):
    rng = random.Random(seed)
    n = rng.choice([3, 4])
    f = nonsingular_quadratic(rng, n)
    q = rng.randint(1, 10)
    alpha = Fraction(rng.randint(0, q - 1), q)
    o = major_arc_approximation(FormSystem([f]), [alpha], 1, 20)
    assert isinstance(o, MajorArc)
    assert math.gcd(o.q, *o.a) == 1
    assert (o.q * alpha).denominator == 1 and o.a[0] == o.q * alpha
    assert alpha.denominator % o.q == 0 or o.q % alpha.denominator == 0
    assert all(e == 0 for e in o.errors)


def test_adjugate_identity_on_selected_minor():
    s = FormSystem([parse_form("x1^2+x2^2-x3^2", 3), parse_form("x1*x2+x3^2", 3)])
    o = major_arc_approximation(s, ["1/4", "1/6"], 1, 12)
    assert isinstance(o, MajorArc)
    M = [list(r) for r in o.minor]
    D = det(M)
    assert matmul(adjugate(M), M) == [[D if i == j else 0 for j in range(2)] for i in range(2)]
    assert (o.q * Fraction(1, 4)) == o.a[0] and (o.q * Fraction(1, 6)) == o.a[1]


@given(st.integers(0, 10 ** 6))
@settings(max_examples=10, deadline=None)
def test_dependent_pencil_certificate(seed):
    rng = random.Random(seed)
    n = rng.randint(2, 3)
    f = random_form(rng, n, 2, coef=3)
    c = rng.choice([-3, -2, 2, 3])
    g = FormSystem([f, f.scale(c)])
    alpha = [Fraction(rng.randint(0, 6), 7), Fraction(rng.randint(0, 4), 5)]
    o = major_arc_approximation(g, alpha, 1, 6)
    assert isinstance(o, RankDeficient)
    psi = build_psi(g, alpha, 1, 6)
    assert left_kernel_check(o.b, psi.entries)


# the dichotomy --------------------------------------------------------

def test_dichotomy_zero_phase():
    rep = run_dichotomy(sys1("x1^2", 1), [0], 1, Box.unit(1), 10, Fraction(1, 2))
    assert rep.alternative_ii
    assert isinstance(rep.outcome, MajorArc) and (rep.outcome.q, rep.outcome.a) == (1, (0,))


def test_dichotomy_rational():
    rep = run_dichotomy(sys1("x1^2", 1), ["1/3"], 1, Box.unit(1), 10, Fraction(1, 2))
    assert (rep.outcome.q, rep.outcome.a) == (3, (1,))


def test_dichotomy_irrational_minor_arc():
    s = sys1("x1^2+x2^2+x3^2", 3)
    rep = run_dichotomy(s, ["sqrt(2)"], Fraction(1, 2), Box.unit(3), 100, Fraction(1, 2))
    assert isinstance(rep.outcome, MinorArcEvidence)
    assert rep.abs_S < 0.01 * rep.lattice_points
    assert rep.outcome.holds


def test_precision_failure_is_reported():
    # with 8 bits the interval for sqrt(2) cannot decide ||2 sqrt(2) x|| < 1/1000
    with pytest.raises(PrecisionError):
        count_weyl_near_solutions(sys1("x1^2", 1), ["sqrt(2)"], 1, 3, 10, precision_bits=8)
