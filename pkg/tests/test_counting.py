import itertools
import math
import random
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from weylforms.counting import (count_multilinear_zero, count_solutions,
                                count_weyl_near_solutions, estimate_g_invariant)
from weylforms.forms import Box, FormSystem, evaluate, parse_form, polarize, unit_vector

from conftest import random_form


def brute_count(system, box, P):
    ranges = box.integer_ranges(P)
    return sum(all(v == 0 for v in system.evaluate(x))
               for x in itertools.product(*(range(lo, hi + 1) for lo, hi in ranges)))


def brute_multilinear(f, P):
    n, d = f.n_vars, f.degree
    pts = list(itertools.product(range(-P, P + 1), repeat=n))
    total = 0
    for xs in itertools.product(pts, repeat=d - 1):
        if all(polarize(f, [unit_vector(n, j), *xs]) == 0 for j in range(n)):
            total += 1
    return total


def brute_near(system, alpha, xi, eta, P):
    # exact rational oracle: ||sum_i alpha_i Gamma_i(e_j, x...)|| < P^-eta
    n, d = system.n_vars, system.degree
    B = math.floor(Fraction(P) ** float(xi) + 1e-12)
    B = max(b for b in range(B + 2) if Fraction(b) ** xi.denominator <= Fraction(P) ** xi.numerator)
    pts = list(itertools.product(range(-B, B + 1), repeat=n))
    total = 0
    for xs in itertools.product(pts, repeat=d - 1):
        ok = True
        for j in range(n):
            v = sum(a * polarize(f, [unit_vector(n, j), *xs]) for a, f in zip(alpha, system))
            dist = abs(v - round(v))
            # dist < P^-eta  <=>  dist^den * P^num < 1 for eta = num/den > 0
            if not (dist == 0 or dist ** eta.denominator * Fraction(P) ** eta.numerator < 1):
                ok = False
                break
        total += ok
    return total


# N(P) -----------------------------------------------------------------

def sys1(text, n):
    return FormSystem([parse_form(text, n)])


def test_count_examples():
    assert count_solutions(sys1("x1^2+x2^2", 2), Box.unit(2), 10).count == 1
    assert count_solutions(sys1("x1^2-x2^2", 2), Box.unit(2), 2).count == 9


def test_count_ternary_against_triple_loop():
    s = sys1("x1^2+x2^2-x3^2", 3)
    oracle = sum(a * a + b * b == c * c for a in range(-5, 6) for b in range(-5, 6)
                 for c in range(-5, 6))
    # origin, 8 axis points for each |x3| = 1..5, 16 from 3^2 + 4^2 = 5^2
    assert count_solutions(s, Box.unit(3), 5).count == oracle == 1 + 8 * 5 + 16


def test_count_rejects_bad_input():
    with pytest.raises(ValueError):
        count_solutions(sys1("x1^2", 1), Box.unit(2), 3)
    with pytest.raises(ValueError):
        count_solutions(sys1("x1^2", 1), Box.unit(1), 0)


def test_count_rational_P_and_asymmetric_box():
    s = sys1("x1*x2 - x3^2", 3)
    box = Box.parse("-1/2:1,0:1,-1:1/3", 3)
    P = Fraction(13, 2)
    assert count_solutions(s, box, P).count == brute_count(s, box, P)


@given(st.integers(0, 10 ** 6))
@settings(max_examples=25, deadline=None)
def test_count_random_systems_against_brute_force(seed):
    rng = random.Random(seed)
    n, d, r = rng.randint(1, 3), rng.randint(1, 3), rng.randint(1, 2)
    s = FormSystem([random_form(rng, n, d, n_terms=3, coef=3) for _ in range(r)])
    P = rng.randint(1, 4)
    assert count_solutions(s, Box.unit(n), P).count == brute_count(s, Box.unit(n), P)


def test_count_monotone_in_P():
    s = sys1("x1^2+x2^2-x3^2-x4^2", 4)
    counts = [count_solutions(s, Box.unit(4), P).count for P in range(1, 9)]
    assert counts == sorted(counts)


def test_serial_and_parallel_agree():
    s = FormSystem([parse_form("x1^2+x2*x3-x3^2", 3), parse_form("x1*x2-x3^2", 3)])
    a = count_solutions(s, Box.unit(3), 12).count
    b = count_solutions(s, Box.unit(3), 12, workers=3).count
    assert a == b == brute_count(s, Box.unit(3), 12)


# M_f(P) ----------------------------------------------------------------

def test_multilinear_examples():
    assert count_multilinear_zero(parse_form("x1*x2", 2), 10) == 1
    assert count_multilinear_zero(parse_form("x1^2", 2), 10) == 21


def test_multilinear_cubic_against_double_loop():
    f = parse_form("x1^2*x2", 2)
    assert count_multilinear_zero(f, 3) == brute_multilinear(f, 3)


@pytest.mark.parametrize("text,n,P", [("x1^3", 1, 5), ("x1*x2*x3", 3, 1),
                                      ("x1^2-x2^2+x1*x2", 2, 4), ("x1^3-x2^3", 2, 2)])
def test_multilinear_small_against_brute_force(text, n, P):
    f = parse_form(text, n)
    assert count_multilinear_zero(f, P) == brute_multilinear(f, P)


def test_g_estimates():
    est = estimate_g_invariant(parse_form("x1*x2", 2), [10, 20, 40])
    assert est.slope == 0 and est.g_estimate == 2
    est = estimate_g_invariant(parse_form("x1^2", 2), [10, 20, 40])
    assert abs(est.g_estimate - 1) < 0.1
    cubic = parse_form("x1^3", 1)
    assert [c for _, c in estimate_g_invariant(cubic, [10, 20, 40]).samples] == [41, 81, 161]
    assert abs(estimate_g_invariant(cubic, [10, 20, 40]).g_estimate - 1) < 0.1


# Weyl near-solutions ----------------------------------------------------

def test_near_count_example_both_methods():
    s = sys1("x1^2", 1)
    for method in ("brute", "residue"):
        assert count_weyl_near_solutions(s, [Fraction(1, 3)], 1, 1, 10, method=method) == 7
    assert brute_near(s, [Fraction(1, 3)], Fraction(1), Fraction(1), 10) == 7


def test_zero_phase_counts_every_tuple():
    s = sys1("x1^2*x2+x2^3", 2)
    assert count_weyl_near_solutions(s, [0], 1, 1, 3) == 7 ** 4


def test_large_eta_collapses_to_multilinear_zeros():
    f = parse_form("x1^2-2*x1*x2+3*x2^2", 2)
    s = FormSystem([f])
    assert count_weyl_near_solutions(s, [Fraction(1, 7)], 1, 5, 6) == \
        count_multilinear_zero(f, 6)


@given(st.integers(0, 10 ** 6))
@settings(max_examples=20, deadline=None)
def test_near_count_against_oracle(seed):
    rng = random.Random(seed)
    n, d = rng.randint(1, 2), rng.randint(2, 3)
    r = rng.randint(1, 2)
    s = FormSystem([random_form(rng, n, d, n_terms=2, coef=3) for _ in range(r)])
    alpha = [Fraction(rng.randint(0, 6), rng.randint(1, 7)) for _ in range(r)]
    xi = Fraction(rng.choice([1, 1, 1, 2]), rng.choice([1, 2])) if d == 2 else Fraction(1)
    xi = min(xi, Fraction(1))
    eta = Fraction(rng.randint(1, 3), rng.randint(1, 2))
    P = rng.randint(2, 5)
    expect = brute_near(s, alpha, xi, eta, P)
    for method in ("brute", "residue"):
        assert count_weyl_near_solutions(s, alpha, xi, eta, P, method=method) == expect


def test_near_count_irrational_alpha():
    s = sys1("x1^2", 1)
    # ||2 sqrt(2) x|| < 1/10 for |x| <= 10: exact check with a float oracle
    expect = sum(abs(2 * math.sqrt(2) * x - round(2 * math.sqrt(2) * x)) < 0.1
                 for x in range(-10, 11))
    assert count_weyl_near_solutions(s, ["sqrt(2)"], 1, 1, 10) == expect
