"""Forms, polarization and exact zero counts.

Run with ``python demos/01_forms_and_counts.py``.
"""

import math

from weylforms import (Box, FormSystem, count_multilinear_zero, count_solutions,
                       estimate_g_invariant, evaluate, parse_form, polarize)

# A form is parsed from text in variables x1..xn and must be homogeneous.
f = parse_form("x1^2 + x2^2 + x3^2 + x4^2 - x5^2", 5)
print("f =", f, " degree", f.degree)
print("f(1, 1, 1, 1, 2) =", evaluate(f, (1, 1, 1, 1, 2)))

# The symmetric multilinear form recovers d! f on the diagonal.
x = (3, -1, 2, 0, 5)
print("Gamma(x, x) =", polarize(f, [x, x]), " 2! f(x) =", math.factorial(2) * evaluate(f, x))

# Exact N(P) on the box [-1, 1]^5: variables that share no monomial are
# counted separately and their value histograms convolved.
system = FormSystem([f])
for P in (5, 10, 20, 40):
    res = count_solutions(system, Box.unit(5), P)
    print(f"N({P}) = {res.count}   (N / P^3 = {res.count / P ** 3:.3f})")

# Multilinear zero counts and the empirical g-invariant.
for text, n in [("x1*x2", 2), ("x1^2", 2), ("x1^3", 1)]:
    g = parse_form(text, n)
    est = estimate_g_invariant(g, [10, 20, 40])
    print(f"{text:6s} M(10) = {count_multilinear_zero(g, 10):4d}  slope {est.slope:.3f}"
          f"  g-estimate {est.g_estimate:.3f}")
