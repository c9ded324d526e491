"""The constructive Weyl dichotomy.

Either |S(alpha)| is small, or there are many near-solutions of the
multilinear system; in the latter case the psi matrix either yields a rational
approximation q, a (through the adjugate of a full-rank minor) or an integer
vector b with b^T psi = 0.
"""

from fractions import Fraction

from weylforms import (Box, FormSystem, major_arc_approximation, parse_form, run_dichotomy)

quad = FormSystem([parse_form("x1^2 + 2*x2^2 - x3^2 + x1*x3", 3)])

print("rational phases are recovered exactly:")
for alpha in ["1/3", "2/7", "5/9", "7/10"]:
    o = major_arc_approximation(quad, [alpha], 1, 30)
    print(f"  alpha = {alpha:5s} -> q = {o.q}, a = {o.a}, error = {o.errors[0]}, "
          f"minor det = {o.det}")

print("irrational phases give a genuine approximation:")
for alpha in ["sqrt(2)", "pi/7"]:
    o = major_arc_approximation(quad, [alpha], 1, 30)
    print(f"  alpha = {alpha:8s} -> q = {o.q}, a = {o.a}, |q alpha - a| <= {float(o.errors[0]):.3e},"
          f" log_P q - r(d-1)theta = {o.c_q:.3f}")

print("a dependent pencil is certified instead:")
dep = FormSystem([parse_form("x1^2 - x2*x3", 3), parse_form("3*x1^2 - 3*x2*x3", 3)])
o = major_arc_approximation(dep, ["1/5", "1/3"], 1, 10)
print(f"  {o.type}: b = {o.b}, pencil member b.f = {o.witness_pencil}")

print("both alternatives evaluated at P = 100, theta = 1/2, k = 1/2:")
rep = run_dichotomy(quad, ["sqrt(2)"], Fraction(1, 2), Box.unit(3), 100, Fraction(1, 2))
print(f"  |S| = {rep.abs_S:.1f} vs P^(n-k) = {rep.bound_i:.1f} -> small-sum alternative "
      f"{'holds' if rep.alternative_i else 'fails'}")
print(f"  near tuples = {rep.near_count} vs bound {rep.bound_ii:.1f} -> "
      f"{'holds' if rep.alternative_ii else 'fails'}; outcome {rep.outcome.type}")
