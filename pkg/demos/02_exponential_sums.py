"""Exponential sums S(alpha) and how their size depends on alpha.

Near a rational with small denominator the sum is large; at a badly
approximable irrational it is small compared to the number of terms.
"""

from weylforms import Box, FormSystem, exponential_sum, parse_form

system = FormSystem([parse_form("x1^2 + x2^2 + x3^2", 3)])
box = Box.unit(3)
P = 40
trivial = exponential_sum(system, [0], box, P).real
print(f"S(0) = {trivial:.0f} lattice points")

for alpha in ["1/2", "1/3", "1/4", "3/10", "1/37", "sqrt(2)", "pi/7"]:
    S = exponential_sum(system, [alpha], box, P)
    print(f"alpha = {alpha:8s} |S| = {abs(S):10.2f}   |S| / S(0) = {abs(S) / trivial:.4f}")
