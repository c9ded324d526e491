"""Truncated singular series and singular integral against exact counts.

For f = x1^2 + x2^2 + x3^2 + x4^2 - x5^2 on [-1, 1]^5 the main term
S * J * P^3 should track N(P).  For |x5| = t <= 1 the slice of the real
zero set is a 3-sphere inside the cube, which gives J = 2 pi^2 / 3 exactly.
"""

import math

from weylforms import Box, FormSystem, parse_form, predict_and_verify

system = FormSystem([parse_form("x1^2 + x2^2 + x3^2 + x4^2 - x5^2", 5)])
rep = predict_and_verify(system, Box.unit(5), [10, 20, 40, 60], Q_max=50, T_max=8)

ss, si = rep.singular_series, rep.singular_integral
print(f"singular series (Q <= 50): {ss.value:.6f}, spread of last partial sums {ss.tail_estimate:.1e}")
print(f"singular integral (|gamma| <= 8): {si.value:.6f}  closed form {2 * math.pi ** 2 / 3:.6f}")
print("trace over T:", ", ".join(f"T={t:g}: {v:.5f}" for t, v in si.convergence_trace))
print(f"{'P':>4} {'N(P)':>10} {'prediction':>14} {'ratio':>8}")
for P, N, pred, ratio in rep.rows:
    print(f"{str(P):>4} {N:>10d} {pred:>14.1f} {ratio:>8.4f}")
print("verdict:", rep.verdict, "|", "; ".join(rep.tags))

# a positive definite form has no real zeros besides 0, and the integral collapses
definite = FormSystem([parse_form("x1^2 + x2^2 + x3^2", 3)])
rep = predict_and_verify(definite, Box.unit(3), [10, 20], Q_max=10, T_max=8)
print("positive definite:", [row[1] for row in rep.rows], "|", "; ".join(rep.tags))
