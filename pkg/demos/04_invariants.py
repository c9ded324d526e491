"""Pencil invariants of the bilinear family Q_i(x, y) = sum_j x_j y_{j,i}.

dim V* and the largest singular locus in the pencil are estimated from
exact point counts over small prime fields, then fed into the solubility
conditions.
"""

from weylforms import bilinear_family, birch_locus_dimension, check_theorem_conditions

for r, k in [(1, 2), (2, 2), (2, 3)]:
    system = bilinear_family(r, k)
    v = birch_locus_dimension(system, (5, 7, 11))
    print(f"Q(r={r}, k={k}), n = {system.n_vars}: F_p counts of V* {v.counts} -> "
          f"dim V* = {v.dim_estimate}; formula k(r-1)+r-1 = {k * (r - 1) + r - 1}")

for k in (5, 6, 7):
    rep = check_theorem_conditions(bilinear_family(2, k), b_bound=2, compute_v_star=False)
    print(f"Q(2, {k}): n - u = {rep.n - rep.u} against threshold {rep.thresholds['birch']}: "
          f"{rep.verdicts['pencil_singularity']} (margin {rep.margins['pencil_singularity']})")
