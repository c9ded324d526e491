"""Experiments with systems of integral homogeneous forms: exact zero counts,
exponential sums, the constructive Weyl dichotomy, pencil invariants and a
truncated circle-method prediction."""

from ._numeric import PrecisionError, parse_real
from .circle import (PredictionReport, SingularIntegralTruncation, SingularSeriesTruncation,
                     complete_exponential_sum_mod_q, inner_integral, predict_and_verify,
                     singular_integral, singular_series, singular_series_term)
from .counting import (CountResult, GEstimate, count_multilinear_zero, count_solutions,
                       count_weyl_near_solutions, estimate_g_invariant)
from .exact import adjugate, det, exact_rank_with_certificate, primitive, rank
from .forms import (Box, Form, FormSyntaxError, FormSystem, bilinear_family, evaluate,
                    format_form, multilinear_basis_row, parse_form, parse_system, partial,
                    pencil_form, polarize, read_system)
from .invariants import (FpDimensionEstimate, InvariantReport, birch_locus_dimension,
                         check_theorem_conditions, h_invariant_bounds, phi, quadratic_rank,
                         singular_locus_dimension, u_invariant, variety_dimension_fp)
from .weyl import (ColumnCapExceeded, DichotomyReport, MajorArc, MinorArcEvidence, PsiMatrix,
                   RankDeficient, build_psi, exponential_sum, major_arc_approximation,
                   run_dichotomy)

__version__ = "0.1.0"
