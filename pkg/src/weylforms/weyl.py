"""Exponential sums and the constructive Weyl dichotomy.

Given alpha, theta and P, the matrix psi collects the integer columns
Gamma_i(e_j, x^(2), ..., x^(d)) over all tuples with ||alpha-weighted
column|| small.  Either psi has full row rank r, and the adjugate of an r x r
minor turns alpha into a rational approximation a/q, or its rows are
dependent and an integer vector b certifies a degenerate pencil member f_b.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterator, Optional, Sequence

import mpmath
import numpy as np

from . import _numeric as nm
from ._numeric import PrecisionError
from .counting import component_histograms, count_weyl_near_solutions
from .exact import (IncrementalRank, adjugate, det, exact_rank_with_certificate, left_nullspace,
                    left_kernel_check, matmul)
from .forms import Box, Form, FormSystem, pencil_form


class ColumnCapExceeded(RuntimeError):
    """psi would exceed the column cap; theta or P must shrink."""

    def __init__(self, columns: int, cap: int):
        super().__init__(f"psi has more than {cap} columns (scanned {columns}); "
                         "this is itself evidence for the near-solution alternative")
        self.columns = columns
        self.cap = cap


# exponential sums ------------------------------------------------------

def _e_sum(items) -> complex:
    re_parts, im_parts = [], []
    for count, t in items:
        re_parts.append(count * math.cos(2 * math.pi * t))
        im_parts.append(count * math.sin(2 * math.pi * t))
    return complex(math.fsum(re_parts), math.fsum(im_parts))


def _cyclic_hist(hist, A, D) -> np.ndarray:
    out = np.zeros(D, dtype=object)
    for v, c in hist.items():
        out[sum(a * x for a, x in zip(A, v)) % D] += c
    return out


def _cyclic_convolve(h1: np.ndarray, h2: np.ndarray) -> np.ndarray:
    D = len(h1)
    full = np.convolve(h1, h2)
    out = full[:D].copy()
    out[:D - 1] += full[D:]
    return out


def phase_histogram(system: FormSystem, alpha: Sequence, box: Box, P) -> tuple[np.ndarray, int]:
    """Exact histogram H[k] = #{x in P*B : sum_i alpha_i f_i(x) = k/D mod 1}
    for rational alpha with common denominator D."""
    phase = nm.Phase(alpha)
    if not phase.exact:
        raise ValueError("phase histogram needs rational alpha")
    ranges = box.integer_ranges(P)
    H = None
    for h in component_histograms(system, ranges):
        c = _cyclic_hist(h, phase.A, phase.D)
        H = c if H is None else _cyclic_convolve(H, c)
    return H, phase.D


def exponential_sum(system: FormSystem, alpha: Sequence, box: Box, P, *,
                    exact: Optional[bool] = None, precision_bits: int = 128) -> complex:
    """S(alpha) = sum over x in P*B of e(sum_i alpha_i f_i(x)).

    Rational alpha uses the exact residue histogram (element of Z[zeta_D])
    and converts to floating point once at the end; otherwise (or with
    ``exact=False``) each component's value histogram is summed in double
    precision with compensated summation.
    """
    if len(alpha) != system.r:
        raise ValueError(f"alpha has length {len(alpha)}, system has r={system.r}")
    if box.n != system.n_vars:
        raise ValueError("box dimension does not match the system")
    phase = nm.Phase(alpha, precision_bits)
    if exact is None:
        exact = phase.exact and phase.D <= 10 ** 5
    if exact:
        H, D = phase_histogram(system, alpha, box, P)
        return _e_sum((int(c), Fraction(k, D)) for k, c in enumerate(H) if c)
    ranges = box.integer_ranges(P)
    alphas = phase.fractions if phase.exact else None
    total = complex(1.0)
    for h in component_histograms(system, ranges):
        if not h:
            return 0j
        items = []
        for v in sorted(h):
            if alphas is not None:
                t = sum(a * x for a, x in zip(alphas, v)) % 1
                t = float(t)
            else:
                t = math.fsum(a * x for a, x in zip(phase.floats, v)) % 1.0
            items.append((h[v], t))
        total *= _e_sum(items)
    return total


# psi -----------------------------------------------------------------

def _weyl_parameters(system: FormSystem, alpha, theta, P, precision_bits):
    theta, P = nm.as_fraction(theta), nm.as_fraction(P)
    if not 0 < theta <= 1:
        raise ValueError("theta must lie in (0, 1]")
    if P < 1:
        raise ValueError("P must be >= 1")
    if len(alpha) != system.r:
        raise ValueError(f"alpha has length {len(alpha)}, system has r={system.r}")
    d = system.degree
    eta = d - (d - 1) * theta
    phase = nm.Phase(alpha, precision_bits)
    B = nm.floor_power(P, theta)
    T = nm.ceil_scaled_power(phase.D, P, -eta)
    return theta, P, eta, phase, B, T


def near_tuples(system: FormSystem, phase: nm.Phase, B: int, T: int
                ) -> Iterator[tuple[np.ndarray, np.ndarray]]:
    """Chunks of (tuples, Gamma values) for all near-solution tuples with
    |x^(i)|_inf <= B, in graded (shell) order."""
    gamma = nm.GammaEvaluator(system)
    dtype = nm.pick_dtype(gamma.bound(B))
    for X in nm.shell_chunks(gamma.m, B):
        X = X.astype(dtype)
        G = gamma(X)
        ok = nm.near_mask(G, phase, T)
        if ok.any():
            yield X[ok], G[ok]


@dataclass
class PsiMatrix:
    r: int
    entries: list[list[int]]  # r rows
    column_labels: list[tuple[int, tuple[tuple[int, ...], ...]]]  # (j, (x2, ..., xd))

    @property
    def n_columns(self) -> int:
        return len(self.column_labels)

    def column(self, c: int) -> list[int]:
        return [row[c] for row in self.entries]

    def rank_with_certificate(self):
        if not self.column_labels:
            return exact_rank_with_certificate([[] for _ in range(self.r)])
        return exact_rank_with_certificate(self.entries)


def _split_tuple(row: Sequence[int], n: int) -> tuple[tuple[int, ...], ...]:
    return tuple(tuple(row[i:i + n]) for i in range(0, len(row), n))


def build_psi(system: FormSystem, alpha: Sequence, theta, P, *,
              column_cap: int = 10 ** 7, precision_bits: int = 128) -> PsiMatrix:
    """Materialize psi over the tuples counted by N(P^theta; P^-(d-(d-1)theta); alpha).

    Columns are labelled (j, tuple) and ordered by tuple (graded order) then j.
    """
    _, _, _, phase, B, T = _weyl_parameters(system, alpha, theta, P, precision_bits)
    n, r = system.n_vars, system.r
    entries = [[] for _ in range(r)]
    labels = []
    for X, G in near_tuples(system, phase, B, T):
        if len(labels) + n * X.shape[0] > column_cap:
            raise ColumnCapExceeded(len(labels) + n * X.shape[0], column_cap)
        for x, g in zip(X.tolist(), G.tolist()):
            tup = _split_tuple(x, n)
            for j in range(n):
                labels.append((j, tup))
                for i in range(r):
                    entries[i].append(int(g[i][j]))
    return PsiMatrix(r, entries, labels)


# outcomes ------------------------------------------------------------

def _num(v):
    if isinstance(v, Fraction):
        return str(v) if v.denominator != 1 else int(v)
    return v


def _finite(x: float):
    return None if x is None or math.isinf(x) or math.isnan(x) else x


@dataclass
class MajorArc:
    q: int
    a: tuple[int, ...]
    errors: tuple  # Fractions for rational alpha, float upper bounds otherwise
    det: int  # signed determinant of the selected minor before reduction
    minor: tuple[tuple[int, ...], ...]
    minor_labels: tuple
    a_tilde: tuple[int, ...]
    theta: Fraction
    P: Fraction
    log_q: float
    log_err: float  # log_P max_i |q alpha_i - a_i|, -inf if exact
    c_q: float  # log_P q - r(d-1)theta
    c_err: float  # log_P err - (-d + r(d-1)theta)
    columns_scanned: int = 0
    type: str = field(default="MajorArc", init=False)

    def to_dict(self) -> dict:
        return {"type": self.type, "q": self.q, "a": list(self.a),
                "errors": [_num(e) for e in self.errors], "b": None, "abs_S": None,
                "bounds": {"log_P_q": _finite(self.log_q), "log_P_error": _finite(self.log_err),
                           "unreduced_det": self.det},
                "constants": {"c_q": _finite(self.c_q), "c_error": _finite(self.c_err)},
                "minor": [list(r) for r in self.minor],
                "minor_labels": [[j, [list(v) for v in t]] for j, t in self.minor_labels],
                "a_tilde": list(self.a_tilde), "columns_scanned": self.columns_scanned}


@dataclass
class RankDeficient:
    b: tuple[int, ...]
    witness_pencil: Form
    rank: int
    columns_scanned: int = 0
    type: str = field(default="RankDeficient", init=False)

    def to_dict(self) -> dict:
        return {"type": self.type, "q": None, "a": None, "errors": None, "b": list(self.b),
                "abs_S": None, "bounds": {"rank": self.rank},
                "constants": None, "witness_pencil": str(self.witness_pencil),
                "columns_scanned": self.columns_scanned}


@dataclass
class MinorArcEvidence:
    abs_S: float
    exponent_bound: float  # |S| < P^exponent_bound is the predicted regime
    bound_value: float
    holds: bool
    type: str = field(default="MinorArcEvidence", init=False)

    def to_dict(self) -> dict:
        return {"type": self.type, "q": None, "a": None, "errors": None, "b": None,
                "abs_S": self.abs_S,
                "bounds": {"exponent": self.exponent_bound, "value": self.bound_value,
                           "holds": self.holds},
                "constants": None}


def _round_half_away(x: Fraction) -> int:
    f = math.floor(abs(x) + Fraction(1, 2))
    return f if x >= 0 else -f


def _nearest_integers(phase: nm.Phase, minor: list[list[int]]) -> list[int]:
    r = len(minor)
    out = []
    for l in range(r):
        col = [minor[i][l] for i in range(r)]
        if phase.exact:
            out.append(_round_half_away(sum(a * c for a, c in zip(phase.fractions, col))))
            continue
        D = phase.D
        center = sum(A * c for A, c in zip(phase.A, col))
        rad = phase.R * sum(abs(c) for c in col)
        lo, hi = Fraction(center - rad, D), Fraction(center + rad, D)
        nlo, nhi = _round_half_away(lo), _round_half_away(hi)
        if nlo != nhi:
            raise PrecisionError("nearest integer to a psi-weighted phase is ambiguous; "
                                 "raise precision_bits")
        out.append(nlo)
    return out


def _errors(phase: nm.Phase, q: int, a: Sequence[int]):
    if phase.exact:
        return tuple(abs(q * al - ai) for al, ai in zip(phase.fractions, a))
    D = phase.D
    return tuple(float(Fraction(abs(q * A - ai * D) + q * phase.R, D))
                 for A, ai in zip(phase.A, a))


def _first_outside_span(cols: np.ndarray, start: int, inc: IncrementalRank, r: int):
    """Index of the first column at or after ``start`` not in the span of the
    columns kept so far, tested against a left-kernel basis of that span."""
    rest = cols[start:]
    if inc.rank == 0:
        hit = np.flatnonzero(np.any(rest != 0, axis=1))
    else:
        K = left_nullspace([list(c) for c in zip(*inc.columns)], r)
        bound = max(abs(v) for k in K for v in k) * int(np.abs(rest).max(initial=0)) * r
        if bound < nm.INT64_SAFE:
            prod = rest.astype(np.int64) @ np.array(K, dtype=np.int64).T
        else:
            prod = rest.astype(object) @ np.array(K, dtype=object).T
        hit = np.flatnonzero(np.any(prod != 0, axis=1))
    return None if len(hit) == 0 else start + int(hit[0])


def major_arc_approximation(system: FormSystem, alpha: Sequence, theta, P, *,
                            column_cap: int = 10 ** 7, precision_bits: int = 128):
    """Run the case analysis on psi and return MajorArc or RankDeficient.

    Columns are streamed in graded order and the first r independent ones form
    the minor, so psi is only materialized as far as needed when it has full
    rank.  A rank-deficient psi is scanned completely and certified.
    """
    theta, P, eta, phase, B, T = _weyl_parameters(system, alpha, theta, P, precision_bits)
    n, r, d = system.n_vars, system.r, system.degree
    inc = IncrementalRank(r)
    labels = []
    scanned = 0
    for X, G in near_tuples(system, phase, B, T):
        # columns of this chunk in stream order (tuple-major, then j), shape (N*n, r)
        cols = np.transpose(np.asarray(G), (0, 2, 1)).reshape(-1, r)
        start = 0
        while start < len(cols) and not inc.full:
            idx = _first_outside_span(cols, start, inc, r)
            if idx is None:
                break
            added = inc.add([int(v) for v in cols[idx]])
            assert added, "column outside the span was rejected"
            labels.append((idx % n, _split_tuple(X[idx // n].tolist(), n)))
            start = idx + 1
        scanned += start if inc.full else len(cols)
        if inc.full:
            break
        if scanned > column_cap:
            raise ColumnCapExceeded(scanned, column_cap)
    if not inc.full:
        b = inc.kernel_vector()
        assert left_kernel_check(b, [list(c) for c in zip(*inc.columns)]) if inc.columns else True
        return RankDeficient(b, pencil_form(system, b), inc.rank, scanned)

    minor = [[inc.columns[l][i] for l in range(r)] for i in range(r)]  # psi~_{i,l}
    D_signed = det(minor)
    adj = adjugate(minor)
    # adj is indexed so that adj @ minor = det * I, i.e. rows pair with alpha_i
    if matmul(adj, minor) != [[D_signed * (i == k) for k in range(r)] for i in range(r)]:
        raise AssertionError("adjugate identity failed")
    a_tilde = _nearest_integers(phase, minor)
    # sum_i alpha_i minor[i][l] ~ a_tilde[l]  =>  det * alpha_k ~ sum_l a_tilde[l] * adj[l][k]
    a = [sum(a_tilde[l] * adj[l][k] for l in range(r)) for k in range(r)]
    q = D_signed
    if q < 0:
        q, a = -q, [-v for v in a]
    g = math.gcd(q, *a)
    q //= g
    a = tuple(v // g for v in a)
    errors = _errors(phase, q, a)
    rd = r * (d - 1) * theta
    log_q = nm.log_base(q, P)
    emax = max(errors)
    log_err = float("-inf") if emax == 0 else nm.log_base(
        emax if isinstance(emax, Fraction) else Fraction(emax), P)
    return MajorArc(q=q, a=a, errors=errors, det=D_signed,
                    minor=tuple(tuple(r_) for r_ in minor), minor_labels=tuple(labels),
                    a_tilde=tuple(a_tilde), theta=theta, P=P, log_q=log_q, log_err=log_err,
                    c_q=log_q - float(rd), c_err=log_err - float(-d + rd),
                    columns_scanned=scanned)


# the empirical dichotomy ----------------------------------------------

@dataclass
class DichotomyReport:
    abs_S: float
    S: complex
    lattice_points: int
    bound_i: float  # P^(n-k)
    alternative_i: bool
    near_count: int
    bound_ii: float  # P^((d-1) n theta - 2^(d-1) k)
    alternative_ii: bool
    g_tilde: float
    minor_exponent: float  # n - 2^(1-d) g_tilde theta
    outcome: object
    note: str = ""

    def to_dict(self) -> dict:
        return {"abs_S": self.abs_S, "S": [self.S.real, self.S.imag],
                "lattice_points": self.lattice_points,
                "alternatives": {"i": {"bound": self.bound_i, "holds": self.alternative_i},
                              "ii": {"near_count": self.near_count, "bound": self.bound_ii,
                                     "holds": self.alternative_ii}},
                "g_tilde": self.g_tilde, "minor_exponent": self.minor_exponent,
                "outcome": None if self.outcome is None else self.outcome.to_dict(),
                "note": self.note}


def default_g_tilde(system: FormSystem, b_bound: int = 2) -> float:
    """Lower-bound proxy for inf_b g(f_b): min pencil rank for quadratics,
    n - u otherwise (both over a finite pencil search)."""
    from .invariants import pencil_vectors, quadratic_rank, u_invariant_search
    if system.degree == 2:
        ranks = []
        for b in pencil_vectors(system.r, b_bound):
            fb = pencil_form(system, b)
            ranks.append(0 if fb.is_zero() else quadratic_rank(fb))
        return float(min(ranks))
    return float(system.n_vars - u_invariant_search(system, b_bound).u)


def run_dichotomy(system: FormSystem, alpha: Sequence, theta, box: Box, P, k, *,
                  g_tilde: Optional[float] = None, column_cap: int = 10 ** 7,
                  precision_bits: int = 128) -> DichotomyReport:
    """Evaluate both alternatives of the Weyl dichotomy at a finite P and run
    the psi case analysis when the near-solution alternative holds."""
    theta, P, k = nm.as_fraction(theta), nm.as_fraction(P), nm.as_fraction(k)
    if k <= 0:
        raise ValueError("k must be positive")
    n, d = system.n_vars, system.degree
    S = exponential_sum(system, alpha, box, P, precision_bits=precision_bits)
    lattice = 1
    for lo, hi in box.integer_ranges(P):
        lattice *= max(hi - lo + 1, 0)
    bound_i = nm.power_float(P, n - k)
    near = count_weyl_near_solutions(system, alpha, theta, d - (d - 1) * theta, P,
                                     precision_bits=precision_bits)
    bound_ii = nm.power_float(P, (d - 1) * n * theta - 2 ** (d - 1) * k)
    if g_tilde is None:
        g_tilde = default_g_tilde(system)
    expo = float(n - Fraction(1, 2 ** (d - 1)) * Fraction(g_tilde).limit_denominator() * theta)
    alt_i, alt_ii = abs(S) < bound_i, near >= bound_ii
    note = ""
    if alt_ii:
        try:
            outcome = major_arc_approximation(system, alpha, theta, P, column_cap=column_cap,
                                              precision_bits=precision_bits)
        except ColumnCapExceeded as exc:
            outcome, note = None, str(exc)
    else:
        bound_val = nm.power_float(P, Fraction(expo).limit_denominator(10 ** 6))
        outcome = MinorArcEvidence(abs(S), expo, bound_val, abs(S) < bound_val)
    return DichotomyReport(abs(S), S, lattice, bound_i, alt_i, near, bound_ii, alt_ii,
                           float(g_tilde), expo, outcome, note)
