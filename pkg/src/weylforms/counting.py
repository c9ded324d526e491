"""Exact enumeration of the counting functions: N(P), M_f(P) and the Weyl
near-solution count N(P^xi; P^-eta; alpha), plus empirical g-invariants."""

from __future__ import annotations

import csv
import math
import time
from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from . import _numeric as nm
from .forms import Box, Form, FormSystem, components, partial, polarize, restrict


@dataclass(frozen=True)
class CountResult:
    count: int
    P: Fraction
    points_enumerated: int  # lattice points in the dilated box
    elapsed: float = field(default=0.0, compare=False)

    def to_dict(self) -> dict:
        return {"count": self.count, "P": str(self.P),
                "points_enumerated": self.points_enumerated}


@dataclass(frozen=True)
class GEstimate:
    samples: tuple[tuple[int, int], ...]
    slope: float
    g_estimate: float
    residual: float

    def to_dict(self) -> dict:
        return {"samples": [list(s) for s in self.samples], "slope": self.slope,
                "g_estimate": self.g_estimate, "residual": self.residual}


# value histograms over a component -----------------------------------

def _histogram_task(args):
    forms, ranges = args
    R = max((max(abs(lo), abs(hi)) for lo, hi in ranges), default=0)
    dtype = nm.pick_dtype(max((nm.value_bound(f, R) for f in forms if not f.is_zero()),
                              default=0))
    hist: Counter = Counter()
    for X in nm.box_chunks(ranges):
        X = X.astype(dtype)
        vals = np.stack([nm.eval_form(f, X) for f in forms], axis=1)
        if dtype is np.int64:
            uniq, cnt = np.unique(vals, axis=0, return_counts=True)
            for u, c in zip(uniq.tolist(), cnt.tolist()):
                hist[tuple(u)] += c
        else:
            hist.update(map(tuple, vals.tolist()))
    return hist


def _split_ranges(ranges, parts):
    lo, hi = ranges[0]
    size = hi - lo + 1
    parts = max(1, min(parts, size))
    bounds = [lo + (size * k) // parts for k in range(parts + 1)]
    return [[(bounds[k], bounds[k + 1] - 1)] + list(ranges[1:]) for k in range(parts)]


def component_histograms(system: FormSystem, ranges: Sequence[tuple[int, int]],
                         workers: int = 1) -> list[Counter]:
    """For each variable component, the multiset of value vectors
    (f_1, ..., f_r) restricted to that component over its box ranges."""
    hists = []
    for comp in components(system):
        forms = [restrict(f, comp) for f in system.forms]
        sub = [ranges[j] for j in comp]
        if any(hi < lo for lo, hi in sub):
            hists.append(Counter())
            continue
        if workers > 1:
            tasks = [(forms, part) for part in _split_ranges(sub, workers)]
            with ProcessPoolExecutor(max_workers=workers) as ex:
                parts = list(ex.map(_histogram_task, tasks))
            h: Counter = Counter()
            for p in parts:  # fixed order; integer addition is associative anyway
                h.update(p)
        else:
            h = _histogram_task((forms, sub))
        hists.append(h)
    return hists


def _convolve(h1: Counter, h2: Counter) -> Counter:
    if len(h1) < len(h2):
        h1, h2 = h2, h1
    out: Counter = Counter()
    if all(len(k) == 1 for k in h1) and h1 and h2:
        # r = 1: dense integer convolution
        k1 = np.fromiter((k[0] for k in h1), dtype=object)
        k2 = np.fromiter((k[0] for k in h2), dtype=object)
        lo1, hi1, lo2, hi2 = min(k1), max(k1), min(k2), max(k2)
        if hi1 - lo1 < 10 ** 7 and hi2 - lo2 < 10 ** 7:
            a = np.zeros(hi1 - lo1 + 1, dtype=object)
            b = np.zeros(hi2 - lo2 + 1, dtype=object)
            for k, c in h1.items():
                a[k[0] - lo1] = c
            for k, c in h2.items():
                b[k[0] - lo2] = c
            total = sum(h1.values()) * sum(h2.values())
            if total < nm.INT64_SAFE:
                conv = np.convolve(a.astype(np.int64), b.astype(np.int64))
            else:
                conv = np.convolve(a, b)
            nz = np.nonzero(conv)[0]
            for i in nz.tolist():
                out[(i + lo1 + lo2,)] = int(conv[i])
            return out
    for k1, c1 in h1.items():
        for k2, c2 in h2.items():
            out[tuple(a + b for a, b in zip(k1, k2))] += c1 * c2
    return out


def count_solutions(system: FormSystem, box: Box, P, *, workers: int = 1) -> CountResult:
    """N(P): integer points x in the closed box P*B with f_i(x) = 0 for all i.

    Variables split into components that share no monomial; each component's
    value histogram is enumerated exactly and the histograms are convolved.
    """
    if box.n != system.n_vars:
        raise ValueError(f"box has dimension {box.n}, system has {system.n_vars} variables")
    P = nm.as_fraction(P)
    t0 = time.perf_counter()
    ranges = box.integer_ranges(P)
    domain = math.prod(max(hi - lo + 1, 0) for lo, hi in ranges)
    hists = component_histograms(system, ranges, workers=workers)
    if domain == 0:
        count = 0
    else:
        hists.sort(key=len)
        acc = hists[0]
        for h in hists[1:-1]:
            acc = _convolve(acc, h)
        if len(hists) == 1:
            count = acc.get((0,) * system.r, 0)
        else:
            last = hists[-1]
            if len(last) < len(acc):
                acc, last = last, acc
            count = sum(c * last.get(tuple(-v for v in k), 0) for k, c in acc.items())
    return CountResult(int(count), P, domain, time.perf_counter() - t0)


# multilinear zero count M_f(P) ------------------------------------------

def _rref(M: list[list[int]]):
    rows = [[Fraction(v) for v in row] for row in M]
    n = len(rows[0]) if rows else 0
    pivots = []
    r = 0
    for c in range(n):
        p = next((i for i in range(r, len(rows)) if rows[i][c] != 0), None)
        if p is None:
            continue
        rows[r], rows[p] = rows[p], rows[r]
        pv = rows[r][c]
        rows[r] = [v / pv for v in rows[r]]
        for i in range(len(rows)):
            if i != r and rows[i][c] != 0:
                f = rows[i][c]
                rows[i] = [a - f * b for a, b in zip(rows[i], rows[r])]
        pivots.append(c)
        r += 1
    return rows[:r], pivots


def kernel_points_in_box(M: list[list[int]], P: int) -> int:
    """Number of integer x with |x|_inf <= P and M x = 0."""
    n = len(M[0])
    rows, pivots = _rref(M)
    if len(pivots) == n:
        return 1
    free = [c for c in range(n) if c not in pivots]
    if not pivots:
        return (2 * P + 1) ** n
    # x_p = -sum_f R[p][f] x_f; scale to integers
    Dn = 1
    for row in rows:
        for c in free:
            Dn = Dn * row[c].denominator // math.gcd(Dn, row[c].denominator)
    C = np.array([[int(-row[c] * Dn) for c in free] for row in rows], dtype=object)
    bound = int(np.max(np.abs(C))) * len(free) * P + 1 if C.size else 1
    dtype = nm.pick_dtype(bound)
    C = C.astype(dtype)
    total = 0
    for X in nm.box_chunks([(-P, P)] * len(free)):
        X = X.astype(dtype)
        V = X @ C.T  # Dn * pivot values
        ok = np.all((V % Dn == 0) & (np.abs(V) <= P * Dn), axis=1)
        total += int(np.count_nonzero(ok))
    return total


def count_multilinear_zero(f: Form, P: int) -> int:
    """M_f(P): tuples (x^(2), ..., x^(d)) with all |coordinates| <= P and
    Gamma_f(e_j, x^(2), ..., x^(d)) = 0 for every j.

    The system is linear in x^(d) once x^(2), ..., x^(d-1) are fixed, so the
    last vector is counted by enumerating the rational kernel's free
    coordinates and checking integrality and the box for the pivots.
    """
    d, n = f.degree, f.n_vars
    if d < 2:
        raise ValueError("M_f needs degree >= 2")
    P = int(P)
    if P < 0:
        raise ValueError("P must be nonnegative")
    second = [[partial(partial(f, j), k) if d >= 3 else None for k in range(n)]
              for j in range(n)]
    if d == 2:
        H = [[polarize(f, [[int(a == j) for a in range(n)], [int(a == k) for a in range(n)]])
              for k in range(n)] for j in range(n)]
        return kernel_points_in_box(H, P)
    cache: dict = {}
    total = 0
    for X in nm.box_chunks([(-P, P)] * ((d - 2) * n)):
        for row in X.tolist():
            vecs = [row[i * n:(i + 1) * n] for i in range(d - 2)]
            M = tuple(tuple(0 if second[j][k].is_zero() else polarize(second[j][k], vecs)
                            for k in range(n)) for j in range(n))
            if M not in cache:
                cache[M] = kernel_points_in_box([list(r) for r in M], P)
            total += cache[M]
    return total


def estimate_g_invariant(f: Form, P_list: Sequence[int]) -> GEstimate:
    """Least-squares slope of log M_f(P) against log P; g = (d-1)n - slope."""
    Ps = sorted({int(P) for P in P_list})
    if len(Ps) < 3:
        raise ValueError("need at least 3 distinct P values")
    if Ps[0] < 2:
        raise ValueError("P values must be >= 2")
    counts = [count_multilinear_zero(f, P) for P in Ps]
    samples = tuple(zip(Ps, counts))
    if len(set(counts)) == 1:
        slope, residual = 0.0, 0.0
    else:
        x = np.log(np.array(Ps, dtype=float))
        y = np.log(np.array(counts, dtype=float))
        slope, intercept = np.polyfit(x, y, 1)
        residual = float(np.sqrt(np.mean((y - (slope * x + intercept)) ** 2)))
        slope = float(slope)
    g = (f.degree - 1) * f.n_vars - slope
    return GEstimate(samples, slope, float(g), residual)


# Weyl near-solutions -----------------------------------------------------

def _residue_counts(B: int, D: int) -> list[int]:
    return np.bincount(np.arange(-B, B + 1) % D, minlength=D).tolist()


def count_weyl_near_solutions(system: FormSystem, alpha: Sequence, xi, eta, P, *,
                              precision_bits: int = 128, method: str = "auto") -> int:
    """Tuples x^(2), ..., x^(d) with |x^(i)|_inf <= P^xi and
    ||sum_i alpha_i Gamma_i(e_j, x^(2), ..., x^(d))|| < P^-eta for every j.

    Rational alpha is decided exactly.  Other reals (mpmath intervals) are
    decided with guard digits and raise PrecisionError when undecidable.
    ``method`` is ``"auto"``, ``"brute"`` or ``"residue"`` (rational alpha only:
    the condition depends on the tuple modulo the common denominator).
    """
    if len(alpha) != system.r:
        raise ValueError(f"alpha has length {len(alpha)}, system has r={system.r}")
    xi, eta, P = nm.as_fraction(xi), nm.as_fraction(eta), nm.as_fraction(P)
    if not 0 < xi <= 1:
        raise ValueError("xi must lie in (0, 1]")
    if P < 1:
        raise ValueError("P must be >= 1")
    phase = nm.Phase(alpha, precision_bits)
    B = nm.floor_power(P, xi)
    T = nm.ceil_scaled_power(phase.D, P, -eta)
    gamma = nm.GammaEvaluator(system)
    m = gamma.m
    if method == "auto":
        method = "residue" if phase.exact and phase.D < 2 * B + 1 else "brute"
    if method == "residue":
        if not phase.exact:
            raise ValueError("residue method needs rational alpha")
        D = phase.D
        cnt = np.array(_residue_counts(B, D), dtype=object)
        total = 0
        for X in nm.box_chunks([(0, D - 1)] * m):
            X = X.astype(nm.pick_dtype(gamma.bound(D)))
            ok = nm.near_mask(gamma(X), phase, T)
            if ok.any():
                W = cnt[X[ok].astype(np.int64)]
                total += int(np.sum(np.prod(W, axis=1)))
        return total
    dtype = nm.pick_dtype(gamma.bound(B))
    total = 0
    for X in nm.box_chunks([(-B, B)] * m):
        X = X.astype(dtype)
        total += int(np.count_nonzero(nm.near_mask(gamma(X), phase, T)))
    return total


def write_series_csv(path, header: Sequence[str], rows) -> None:
    """Write a (P, value, ...) series for external plotting."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for row in rows:
            w.writerow([str(v) for v in row])
