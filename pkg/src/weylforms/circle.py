"""Truncated singular series and singular integral, and the comparison of
S J P^(n - rd) against exact counts.

Both factors follow Birch's standard construction::

    S = sum_q q^-n sum_{a mod q, gcd(q, a) = 1} S_{a,q},
    S_{a,q} = sum_{x mod q} e(sum_i a_i f_i(x) / q),
    J = int_{|gamma| <= T} int_B e(gamma . f(x)) dx dgamma.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence

import numpy as np

from . import _numeric as nm
from .counting import count_solutions
from .forms import Box, FormSystem, components, restrict

PROVENANCE = "singular series and singular integral as in Birch's circle-method construction"


@dataclass
class SingularSeriesTruncation:
    Q_max: int
    partial_sums: list[tuple[int, float]]
    terms: list[tuple[int, float]]
    value: float
    tail_estimate: float

    def to_dict(self) -> dict:
        return {"Q_max": self.Q_max, "value": self.value, "tail_estimate": self.tail_estimate,
                "partial_sums": [list(p) for p in self.partial_sums]}


@dataclass
class SingularIntegralTruncation:
    T_max: float
    grid_resolution: int
    value: float
    convergence_trace: list[tuple[float, float]]
    converged: bool = True
    imag: float = 0.0

    def to_dict(self) -> dict:
        return {"T_max": self.T_max, "grid_resolution": self.grid_resolution,
                "value": self.value, "convergence_trace": [list(t) for t in self.convergence_trace],
                "converged": self.converged}


# complete exponential sums ---------------------------------------------------

def _component_residue_tables(system: FormSystem, q: int, cap: int):
    """Per component: array of value vectors mod q over (Z/q)^{n_c}, shape (q^{n_c}, r)."""
    out = []
    for comp in components(system):
        if q ** len(comp) > cap:
            raise OverflowError(f"q^{len(comp)} = {q ** len(comp)} exceeds the enumeration cap")
        forms = [restrict(f, comp) for f in system.forms]
        vals = []
        for X in nm.box_chunks([(0, q - 1)] * len(comp)):
            vals.append(np.stack([nm.eval_form_mod(f, X, q) for f in forms], axis=1))
        out.append(np.concatenate(vals, axis=0))
    return out


def complete_exponential_sum_mod_q(system: FormSystem, a: Sequence[int], q: int, *,
                                   cap: int = 10 ** 7) -> complex:
    """S_{a,q} = sum_{x mod q} e(sum_i a_i f_i(x) / q), from an exact residue
    histogram evaluated once in floating point."""
    if q < 1:
        raise ValueError("q must be positive")
    if len(a) != system.r:
        raise ValueError("a must have length r")
    if math.gcd(q, *[int(v) for v in a]) != 1:
        raise ValueError("need gcd(q, a_1, ..., a_r) = 1")
    if q == 1:
        return complex(1.0)
    H = None
    for vals in _component_residue_tables(system, q, cap):
        t = np.zeros(len(vals), dtype=np.int64)
        for ai, col in zip(a, vals.T):
            t = (t + (int(ai) % q) * col) % q
        h = np.bincount(t, minlength=q).astype(object)
        if H is None:
            H = h
        else:
            full = np.convolve(H, h)
            H = full[:q].copy()
            H[:q - 1] += full[q:]
    re_parts = [int(c) * math.cos(2 * math.pi * k / q) for k, c in enumerate(H) if c]
    im_parts = [int(c) * math.sin(2 * math.pi * k / q) for k, c in enumerate(H) if c]
    return complex(math.fsum(re_parts), math.fsum(im_parts))


def _coprime_mask(q: int, r: int) -> np.ndarray:
    idx = np.indices((q,) * r).reshape(r, -1)
    g = np.full(idx.shape[1], q, dtype=np.int64)
    for row in idx:
        g = np.gcd(g, row)
    return (g == 1).reshape((q,) * r)


def singular_series_term(system: FormSystem, q: int, *, cap: int = 10 ** 7) -> float:
    """A(q) = q^-n sum_{a mod q, gcd(q,a) = 1} S_{a,q}; real by conjugate pairing."""
    if q == 1:
        return 1.0
    r, n = system.r, system.n_vars
    F = np.ones((q,) * r, dtype=complex)
    for vals in _component_residue_tables(system, q, cap):
        flat = np.ravel_multi_index(tuple(vals.T), (q,) * r)
        H = np.bincount(flat, minlength=q ** r).reshape((q,) * r).astype(float)
        # sum_v H(v) e(+a.v/q) is the conjugate of numpy's forward transform
        F *= np.conj(np.fft.fftn(H))
    mask = _coprime_mask(q, r)
    total = F[mask].sum() / float(q) ** n
    scale = max(1.0, float(np.abs(F[mask]).sum()) / float(q) ** n)
    if abs(total.imag) > 1e-9 * scale:
        raise ArithmeticError(f"singular series term for q={q} is not real: {total}")
    return float(total.real)


def singular_series(system: FormSystem, Q_max: int, *, cap: int = 10 ** 7
                    ) -> SingularSeriesTruncation:
    if Q_max < 1:
        raise ValueError("Q_max must be >= 1")
    terms, partial = [], []
    acc = []
    for q in range(1, Q_max + 1):
        t = singular_series_term(system, q, cap=cap)
        terms.append((q, t))
        acc.append(t)
        partial.append((q, math.fsum(acc)))
    last = [s for _, s in partial[-10:]]
    tail = max(last) - min(last) if len(last) > 1 else 0.0
    return SingularSeriesTruncation(Q_max, partial, terms, partial[-1][1], tail)


# singular integral -------------------------------------------------------------

def _lipschitz(f) -> float:
    # sum_j max_{[-1,1]^n} |d f / d x_j| <= sum over monomials |c| * d
    return float(sum(abs(c) for _, c in f.items()) * f.degree)


def _component_grids(system: FormSystem, box: Box, T: float, grid: int, cell_phase: float):
    """Midpoint nodes (values of the restricted forms) and cell volume per component."""
    lip = sum(_lipschitz(f) for f in system.forms)
    h_max = cell_phase / (2 * math.pi * max(T, 1e-12) * max(lip, 1e-12))
    out = []
    resolution = grid
    for comp in components(system):
        axes = []
        cell = 1.0
        for j in comp:
            lo, hi = (float(v) for v in box.intervals[j])
            w = hi - lo
            G = max(grid, math.ceil(w / h_max)) if w > 0 else 1
            resolution = max(resolution, G)
            axes.append(lo + (np.arange(G) + 0.5) * (w / G))
            cell *= w / G
        mesh = np.meshgrid(*axes, indexing="ij")
        X = np.stack([m.ravel() for m in mesh], axis=1)
        forms = [restrict(f, comp) for f in system.forms]
        vals = np.stack([_eval_float(f, X) for f in forms], axis=1)
        out.append((vals, cell))
    return out, resolution


def _eval_float(f, X: np.ndarray) -> np.ndarray:
    exps, coefs = f.arrays()
    if exps.shape[0] == 0:
        return np.zeros(X.shape[0])
    total = np.zeros(X.shape[0])
    for e, c in zip(exps, coefs):
        total += float(c) * np.prod(X ** e, axis=1)
    return total


def inner_integral(system: FormSystem, box: Box, gamma: Sequence[float], grid: int = 16,
                   cell_phase: float = math.pi / 4, T: Optional[float] = None) -> complex:
    """Midpoint-rule value of int_B e(gamma . f(x)) dx."""
    gamma = np.asarray(gamma, dtype=float)
    T = float(np.max(np.abs(gamma))) if T is None else T
    comps, _ = _component_grids(system, box, T, grid, cell_phase)
    val = complex(1.0)
    for vals, cell in comps:
        val *= cell * np.exp(2j * np.pi * (vals @ gamma)).sum()
    return val


def _truncated_integral(system: FormSystem, box: Box, T: float, grid: int,
                        cell_phase: float) -> tuple[complex, int]:
    r = system.r
    comps, resolution = _component_grids(system, box, T, grid, cell_phase)
    fmax = sum(float(sum(abs(c) for _, c in f.items())) for f in system.forms)
    h = cell_phase / (2 * math.pi * max(fmax, 1e-12))
    N = max(2, math.ceil(2 * T / h))
    step = 2 * T / N
    g1 = -T + (np.arange(N) + 0.5) * step
    mesh = np.meshgrid(*([g1] * r), indexing="ij")
    gam = np.stack([m.ravel() for m in mesh], axis=1)
    integrand = np.ones(gam.shape[0], dtype=complex)
    chunk = max(1, 2 ** 22 // max(max(len(v) for v, _ in comps), 1))
    for vals, cell in comps:
        part = np.empty(gam.shape[0], dtype=complex)
        for s in range(0, gam.shape[0], chunk):
            ph = gam[s:s + chunk] @ vals.T
            part[s:s + chunk] = cell * np.exp(2j * np.pi * ph).sum(axis=1)
        integrand *= part
    w = step ** r
    re = math.fsum((integrand.real * w).tolist())
    im = math.fsum((integrand.imag * w).tolist())
    return complex(re, im), resolution


def singular_integral(system: FormSystem, box: Box, T_max: float, grid: int = 16, *,
                      cell_phase: float = math.pi / 4) -> SingularIntegralTruncation:
    """Nested midpoint quadrature of J truncated to |gamma|_inf <= T_max.

    The inner grid is refined until the phase varies by at most ``cell_phase``
    across a cell at |gamma| = T_max; the trace holds values at T/4, T/2, T.
    """
    if T_max <= 0:
        raise ValueError("T_max must be positive")
    if grid < 16:
        raise ValueError("grid must be >= 16 per dimension")
    if system.degree < 2:
        raise ValueError("singular integral needs d >= 2")
    if box.n != system.n_vars:
        raise ValueError("box dimension does not match the system")
    trace = []
    resolution = grid
    val = 0j
    for T in (T_max / 4, T_max / 2, T_max):
        val, resolution = _truncated_integral(system, box, float(T), grid, cell_phase)
        trace.append((float(T), val.real))
    scale = max(abs(val.real), 1e-12)
    if abs(val.imag) > 1e-6 * max(scale, 1.0):
        raise ArithmeticError(f"singular integral has imaginary part {val.imag}")
    prev = trace[1][1]
    converged = abs(val.real - prev) <= 0.2 * scale
    return SingularIntegralTruncation(float(T_max), resolution, val.real, trace, converged,
                                      val.imag)


# prediction vs counts --------------------------------------------------------

@dataclass
class PredictionReport:
    rows: list[tuple]  # (P, N, prediction, ratio)
    singular_series: SingularSeriesTruncation
    singular_integral: SingularIntegralTruncation
    exponent: int
    verdict: str
    tags: list[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {"rows": [{"P": str(P), "N": N, "prediction": pred, "ratio": ratio}
                         for P, N, pred, ratio in self.rows],
                "singular_series": self.singular_series.to_dict(),
                "singular_integral": self.singular_integral.to_dict(),
                "exponent": self.exponent, "verdict": self.verdict, "tags": self.tags,
                "construction": PROVENANCE}


def predict_and_verify(system: FormSystem, box: Box, P_list: Sequence, Q_max: int = 50,
                       T_max: float = 8.0, *, grid: int = 16, workers: int = 1,
                       check_hypothesis: bool = True) -> PredictionReport:
    """Table of N(P) against S J P^(n - rd) with ratios.

    The verdict is "consistent" when the last ratio is within 10% of 1 and no
    farther from 1 than the first.
    """
    n, r, d = system.n_vars, system.r, system.degree
    ss = singular_series(system, Q_max)
    si = singular_integral(system, box, T_max, grid)
    expo = n - r * d
    rows = []
    for P in P_list:
        P = nm.as_fraction(P)
        N = count_solutions(system, box, P, workers=workers).count
        pred = ss.value * si.value * float(P) ** expo
        rows.append((P, N, pred, N / pred if pred != 0 else float("nan")))
    tags = []
    if expo <= 0:
        verdict = "descriptive"
        tags.append("n <= rd: no growth is predicted, report is descriptive only")
    else:
        first, last = abs(rows[0][3] - 1), abs(rows[-1][3] - 1)
        verdict = "consistent" if last <= 0.1 and last <= first else "not consistent"
    vol = float(box.volume())
    t = [v for _, v in si.convergence_trace]
    if abs(si.value) < 0.05 * max(vol, 1e-12) or (t[0] > t[1] > t[2] > 0 and t[2] < 0.7 * t[0]):
        tags.append("singular integral small or shrinking with T: real solubility obstruction "
                    "suspected")
    if not si.converged:
        tags.append("singular integral trace not converged")
    if check_hypothesis:
        from .invariants import check_theorem_conditions
        try:
            rep = check_theorem_conditions(system, b_bound=2, compute_v_star=False)
            ok = rep.verdicts["pencil_singularity"] == "pass"
        except (ValueError, OverflowError):
            ok = False
        tags.append("hypothesis satisfied" if ok
                    else "hypothesis not satisfied: no guarantee")
    return PredictionReport(rows, ss, si, expo, verdict, tags)
