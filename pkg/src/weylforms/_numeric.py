"""Shared machinery: exact power comparisons, phases, vectorized enumeration."""

from __future__ import annotations

import itertools
import math
import re
from fractions import Fraction
from typing import Iterator, Sequence

import mpmath
import numpy as np

from .forms import Form, FormSystem, partial

INT64_SAFE = 2 ** 62


class PrecisionError(ArithmeticError):
    """An interval comparison could not be decided at the working precision."""


def as_fraction(v) -> Fraction:
    if isinstance(v, Fraction):
        return v
    if isinstance(v, (int, np.integer)):
        return Fraction(int(v))
    if isinstance(v, float):
        return Fraction(v)
    if isinstance(v, str):
        from .forms import parse_fraction
        return parse_fraction(v)
    raise TypeError(f"expected a rational number, got {v!r}")


def ge_power(x: Fraction, P: Fraction, e: Fraction) -> bool:
    """Exact test x >= P**e for x >= 0, P > 0 and rational e."""
    if x < 0:
        return False
    if x == 0:
        return False
    num, den = e.numerator, e.denominator
    return x ** den >= P ** num


def floor_power(P, e) -> int:
    """Largest integer B with B <= P**e (P > 0)."""
    P, e = as_fraction(P), as_fraction(e)
    with mpmath.workdps(50):
        guess = int(mpmath.floor(mpmath.power(mpmath.mpf(P.numerator) / P.denominator,
                                              mpmath.mpf(e.numerator) / e.denominator)))
    bound = P ** e.numerator
    B = max(guess - 1, 0)
    while Fraction(B + 1) ** e.denominator <= bound:
        B += 1
    while B > 0 and Fraction(B) ** e.denominator > bound:
        B -= 1
    return B


def _raw_to_fraction(raw) -> Fraction:
    sign, man, exp, _ = raw
    if not man and exp:
        raise PrecisionError("interval endpoint is not finite")
    v = Fraction(int(man)) * Fraction(2) ** int(exp)
    return -v if sign else v


def mpf_to_fraction(x) -> Fraction:
    """Exact value of an mpf; for an mpmath interval, its lower endpoint."""
    if hasattr(x, "_mpi_"):
        return _raw_to_fraction(x._mpi_[0])
    return _raw_to_fraction(mpmath.mpf(x)._mpf_)


def interval_bounds(x) -> tuple[Fraction, Fraction]:
    """Exact endpoints of an mpmath interval (or a degenerate one for an mpf)."""
    if hasattr(x, "_mpi_"):
        return _raw_to_fraction(x._mpi_[0]), _raw_to_fraction(x._mpi_[1])
    v = mpf_to_fraction(x)
    return v, v


def ceil_scaled_power(D: int, P, e) -> int:
    """Smallest integer T with T >= D * P**e."""
    P, e = as_fraction(P), as_fraction(e)
    with mpmath.workdps(50):
        guess = int(mpmath.ceil(D * mpmath.power(mpmath.mpf(P.numerator) / P.denominator,
                                                 mpmath.mpf(e.numerator) / e.denominator)))
    T = max(guess - 2, 0)
    while not ge_power(Fraction(T, D), P, e):
        T += 1
    while T > 0 and ge_power(Fraction(T - 1, D), P, e):
        T -= 1
    return T


def power_float(P, e) -> float:
    P, e = as_fraction(P), as_fraction(e)
    return float(mpmath.power(mpmath.mpf(P.numerator) / P.denominator,
                              mpmath.mpf(e.numerator) / e.denominator))


def log_base(x, P) -> float:
    if x == 0:
        return float("-inf")
    P = as_fraction(P)
    return float(mpmath.log(mpmath.mpf(abs(x.numerator if isinstance(x, Fraction) else x))
                            / (x.denominator if isinstance(x, Fraction) else 1))
                 / mpmath.log(mpmath.mpf(P.numerator) / P.denominator))


# real inputs -----------------------------------------------------------

_SAFE_NAMES = {"sqrt", "pi", "e", "log", "exp"}


def is_rational_text(text: str) -> bool:
    return re.fullmatch(r"\s*[+-]?\d+(/\d+)?\s*", text) is not None


def parse_real(text: str, precision_bits: int = 128):
    """Exact Fraction for ``p`` / ``p/q``; otherwise an mpmath interval for a
    closed-form expression such as ``sqrt(2)`` or ``pi/7``.  Decimal notation is
    rejected so that no input is silently rounded."""
    t = text.strip()
    if re.fullmatch(r"[+-]?\d+(/\d+)?", t):
        return Fraction(t)
    if "." in t:
        raise ValueError(f"decimal input {text!r} rejected; give p/q or a closed form")
    names = set(re.findall(r"[A-Za-z_]+", t))
    if not names <= _SAFE_NAMES:
        raise ValueError(f"unsupported names in {text!r}: {sorted(names - _SAFE_NAMES)}")
    ctx = mpmath.iv
    old = ctx.prec
    ctx.prec = precision_bits + 16
    try:
        env = {"sqrt": ctx.sqrt, "pi": ctx.pi, "e": ctx.e, "log": ctx.log,
               "exp": ctx.exp}
        val = eval(t.replace("^", "**"), {"__builtins__": {}}, env)  # noqa: S307
        return ctx.mpf(val)
    finally:
        ctx.prec = old


class Phase:
    """alpha as scaled integers: alpha_i in [A_i - R, A_i + R] / D.

    Rational alpha has R = 0 and D the common denominator; interval alpha uses
    D = 2**bits.
    """

    def __init__(self, alpha: Sequence, precision_bits: int = 128):
        self.exact = True
        vals = []
        for a in alpha:
            if isinstance(a, str):
                a = parse_real(a, precision_bits)
            if isinstance(a, (Fraction, int, np.integer, float)):
                vals.append(as_fraction(a))
            else:
                self.exact = False
                vals.append(a)
        if self.exact:
            D = 1
            for v in vals:
                D = D * v.denominator // math.gcd(D, v.denominator)
            self.D = D
            self.A = [int(v * D) for v in vals]
            self.R = 0
            self.fractions = vals
        else:
            D = 2 ** precision_bits
            self.D = D
            A = []
            R = 0
            for v in vals:
                if isinstance(v, Fraction):
                    lo = hi = v * D
                else:
                    lo, hi = (t * D for t in interval_bounds(v))
                mid = round((lo + hi) / 2)
                A.append(int(mid))
                R = max(R, math.ceil(max(hi - mid, mid - lo)) + 1)
            self.A = A
            self.R = R
            self.fractions = None
        self.r = len(self.A)
        self.floats = [float(Fraction(a, self.D)) for a in self.A]

    def is_zero(self) -> bool:
        return self.exact and not any(self.A)


# enumeration -----------------------------------------------------------

def box_chunks(ranges: Sequence[tuple[int, int]], chunk: int = 1 << 16) -> Iterator[np.ndarray]:
    """All integer points of prod [lo, hi] in lexicographic order, in chunks."""
    m = len(ranges)
    if m == 0:
        yield np.zeros((1, 0), dtype=np.int64)
        return
    if any(hi < lo for lo, hi in ranges):
        return
    sizes = [hi - lo + 1 for lo, hi in ranges]
    # inner block: as many trailing coordinates as fit in the chunk
    t = 0
    block = 1
    while t < m and block * sizes[m - 1 - t] <= chunk:
        block *= sizes[m - 1 - t]
        t += 1
    if t == 0:
        t = 1
    inner_ranges = ranges[m - t:]
    grids = np.meshgrid(*[np.arange(lo, hi + 1, dtype=np.int64) for lo, hi in inner_ranges],
                        indexing="ij")
    inner = np.stack([g.ravel() for g in grids], axis=1)
    outer_ranges = ranges[:m - t]
    for prefix in itertools.product(*[range(lo, hi + 1) for lo, hi in outer_ranges]):
        if prefix:
            pre = np.broadcast_to(np.array(prefix, dtype=np.int64), (inner.shape[0], len(prefix)))
            yield np.concatenate([pre, inner], axis=1)
        else:
            yield inner


def shell_chunks(m: int, B: int) -> Iterator[np.ndarray]:
    """Points of [-B, B]^m in graded order: by sup-norm shell h = 0..B; within a
    shell by the first coordinate k with |x_k| = h, then x_k = +h before -h, then
    lexicographically in the remaining coordinates."""
    yield np.zeros((1, m), dtype=np.int64)
    for h in range(1, B + 1):
        for k in range(m):
            for s in (h, -h):
                ranges = [(-(h - 1), h - 1)] * k + [(s, s)] + [(-h, h)] * (m - k - 1)
                yield from box_chunks(ranges)


def _pow_cols(X: np.ndarray, exps: np.ndarray) -> np.ndarray:
    out = np.ones((X.shape[0], exps.shape[0]), dtype=X.dtype)
    for j in range(exps.shape[1]):
        col = exps[:, j]
        if not col.any():
            continue
        xj = X[:, j]
        for e in np.unique(col[col > 0]):
            mask = col == e
            out[:, mask] *= (xj ** int(e))[:, None]
    return out


def eval_form(f: Form, X: np.ndarray) -> np.ndarray:
    """Values of f at each row of X (dtype preserved: int64 or object)."""
    exps, coefs = f.arrays()
    if exps.shape[0] == 0:
        return np.zeros(X.shape[0], dtype=X.dtype)
    mons = _pow_cols(X, exps)
    if X.dtype == object:
        return mons.dot(coefs)
    return mons @ coefs.astype(np.int64)


def eval_form_mod(f: Form, X: np.ndarray, p: int) -> np.ndarray:
    """f(X) mod p for int64 X with entries in [0, p); p < 2**31."""
    exps, coefs = f.arrays()
    total = np.zeros(X.shape[0], dtype=np.int64)
    for e, c in zip(exps, coefs):
        t = np.full(X.shape[0], int(c) % p, dtype=np.int64)
        for j, k in enumerate(e):
            for _ in range(int(k)):
                t = (t * X[:, j]) % p
        total = (total + t) % p
    return total


def value_bound(f: Form, R: int) -> int:
    return sum(abs(c) for _, c in f.items()) * max(R, 1) ** f.degree


def pick_dtype(bound: int):
    return np.int64 if bound < INT64_SAFE else object


class GammaEvaluator:
    """Vectorized Gamma_i(e_j, x^(2), ..., x^(d)) for all i, j.

    Uses Gamma_f(e_j, y_2, ..., y_d) = Gamma_{df/dx_j}(y_2, ..., y_d) and the
    inclusion-exclusion identity for the degree d-1 derivative forms.
    """

    def __init__(self, system: FormSystem):
        self.system = system
        d, n = system.degree, system.n_vars
        if d < 2:
            raise ValueError("multilinear rows need degree >= 2")
        self.m = (d - 1) * n
        self.partials = [[partial(f, j) for j in range(n)] for f in system.forms]
        k = d - 1
        self.subsets = []
        for size in range(1, k + 1):
            sign = -1 if (k - size) % 2 else 1
            for S in itertools.combinations(range(k), size):
                self.subsets.append((sign, S))

    def bound(self, B: int) -> int:
        d = self.system.degree
        tot = 0
        for row in self.partials:
            for g in row:
                if not g.is_zero():
                    tot = max(tot, value_bound(g, (d - 1) * B))
        return tot * len(self.subsets) + 1

    def __call__(self, X: np.ndarray) -> np.ndarray:
        """X has shape (N, (d-1)n) holding x^(2), ..., x^(d) back to back;
        returns an (N, r, n) array."""
        n = self.system.n_vars
        k = self.system.degree - 1
        N = X.shape[0]
        sums = {}
        for _, S in self.subsets:
            acc = np.zeros((N, n), dtype=X.dtype)
            for i in S:
                acc = acc + X[:, i * n:(i + 1) * n]
            sums[S] = acc
        out = np.zeros((N, self.system.r, n), dtype=X.dtype)
        for i, row in enumerate(self.partials):
            for j, g in enumerate(row):
                if g.is_zero():
                    continue
                col = np.zeros(N, dtype=X.dtype)
                for sign, S in self.subsets:
                    v = eval_form(g, sums[S])
                    col = col + v if sign > 0 else col - v
                out[:, i, j] = col
        return out


def distance_numerators(G: np.ndarray, phase: Phase) -> tuple[np.ndarray, np.ndarray]:
    """For Gamma values G of shape (N, r, n): numerator of ||sum_i alpha_i G_ij||
    in units of 1/D, and the error radius in the same units."""
    D = phase.D
    obj = G.dtype == object or D >= 2 ** 30 or phase.R
    if obj:
        Gm = G.astype(object)
        acc = np.zeros(G.shape[0:1] + G.shape[2:], dtype=object)
        err = np.zeros_like(acc)
        for i, A in enumerate(phase.A):
            acc = acc + A * Gm[:, i, :]
            if phase.R:
                err = err + phase.R * np.abs(Gm[:, i, :])
        res = acc % D
        dist = np.minimum(res, D - res)
        return dist, err
    acc = np.zeros(G.shape[0:1] + G.shape[2:], dtype=np.int64)
    for i, A in enumerate(phase.A):
        acc = (acc + (A % D) * (G[:, i, :] % D)) % D
    dist = np.minimum(acc, D - acc)
    return dist, np.zeros_like(dist)


def near_mask(G: np.ndarray, phase: Phase, T: int) -> np.ndarray:
    """Rows whose every j satisfies ||sum_i alpha_i G_ij|| < delta, with
    T = ceil(D * delta).  Raises PrecisionError on undecidable rows."""
    dist, err = distance_numerators(G, phase)
    if phase.R:
        yes = (dist + err) < T
        no = (dist - err) >= T
        amb = ~(yes | no)
        if amb.any():
            raise PrecisionError("near-integer test undecidable at working precision; "
                                 "raise precision_bits")
        return yes.all(axis=1)
    return (dist < T).all(axis=1)
