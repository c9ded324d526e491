"""Singular loci, the Birch locus V*, the pencil invariant u, quadratic ranks,
h-invariant bounds and the theorem-hypothesis checkers.

Dimensions are estimated from point counts over F_p: an affine variety of
dimension e has roughly C p^e points.  Quadratic forms bypass sampling since
their singular loci are kernels of the Hessian.
"""

from __future__ import annotations

import itertools
import math
import statistics
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from . import _numeric as nm
from .exact import rank, rank_mod_p
from .forms import Form, FormSystem, partial, pencil_form

DEFAULT_PRIMES = (5, 7, 11, 101)
PHI_TABLE = {2: 1, 3: 1, 4: 3, 5: 13}


@dataclass
class FpDimensionEstimate:
    primes: list[int]
    counts: list[float]
    dim_estimate: int
    per_prime_slopes: list[float]
    consistent: bool
    methods: list[str] = field(default_factory=list)
    skipped_primes: list[int] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {"primes": self.primes, "counts": [int(c) if float(c).is_integer() else c
                                                  for c in self.counts],
                "dim_estimate": self.dim_estimate, "per_prime_slopes": self.per_prime_slopes,
                "consistent": self.consistent, "methods": self.methods,
                "skipped_primes": self.skipped_primes}


# point counting over F_p --------------------------------------------------

def _wilson(hits: int, n: int, z: float = 1.96) -> tuple[float, float]:
    if n == 0:
        return 0.0, 1.0
    ph = hits / n
    den = 1 + z * z / n
    centre = (ph + z * z / (2 * n)) / den
    half = z * math.sqrt(ph * (1 - ph) / n + z * z / (4 * n * n)) / den
    return max(0.0, centre - half), min(1.0, centre + half)


def _vanishing_mask(equations: Sequence[Form], X: np.ndarray, p: int) -> np.ndarray:
    mask = np.ones(X.shape[0], dtype=bool)
    for f in equations:
        idx = np.nonzero(mask)[0]
        if idx.size == 0:
            break
        vals = nm.eval_form_mod(f, X[idx], p)
        mask[idx[vals != 0]] = False
    return mask


def count_points_fp(equations: Sequence[Form], n_vars: int, p: int, *,
                    trials: int = 2 * 10 ** 7, exact_threshold: int = 10 ** 7,
                    rng: Optional[np.random.Generator] = None, target_hits: int = 64):
    """Number of common zeros in F_p^n: exact when p^n <= exact_threshold,
    otherwise a uniform-sampling estimate.  Returns (count, method, info)."""
    if p ** n_vars <= exact_threshold:
        total = 0
        for X in nm.box_chunks([(0, p - 1)] * n_vars):
            total += int(np.count_nonzero(_vanishing_mask(equations, X, p)))
        return float(total), "exact", {}
    rng = rng if rng is not None else np.random.default_rng(0)
    hits = samples = 0
    batch = 1 << 20
    while samples < trials and hits < target_hits:
        m = min(batch, trials - samples)
        X = rng.integers(0, p, size=(m, n_vars), dtype=np.int64)
        hits += int(np.count_nonzero(_vanishing_mask(equations, X, p)))
        samples += m
    lo, hi = _wilson(hits, samples)
    scale = float(p) ** n_vars
    return scale * hits / samples, "sampled", {"hits": hits, "samples": samples,
                                               "wilson": [scale * lo, scale * hi]}


def _summarize(primes, counts, methods, skipped, resolved=None) -> FpDimensionEstimate:
    resolved = list(resolved) if resolved is not None else [True] * len(primes)
    slopes = []
    for p, c in zip(primes, counts):
        slopes.append(-1.0 if c <= 0 else math.log(c) / math.log(p))
    usable = [s for s, ok in zip(slopes, resolved) if ok]
    if not usable:
        return FpDimensionEstimate(list(primes), list(counts), -1, slopes, False, methods,
                                   skipped)
    rounded = {round(s) for s in usable}
    # a sampled prime with no hits is unresolved: kept in the table, left out of the median
    consistent = len(rounded) == 1 and all(resolved)
    dim = round(statistics.median(usable))
    return FpDimensionEstimate(list(primes), list(counts), int(dim), slopes, consistent,
                               methods, skipped)


def _bad_prime(equations: Sequence[Form], p: int) -> bool:
    return any(not f.is_zero() and f.content() % p == 0 for f in equations)


def variety_dimension_fp(equations: Sequence[Form], primes: Sequence[int] = DEFAULT_PRIMES, *,
                         trials: int = 2 * 10 ** 7, exact_threshold: int = 10 ** 7,
                         seed: int = 0) -> FpDimensionEstimate:
    """Dimension of the common zero set of ``equations`` from F_p point counts.

    The per-prime estimate is log_p(count); the reported dimension is the
    rounded median, and disagreement between primes is flagged, not resolved.
    """
    eqs = [f for f in equations if not f.is_zero()]
    if not equations:
        raise ValueError("need at least one equation")
    n = equations[0].n_vars
    rng = np.random.default_rng(seed)
    used, counts, methods, skipped, resolved = [], [], [], [], []
    for p in primes:
        if _bad_prime(eqs, p):
            skipped.append(p)
            continue
        if not eqs:
            c, method, info = float(p) ** n, "exact", {}
        else:
            c, method, info = count_points_fp(eqs, n, p, trials=trials,
                                              exact_threshold=exact_threshold, rng=rng)
        used.append(p)
        counts.append(c)
        methods.append(method)
        resolved.append(method == "exact" or info["hits"] > 0)
    return _summarize(used, counts, methods, skipped, resolved)


# quadratic forms -------------------------------------------------------------

def hessian(f: Form) -> list[list[int]]:
    """Integer matrix of second partials (twice the Gram matrix)."""
    if f.degree != 2:
        raise ValueError("hessian here is for quadratic forms")
    n = f.n_vars
    H = [[0] * n for _ in range(n)]
    for exp, c in f.items():
        idx = [j for j, e in enumerate(exp) for _ in range(e)]
        j, k = idx
        if j == k:
            H[j][j] += 2 * c
        else:
            H[j][k] += c
            H[k][j] += c
    return H


def quadratic_rank(f: Form) -> int:
    """Rank of the symmetric matrix A with f(x) = x^T A x."""
    if f.degree != 2:
        raise ValueError("quadratic_rank needs a quadratic form")
    if f.is_zero():
        return 0
    return rank(hessian(f))


def h_invariant_bounds(f: Form) -> tuple[int, int]:
    """Bounds on the least h with f = sum_{i<=h} g_i g_i'.

    Quadratics: a product of two linear forms has rank <= 2, and diagonalizing
    gives rank(A) squares, so ceil(rank/2) <= h <= rank.  Higher degree: 1 and
    the number of monomials.
    """
    if f.is_zero():
        raise ValueError("h-invariant of the zero form is undefined")
    if f.degree == 2:
        rk = quadratic_rank(f)
        return (rk + 1) // 2, rk
    if f.degree == 1:
        return 1, 1
    return 1, len(f)


# singular loci ---------------------------------------------------------------

def singular_locus_dimension(f: Form, primes: Sequence[int] = DEFAULT_PRIMES, *,
                             trials: int = 2 * 10 ** 7, exact_threshold: int = 10 ** 7,
                             seed: int = 0) -> FpDimensionEstimate:
    """Dimension of {x : grad f(x) = 0}.  Quadratics return n - rank exactly,
    with per-prime kernel sizes p^(n - rank_p) as counts."""
    if f.is_zero():
        raise ValueError("singular locus of the zero form is the whole space")
    n = f.n_vars
    good = [p for p in primes if p > f.degree]
    skipped = [p for p in primes if p <= f.degree]
    if f.degree == 2:
        H = hessian(f)
        rk = rank(H)
        counts, slopes, methods = [], [], []
        ok = True
        used = []
        for p in good:
            rp = rank_mod_p(H, p)
            if rp != rk:
                skipped.append(p)
                continue
            used.append(p)
            counts.append(float(p) ** (n - rp))
            slopes.append(float(n - rp))
            methods.append("exact-rank")
        return FpDimensionEstimate(used, counts, n - rk, slopes, ok, methods, skipped)
    grads = [partial(f, j) for j in range(n)]
    est = variety_dimension_fp(grads, good, trials=trials, exact_threshold=exact_threshold,
                               seed=seed)
    est.skipped_primes = skipped + est.skipped_primes
    return est


def _subspaces(r: int, j: int, p: int):
    """Bases (RREF) of all j-dimensional subspaces of F_p^r."""
    for pivots in itertools.combinations(range(r), j):
        free_slots = [(row, c) for row, pc in enumerate(pivots) for c in range(pc + 1, r)
                      if c not in pivots]
        for vals in itertools.product(range(p), repeat=len(free_slots)):
            basis = [[0] * r for _ in range(j)]
            for row, pc in enumerate(pivots):
                basis[row][pc] = 1
            for (row, c), v in zip(free_slots, vals):
                basis[row][c] = v
            yield basis


def _gaussian_binomial(k: int, j: int, p: int) -> int:
    num = den = 1
    for i in range(j):
        num *= p ** (k - i) - 1
        den *= p ** (i + 1) - 1
    return num // den


class SubspaceCapExceeded(RuntimeError):
    pass


def _quadratic_birch_count(system: FormSystem, p: int, subspace_cap: int = 10 ** 6) -> int:
    """Exact |V*(F_p)| for a quadratic system.

    x lies in V* iff sum_i b_i H_i x = 0 for some b != 0.  With B(x) the space
    of such b and M_k = #{x : dim B(x) = k}, summing kernel sizes over all
    j-dimensional subspaces W gives S_j = sum_k M_k [k choose j]_p, which is
    triangular in M_k.
    """
    r, n = system.r, system.n_vars
    Hs = [[[v % p for v in row] for row in hessian(f)] for f in system.forms]
    S = {}
    for j in range(1, r + 1):
        total = 0
        count = 0
        for basis in _subspaces(r, j, p):
            count += 1
            if count > subspace_cap:
                raise SubspaceCapExceeded("too many subspaces for the exact V* count")
            stacked = []
            for b in basis:
                stacked += [[sum(bi * H[a][c] for bi, H in zip(b, Hs)) % p for c in range(n)]
                            for a in range(n)]
            total += p ** (n - rank_mod_p(stacked, p))
        S[j] = total
    M = {}
    for k in range(r, 0, -1):
        M[k] = S[k] - sum(M[kk] * _gaussian_binomial(kk, k, p) for kk in range(k + 1, r + 1))
    return sum(M.values())


def jacobian_minors(system: FormSystem) -> list[Form]:
    """All r x r minors of the Jacobian matrix (d f_i / d x_j), as forms."""
    r, n = system.r, system.n_vars
    J = [[partial(f, j) for j in range(n)] for f in system.forms]
    out = []
    for cols in itertools.combinations(range(n), r):
        acc = None
        for perm in itertools.permutations(range(r)):
            sign = 1
            for a in range(r):
                for b in range(a + 1, r):
                    if perm[a] > perm[b]:
                        sign = -sign
            term = None
            for i in range(r):
                g = J[i][cols[perm[i]]]
                term = g if term is None else term * g
            if term.is_zero():
                continue
            term = term.scale(sign)
            acc = term if acc is None else acc + term
        if acc is not None and not acc.is_zero():
            out.append(acc)
    return out


def birch_locus_dimension(system: FormSystem, primes: Sequence[int] = DEFAULT_PRIMES, *,
                          trials: int = 2 * 10 ** 7, exact_threshold: int = 10 ** 7,
                          seed: int = 0, method: str = "auto") -> FpDimensionEstimate:
    """dim V*, V* = {x : rank (d f_i / d x_j) < r}.

    ``method``: ``"kernels"`` (quadratic systems, exact count via unions of
    Hessian kernels), ``"minors"`` (common zeros of all r x r Jacobian minors)
    or ``"auto"``.
    """
    d = system.degree
    if d < 2:
        raise ValueError("V* needs degree >= 2")
    if system.r == 1:
        return singular_locus_dimension(system.forms[0], primes, trials=trials,
                                        exact_threshold=exact_threshold, seed=seed)
    fallback = method == "auto"
    if method == "auto":
        method = "kernels" if d == 2 else "minors"
    if method == "kernels":
        if d != 2:
            raise ValueError("kernel method needs a quadratic system")
        used, counts, skipped = [], [], []
        ranks = [rank(hessian(f)) for f in system.forms]
        for p in primes:
            if p == 2 or any(f.content() % p == 0 for f in system.forms) or any(
                    rank_mod_p(hessian(f), p) != rk for f, rk in zip(system.forms, ranks)):
                skipped.append(p)
                continue
            try:
                c = _quadratic_birch_count(system, p)
            except SubspaceCapExceeded:
                if not fallback:
                    raise
                return birch_locus_dimension(system, primes, trials=trials,
                                             exact_threshold=exact_threshold, seed=seed,
                                             method="minors")
            used.append(p)
            counts.append(float(c))
        return _summarize(used, counts, ["exact-kernels"] * len(used), skipped)
    minors = jacobian_minors(system)
    if not minors:
        n = system.n_vars
        good = [p for p in primes if p > d]
        return FpDimensionEstimate(good, [float(p) ** n for p in good], n,
                                   [float(n)] * len(good), True, ["identically-zero"] * len(good),
                                   [p for p in primes if p <= d])
    good = [p for p in primes if p > d]
    est = variety_dimension_fp(minors, good, trials=trials, exact_threshold=exact_threshold,
                               seed=seed)
    est.skipped_primes = [p for p in primes if p <= d] + est.skipped_primes
    return est


# the pencil invariant u ----------------------------------------------------

def pencil_vectors(r: int, bound: int):
    """Primitive b in Z^r with |b|_inf <= bound and first nonzero entry positive."""
    for b in itertools.product(range(-bound, bound + 1), repeat=r):
        if not any(b):
            continue
        first = next(v for v in b if v)
        if first < 0:
            continue
        g = 0
        for v in b:
            g = math.gcd(g, v)
        if g == 1:
            yield b


@dataclass
class UEstimate:
    u: int
    b: tuple[int, ...]
    b_bound: int
    dims: dict  # b -> dimension estimate
    consistent: bool
    extra_random: int = 0

    def __int__(self):
        return self.u

    def to_dict(self) -> dict:
        return {"u": self.u, "attained_at": list(self.b), "b_bound": self.b_bound,
                "extra_random": self.extra_random, "searched": len(self.dims),
                "consistent": self.consistent}


def u_invariant_search(system: FormSystem, b_bound: int = 5,
                       primes: Sequence[int] = DEFAULT_PRIMES, *, extra_random: int = 4,
                       seed: int = 0, trials: int = 2 * 10 ** 7,
                       exact_threshold: int = 10 ** 7) -> UEstimate:
    """max dim Sing(f_b) over primitive b with |b| <= b_bound plus a few random
    large b.  Sing(f_b) = Sing(f_{lambda b}), so only primitive b up to sign
    are searched.  This bounds u from below."""
    if b_bound < 1:
        raise ValueError("b_bound must be >= 1")
    rng = np.random.default_rng(seed)
    bs = list(pencil_vectors(system.r, b_bound))
    for _ in range(extra_random if system.r > 1 else 0):
        b = tuple(int(v) for v in rng.integers(-1000, 1001, size=system.r))
        if any(b):
            g = math.gcd(*b)
            b = tuple(v // g for v in b)
            if next(v for v in b if v) < 0:
                b = tuple(-v for v in b)
            if b not in bs:
                bs.append(b)
    dims = {}
    consistent = True
    nonzero = False
    for b in bs:
        fb = pencil_form(system, b)
        if fb.is_zero():
            dims[b] = system.n_vars
            continue
        nonzero = True
        est = singular_locus_dimension(fb, primes, trials=trials,
                                       exact_threshold=exact_threshold, seed=seed)
        consistent &= est.consistent
        dims[b] = est.dim_estimate
    if not nonzero:
        raise ValueError("every searched pencil member is zero (degenerate system)")
    best = max(bs, key=lambda b: (dims[b], [-abs(v) for v in b]))
    return UEstimate(dims[best], best, b_bound, dims, consistent,
                     extra_random if system.r > 1 else 0)


def u_invariant(system: FormSystem, b_bound: int = 5,
                primes: Sequence[int] = DEFAULT_PRIMES, **kw) -> int:
    return u_invariant_search(system, b_bound, primes, **kw).u


# theorem checkers ------------------------------------------------------------

def phi(d: int) -> tuple[int, bool]:
    """(phi(d), exact).  Known values for d <= 5; for d >= 6 the ceiling of
    (log 2)^-d d!, which is only an upper bound."""
    if d in PHI_TABLE:
        return PHI_TABLE[d], True
    if d < 2:
        raise ValueError("phi is defined for d >= 2")
    return math.ceil(math.factorial(d) / math.log(2) ** d), False


def birch_threshold(r: int, d: int) -> int:
    """r(r+1)(d-1)2^(d-1)."""
    return r * (r + 1) * (d - 1) * 2 ** (d - 1)


def schmidt_threshold(r: int, d: int) -> int:
    """phi(d) (r(r+1)(d-1)2^(d-1) + (d-1)r(r-1))."""
    return phi(d)[0] * (birch_threshold(r, d) + (d - 1) * r * (r - 1))


def h_threshold(r: int, d: int) -> int:
    """phi(d) r(r+1)(d-1)2^(d-1)."""
    return phi(d)[0] * birch_threshold(r, d)


@dataclass
class InvariantReport:
    n: int
    r: int
    d: int
    u: int
    u_attained_at: tuple
    b_bound: int
    dim_V_star: Optional[int]
    dim_V_star_consistent: Optional[bool]
    h_lower: int
    h_upper: int
    quadratic_ranks: Optional[dict]
    min_pencil_rank: Optional[int]
    g_tilde_lower: int
    pencil_condition_ok: bool
    h_condition_ok: bool
    verdicts: dict
    margins: dict
    thresholds: dict
    phi: tuple
    v_star_detail: Optional[FpDimensionEstimate] = None

    def to_dict(self) -> dict:
        return {"n": self.n, "r": self.r, "d": self.d,
                "u": self.u, "u_attained_at": list(self.u_attained_at), "b_bound": self.b_bound,
                "dim_V_star": self.dim_V_star, "dim_V_star_consistent": self.dim_V_star_consistent,
                "u_le_dim_V_star": None if self.dim_V_star is None else self.u <= self.dim_V_star,
                "h_lower": self.h_lower, "h_upper": self.h_upper,
                "quadratic_ranks": None if self.quadratic_ranks is None else
                {",".join(map(str, b)): v for b, v in self.quadratic_ranks.items()},
                "min_pencil_rank": self.min_pencil_rank, "g_tilde_lower": self.g_tilde_lower,
                "pencil_condition_ok": self.pencil_condition_ok, "h_condition_ok": self.h_condition_ok,
                "verdicts": self.verdicts, "margins": self.margins,
                "thresholds": self.thresholds,
                "phi": {"value": self.phi[0], "exact": self.phi[1]},
                "v_star": None if self.v_star_detail is None else self.v_star_detail.to_dict()}


def _verdict(lhs: int, threshold: int, reliable: bool = True) -> str:
    if not reliable:
        return "inconclusive"
    return "pass" if lhs > threshold else "fail"


def check_theorem_conditions(system: FormSystem, b_bound: int = 5,
                             primes: Sequence[int] = DEFAULT_PRIMES, *,
                             trials: int = 2 * 10 ** 7, exact_threshold: int = 10 ** 7,
                             seed: int = 0, compute_v_star: bool = True) -> InvariantReport:
    """Evaluate the pencil-singularity condition, the h-invariant condition
    (with the rank clause for quadratics) and the g-invariant condition with the
    estimated invariants; report verdicts and margins."""
    n, r, d = system.n_vars, system.r, system.degree
    if d < 2:
        raise ValueError("theorem conditions need d >= 2")
    ue = u_invariant_search(system, b_bound, primes, seed=seed, trials=trials,
                            exact_threshold=exact_threshold)
    v_star = None
    if compute_v_star:
        v_star = birch_locus_dimension(system, primes, trials=trials,
                                       exact_threshold=exact_threshold, seed=seed)
    ranks = None
    min_rank = None
    lows, highs = [], []
    for b in ue.dims:
        fb = pencil_form(system, b)
        if fb.is_zero():
            lows.append(0)
            highs.append(0)
            continue
        lo, hi = h_invariant_bounds(fb)
        lows.append(lo)
        highs.append(hi)
    if d == 2:
        ranks = {b: (0 if pencil_form(system, b).is_zero()
                     else quadratic_rank(pencil_form(system, b))) for b in ue.dims}
        min_rank = min(ranks.values())
    h_lower, h_upper = min(lows), min(highs)
    bt = birch_threshold(r, d)
    ht = h_threshold(r, d)
    g_lower = n - ue.u
    if d == 2:
        g_lower = max(g_lower, min_rank)
    reliable = ue.consistent
    t1 = _verdict(n - ue.u, bt, reliable)
    if h_lower > ht:
        t2_h = "pass"
    elif h_upper <= ht:
        t2_h = "fail"
    else:
        t2_h = "inconclusive"
    verdicts = {"pencil_singularity": t1, "h_invariant": t2_h,
                "g_invariant": _verdict(g_lower, bt, reliable)}
    margins = {"pencil_singularity": n - ue.u - bt, "g_invariant": g_lower - bt,
               "h_invariant_lower": h_lower - ht}
    thresholds = {"birch": bt, "h_invariant": ht, "schmidt_h_invariant": schmidt_threshold(r, d)}
    t2_ok = t2_h == "pass"
    if d == 2:
        rank_t = 2 * r * (r + 1)
        verdicts["quadratic_rank"] = _verdict(min_rank, rank_t)
        margins["quadratic_rank"] = min_rank - rank_t
        thresholds["quadratic_rank"] = rank_t
        t2_ok = t2_ok or verdicts["quadratic_rank"] == "pass"
    if v_star is not None and v_star.dim_estimate < ue.u:
        # Sing(f_b) lies inside V*, so the estimates contradict each other
        verdicts = {k: "inconclusive" for k in verdicts}
        t2_ok = False
    return InvariantReport(
        n=n, r=r, d=d, u=ue.u, u_attained_at=ue.b, b_bound=b_bound,
        dim_V_star=None if v_star is None else v_star.dim_estimate,
        dim_V_star_consistent=None if v_star is None else v_star.consistent,
        h_lower=h_lower, h_upper=h_upper, quadratic_ranks=ranks, min_pencil_rank=min_rank,
        g_tilde_lower=g_lower, pencil_condition_ok=t1 == "pass", h_condition_ok=t2_ok,
        verdicts=verdicts, margins=margins, thresholds=thresholds, phi=phi(d),
        v_star_detail=v_star)
