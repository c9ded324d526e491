"""Integral homogeneous forms, systems of forms, pencils and polarization.

All arithmetic here is exact: coefficients and values are Python ints and
box endpoints are :class:`fractions.Fraction`.  Indices in the Python API are
0-based (variable ``j`` is ``x{j+1}`` in the text grammar).
"""

from __future__ import annotations

import math
import re
from fractions import Fraction
from itertools import combinations
from typing import Iterable, Mapping, Sequence

import numpy as np

Exponent = tuple[int, ...]


class FormSyntaxError(ValueError):
    pass


def _grlex_key(exp: Exponent) -> tuple:
    # descending graded lex: x1^2 before x1*x2 before x2^2
    return (-sum(exp), tuple(-e for e in exp))


class Form:
    """A homogeneous polynomial with integer coefficients.

    ``terms`` maps exponent vectors to nonzero integer coefficients.  The zero
    polynomial is only constructible with ``allow_zero=True`` (pencils can
    degenerate to it); user-facing constructors reject it.
    """

    __slots__ = ("n_vars", "degree", "_terms", "_hash")

    def __init__(self, n_vars: int, degree: int, terms: Mapping[Exponent, int],
                 *, allow_zero: bool = False):
        if n_vars < 1:
            raise ValueError("n_vars must be >= 1")
        if degree < 1:
            raise ValueError("degree must be >= 1")
        clean: dict[Exponent, int] = {}
        for exp, c in terms.items():
            exp = tuple(int(e) for e in exp)
            if len(exp) != n_vars:
                raise ValueError(f"exponent {exp} has wrong length for n_vars={n_vars}")
            if any(e < 0 for e in exp):
                raise ValueError(f"negative exponent in {exp}")
            if sum(exp) != degree:
                raise ValueError(f"monomial {exp} is not of degree {degree} (inhomogeneous)")
            c = int(c)
            if c:
                clean[exp] = clean.get(exp, 0) + c
        clean = {e: c for e, c in clean.items() if c}
        if not clean and not allow_zero:
            raise ValueError("zero polynomial is not a valid form here")
        self.n_vars = n_vars
        self.degree = degree
        self._terms = tuple(sorted(clean.items(), key=lambda t: _grlex_key(t[0])))
        self._hash = None

    @classmethod
    def zero(cls, n_vars: int, degree: int) -> "Form":
        return cls(n_vars, degree, {}, allow_zero=True)

    @property
    def terms(self) -> dict[Exponent, int]:
        return dict(self._terms)

    def items(self):
        return iter(self._terms)

    def is_zero(self) -> bool:
        return not self._terms

    def __len__(self) -> int:
        return len(self._terms)

    def __eq__(self, other):
        if not isinstance(other, Form):
            return NotImplemented
        return (self.n_vars, self.degree, self._terms) == (other.n_vars, other.degree, other._terms)

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.n_vars, self.degree, self._terms))
        return self._hash

    def __repr__(self):
        return f"Form({format_form(self)!r}, n_vars={self.n_vars})"

    def __str__(self):
        return format_form(self)

    # arithmetic -------------------------------------------------------

    def _combine(self, other: "Form", sign: int) -> "Form":
        _check_compatible(self, other)
        out = dict(self._terms)
        for e, c in other._terms:
            out[e] = out.get(e, 0) + sign * c
        return Form(self.n_vars, self.degree, out, allow_zero=True)

    def __add__(self, other: "Form") -> "Form":
        return self._combine(other, 1)

    def __sub__(self, other: "Form") -> "Form":
        return self._combine(other, -1)

    def __neg__(self) -> "Form":
        return self.scale(-1)

    def scale(self, c: int) -> "Form":
        return Form(self.n_vars, self.degree, {e: c * v for e, v in self._terms},
                    allow_zero=True)

    def __mul__(self, other):
        if isinstance(other, int):
            return self.scale(other)
        if not isinstance(other, Form):
            return NotImplemented
        if other.n_vars != self.n_vars:
            raise ValueError("forms live in different numbers of variables")
        out: dict[Exponent, int] = {}
        for e1, c1 in self._terms:
            for e2, c2 in other._terms:
                e = tuple(a + b for a, b in zip(e1, e2))
                out[e] = out.get(e, 0) + c1 * c2
        return Form(self.n_vars, self.degree + other.degree, out, allow_zero=True)

    __rmul__ = __mul__

    def content(self) -> int:
        g = 0
        for _, c in self._terms:
            g = math.gcd(g, c)
        return g

    def variables(self) -> set[int]:
        return {j for e, _ in self._terms for j, k in enumerate(e) if k}

    def max_abs_coefficient(self) -> int:
        return max((abs(c) for _, c in self._terms), default=0)

    def arrays(self) -> tuple[np.ndarray, np.ndarray]:
        """Exponent matrix (terms x n) and coefficient vector, for vectorized use."""
        if not self._terms:
            return np.zeros((0, self.n_vars), dtype=np.int64), np.zeros(0, dtype=object)
        exps = np.array([e for e, _ in self._terms], dtype=np.int64)
        coefs = np.array([c for _, c in self._terms], dtype=object)
        return exps, coefs


def _check_compatible(f: Form, g: Form) -> None:
    if (f.n_vars, f.degree) != (g.n_vars, g.degree):
        raise ValueError("forms must share n_vars and degree")


def monomial(n_vars: int, exp: Sequence[int], coef: int = 1) -> Form:
    return Form(n_vars, sum(exp), {tuple(exp): coef})


def linear_form(coefs: Sequence[int]) -> Form:
    n = len(coefs)
    return Form(n, 1, {tuple(int(i == j) for i in range(n)): c for j, c in enumerate(coefs)},
                allow_zero=True)


def diagonal_form(coefs: Sequence[int], degree: int = 2) -> Form:
    """sum_j coefs[j] * x_j^degree."""
    n = len(coefs)
    return Form(n, degree, {tuple(degree * int(i == j) for i in range(n)): c
                            for j, c in enumerate(coefs)})


def quadratic_from_gram(A: Sequence[Sequence[int]]) -> Form:
    """x^T A x for an integer symmetric matrix A."""
    n = len(A)
    terms: dict[Exponent, int] = {}
    for i in range(n):
        for j in range(n):
            if A[i][j] != A[j][i]:
                raise ValueError("Gram matrix must be symmetric")
            e = [0] * n
            e[i] += 1
            e[j] += 1
            e = tuple(e)
            terms[e] = terms.get(e, 0) + int(A[i][j])
    return Form(n, 2, terms)


# text grammar ---------------------------------------------------------

_TOKEN = re.compile(r"\s*(?:(\d+)|(x)(\d+)|(\^)|(\*)|([+-]))")


def parse_form(text: str, n_vars: int) -> Form:
    """Parse ``term (('+'|'-') term)*`` into a :class:`Form`.

    A term is ``[integer '*'] factor ('*' factor)*`` with factors ``x<i>[^e]``
    (1-based variable indices).  A bare integer term is rejected since it has
    degree 0.
    """
    tokens = []
    pos = 0
    s = text.strip()
    if not s:
        raise FormSyntaxError("empty form")
    while pos < len(s):
        m = _TOKEN.match(s, pos)
        if not m or m.end() == pos:
            raise FormSyntaxError(f"unexpected character at {pos}: {s[pos:pos + 10]!r}")
        pos = m.end()
        if m.group(1) is not None:
            tokens.append(("int", int(m.group(1))))
        elif m.group(2):
            tokens.append(("var", int(m.group(3))))
        elif m.group(4):
            tokens.append(("^", None))
        elif m.group(5):
            tokens.append(("*", None))
        else:
            tokens.append(("sign", m.group(6)))
        if pos < len(s) and s[pos:].strip() == "":
            break

    terms: dict[Exponent, int] = {}
    i = 0
    degree = None

    def expect(kind):
        nonlocal i
        if i >= len(tokens) or tokens[i][0] != kind:
            got = tokens[i] if i < len(tokens) else "end of input"
            raise FormSyntaxError(f"expected {kind}, got {got}")
        tok = tokens[i]
        i += 1
        return tok[1]

    first = True
    while i < len(tokens):
        sign = 1
        if tokens[i][0] == "sign":
            sign = -1 if tokens[i][1] == "-" else 1
            i += 1
        elif not first:
            raise FormSyntaxError(f"expected '+' or '-' before term, got {tokens[i]}")
        first = False
        coef = 1
        exp = [0] * n_vars
        if i < len(tokens) and tokens[i][0] == "int":
            coef = tokens[i][1]
            i += 1
            expect("*")
        while True:
            idx = expect("var")
            if not 1 <= idx <= n_vars:
                raise FormSyntaxError(f"variable x{idx} out of range for n_vars={n_vars}")
            power = 1
            if i < len(tokens) and tokens[i][0] == "^":
                i += 1
                power = expect("int")
            exp[idx - 1] += power
            if i < len(tokens) and tokens[i][0] == "*":
                i += 1
                continue
            break
        deg = sum(exp)
        if degree is None:
            degree = deg
        elif deg != degree:
            raise FormSyntaxError(f"inhomogeneous input: degrees {degree} and {deg}")
        key = tuple(exp)
        terms[key] = terms.get(key, 0) + sign * coef
    if degree is None or degree < 1:
        raise FormSyntaxError("form must have positive degree")
    try:
        return Form(n_vars, degree, terms)
    except ValueError as exc:
        raise FormSyntaxError(str(exc)) from None


def format_form(f: Form) -> str:
    if f.is_zero():
        return "0"
    parts = []
    for k, (exp, c) in enumerate(f.items()):
        factors = []
        for j, e in enumerate(exp):
            if e == 1:
                factors.append(f"x{j + 1}")
            elif e > 1:
                factors.append(f"x{j + 1}^{e}")
        body = "*".join(factors)
        a = abs(c)
        if a != 1:
            body = f"{a}*{body}"
        if k == 0:
            parts.append(("-" if c < 0 else "") + body)
        else:
            parts.append((" - " if c < 0 else " + ") + body)
    return "".join(parts)


# evaluation -----------------------------------------------------------

def _check_point(f: Form, x: Sequence[int]) -> None:
    if len(x) != f.n_vars:
        raise ValueError(f"point has length {len(x)}, form has {f.n_vars} variables")


def evaluate(f: Form, x: Sequence[int]) -> int:
    _check_point(f, x)
    x = [int(v) for v in x]
    total = 0
    for exp, c in f.items():
        t = c
        for v, e in zip(x, exp):
            if e:
                t *= v ** e
        total += t
    return total


def partial(f: Form, j: int) -> Form:
    """The derivative form d f / d x_j (degree d-1, possibly zero)."""
    if f.degree < 2:
        raise ValueError("partial derivative of a linear form is a constant")
    out: dict[Exponent, int] = {}
    for exp, c in f.items():
        if exp[j]:
            e = list(exp)
            e[j] -= 1
            out[tuple(e)] = out.get(tuple(e), 0) + c * exp[j]
    return Form(f.n_vars, f.degree - 1, out, allow_zero=True)


def gradient(f: Form, x: Sequence[int]) -> list[int]:
    _check_point(f, x)
    x = [int(v) for v in x]
    grad = [0] * f.n_vars
    for exp, c in f.items():
        for j, ej in enumerate(exp):
            if not ej:
                continue
            t = c * ej
            for k, (v, e) in enumerate(zip(x, exp)):
                p = e - 1 if k == j else e
                if p:
                    t *= v ** p
            grad[j] += t
    return grad


def polarize(f: Form, x_list: Sequence[Sequence[int]]) -> int:
    """Symmetric multilinear form Gamma_f with Gamma_f(x, ..., x) = d! f(x).

    Computed by inclusion-exclusion over nonempty subsets S of the d slots::

        Gamma_f(x1, ..., xd) = sum_S (-1)^(d - |S|) f(sum_{i in S} x_i)
    """
    d = f.degree
    if len(x_list) != d:
        raise ValueError(f"polarize needs exactly {d} vectors, got {len(x_list)}")
    vecs = [[int(v) for v in x] for x in x_list]
    for v in vecs:
        _check_point(f, v)
    total = 0
    n = f.n_vars
    for size in range(1, d + 1):
        sign = -1 if (d - size) % 2 else 1
        for S in combinations(range(d), size):
            s = [0] * n
            for i in S:
                for k in range(n):
                    s[k] += vecs[i][k]
            total += sign * evaluate(f, s)
    return total


def unit_vector(n: int, j: int) -> list[int]:
    e = [0] * n
    e[j] = 1
    return e


# systems and pencils --------------------------------------------------

class FormSystem:
    """r forms of common degree d in n variables."""

    __slots__ = ("forms",)

    def __init__(self, forms: Iterable[Form]):
        forms = tuple(forms)
        if not forms:
            raise ValueError("a system needs at least one form")
        n, d = forms[0].n_vars, forms[0].degree
        for f in forms:
            if (f.n_vars, f.degree) != (n, d):
                raise ValueError("all forms of a system must share n_vars and degree")
        self.forms = forms

    @property
    def n_vars(self) -> int:
        return self.forms[0].n_vars

    @property
    def degree(self) -> int:
        return self.forms[0].degree

    @property
    def r(self) -> int:
        return len(self.forms)

    def __len__(self):
        return len(self.forms)

    def __iter__(self):
        return iter(self.forms)

    def __getitem__(self, i):
        return self.forms[i]

    def __eq__(self, other):
        return isinstance(other, FormSystem) and self.forms == other.forms

    def __hash__(self):
        return hash(self.forms)

    def __repr__(self):
        return f"FormSystem([{', '.join(repr(str(f)) for f in self.forms)}], n_vars={self.n_vars})"

    def evaluate(self, x: Sequence[int]) -> list[int]:
        return [evaluate(f, x) for f in self.forms]


def pencil_form(system: FormSystem, b: Sequence[int]) -> Form:
    """f_b = b_1 f_1 + ... + b_r f_r (the zero form is possible)."""
    if len(b) != system.r:
        raise ValueError(f"pencil vector has length {len(b)}, system has r={system.r}")
    if all(int(v) == 0 for v in b):
        raise ValueError("pencil vector must be nonzero")
    out: dict[Exponent, int] = {}
    for bi, f in zip(b, system.forms):
        bi = int(bi)
        if not bi:
            continue
        for e, c in f.items():
            out[e] = out.get(e, 0) + bi * c
    return Form(system.n_vars, system.degree, out, allow_zero=True)


def multilinear_basis_row(system: FormSystem, i: int, j: int,
                          x_list: Sequence[Sequence[int]]) -> int:
    """Gamma_i(e_j, x^(2), ..., x^(d)) with 0-based form index i and variable j."""
    if not 0 <= i < system.r:
        raise IndexError(f"form index {i} out of range")
    if not 0 <= j < system.n_vars:
        raise IndexError(f"variable index {j} out of range")
    if len(x_list) != system.degree - 1:
        raise ValueError(f"need {system.degree - 1} vectors")
    return polarize(system.forms[i], [unit_vector(system.n_vars, j), *x_list])


def components(system: FormSystem) -> list[list[int]]:
    """Groups of variables that never share a monomial with outside variables."""
    n = system.n_vars
    parent = list(range(n))

    def find(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    for f in system.forms:
        for exp, _ in f.items():
            vs = [j for j, e in enumerate(exp) if e]
            for v in vs[1:]:
                ra, rb = find(vs[0]), find(v)
                if ra != rb:
                    parent[max(ra, rb)] = min(ra, rb)
    groups: dict[int, list[int]] = {}
    for j in range(n):
        groups.setdefault(find(j), []).append(j)
    return sorted(groups.values())


def restrict(f: Form, variables: Sequence[int]) -> Form:
    """Terms of f supported on ``variables``, re-indexed to len(variables) vars."""
    out = {}
    vs = list(variables)
    vset = set(vs)
    for exp, c in f.items():
        if all(e == 0 or j in vset for j, e in enumerate(exp)):
            out[tuple(exp[j] for j in vs)] = c
    return Form(len(vs), f.degree, out, allow_zero=True)


# boxes ----------------------------------------------------------------

def _frac(v) -> Fraction:
    if isinstance(v, Fraction):
        return v
    if isinstance(v, (int, np.integer)):
        return Fraction(int(v))
    if isinstance(v, str):
        return parse_fraction(v)
    if isinstance(v, float):
        return Fraction(v)
    raise TypeError(f"cannot interpret {v!r} as a rational")


def parse_fraction(text: str) -> Fraction:
    """Exact rational from ``"p"`` or ``"p/q"``; decimal notation is rejected."""
    t = text.strip()
    if not re.fullmatch(r"[+-]?\d+(/\d+)?", t):
        raise ValueError(f"expected an exact rational 'p' or 'p/q', got {text!r}")
    return Fraction(t)


class Box:
    """Closed box prod_j [lo_j, hi_j] inside [-1, 1]^n with rational endpoints."""

    __slots__ = ("intervals",)

    def __init__(self, intervals: Iterable[tuple]):
        ivs = tuple((_frac(lo), _frac(hi)) for lo, hi in intervals)
        if not ivs:
            raise ValueError("box needs at least one interval")
        for lo, hi in ivs:
            if not (-1 <= lo <= hi <= 1):
                raise ValueError(f"interval [{lo}, {hi}] not inside [-1, 1]")
        self.intervals = ivs

    @classmethod
    def unit(cls, n: int) -> "Box":
        return cls([(-1, 1)] * n)

    @classmethod
    def positive(cls, n: int) -> "Box":
        return cls([(0, 1)] * n)

    @classmethod
    def parse(cls, text: str, n: int) -> "Box":
        """``"unit"``, ``"positive"``, ``"lo:hi"`` (all coordinates) or a
        comma-separated list of ``lo:hi`` per coordinate."""
        t = text.strip()
        if t in ("unit", "sym"):
            return cls.unit(n)
        if t in ("positive", "pos"):
            return cls.positive(n)
        pieces = [p.strip() for p in t.split(",")]
        ivs = []
        for p in pieces:
            lo, sep, hi = p.partition(":")
            if not sep:
                raise ValueError(f"bad interval {p!r}; use lo:hi")
            ivs.append((parse_fraction(lo), parse_fraction(hi)))
        if len(ivs) == 1:
            ivs = ivs * n
        if len(ivs) != n:
            raise ValueError(f"box has {len(ivs)} intervals, expected {n}")
        return cls(ivs)

    @property
    def n(self) -> int:
        return len(self.intervals)

    def volume(self) -> Fraction:
        v = Fraction(1)
        for lo, hi in self.intervals:
            v *= hi - lo
        return v

    def integer_ranges(self, P) -> list[tuple[int, int]]:
        """Integer coordinate ranges of the closed dilate P * box."""
        P = _frac(P)
        if P <= 0:
            raise ValueError("P must be positive")
        return [(math.ceil(P * lo), math.floor(P * hi)) for lo, hi in self.intervals]

    def to_strings(self) -> list[list[str]]:
        return [[str(lo), str(hi)] for lo, hi in self.intervals]

    def __eq__(self, other):
        return isinstance(other, Box) and self.intervals == other.intervals

    def __repr__(self):
        return f"Box({[(str(a), str(b)) for a, b in self.intervals]})"


# system files ---------------------------------------------------------

_HEADER = re.compile(r"n\s*=\s*(\d+)\s+d\s*=\s*(\d+)\s+r\s*=\s*(\d+)")


def parse_system(text: str) -> FormSystem:
    """System file: header ``n=<int> d=<int> r=<int>``, then one form per line.

    ``#`` starts a comment.  Blank lines are ignored.
    """
    header = None
    forms = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if header is None:
            m = _HEADER.fullmatch(line)
            if not m:
                raise FormSyntaxError(f"line {lineno}: expected header 'n=<int> d=<int> r=<int>'")
            header = tuple(int(g) for g in m.groups())
            continue
        try:
            forms.append(parse_form(line, header[0]))
        except FormSyntaxError as exc:
            raise FormSyntaxError(f"line {lineno}: {exc}") from None
    if header is None:
        raise FormSyntaxError("missing header line")
    n, d, r = header
    if len(forms) != r:
        raise FormSyntaxError(f"header says r={r} but {len(forms)} forms were given")
    for f in forms:
        if f.degree != d:
            raise FormSyntaxError(f"form {f} has degree {f.degree}, header says d={d}")
    return FormSystem(forms)


def read_system(path) -> FormSystem:
    with open(path) as fh:
        return parse_system(fh.read())


def format_system(system: FormSystem) -> str:
    lines = [f"n={system.n_vars} d={system.degree} r={system.r}"]
    lines += [format_form(f) for f in system.forms]
    return "\n".join(lines) + "\n"


# the bilinear family ---------------------------------------------------

def bilinear_family(r: int, k: int) -> FormSystem:
    """Q_i(x, y) = sum_{j<k} x_j y_{j,i} for i < r, in k(r+1) variables.

    Variables are ordered x_0..x_{k-1}, then y_{j,i} at index k + j*r + i.
    """
    if r < 1 or k < 1:
        raise ValueError("need r >= 1 and k >= 1")
    n = k * (r + 1)
    forms = []
    for i in range(r):
        terms = {}
        for j in range(k):
            e = [0] * n
            e[j] = 1
            e[k + j * r + i] = 1
            terms[tuple(e)] = 1
        forms.append(Form(n, 2, terms))
    return FormSystem(forms)
