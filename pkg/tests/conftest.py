import itertools
import random

import pytest
from hypothesis import strategies as st

from weylforms.forms import Form, FormSystem, parse_form

ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


def random_form(rng: random.Random, n: int, d: int, n_terms: int = 4, coef: int = 5) -> Form:
    monos = [e for e in itertools.product(range(d + 1), repeat=n) if sum(e) == d]
    terms = {}
    while not terms:
        for e in rng.sample(monos, min(n_terms, len(monos))):
            c = rng.randint(-coef, coef)
            if c:
                terms[e] = c
    return Form(n, d, terms)


@st.composite
def forms(draw, max_n=4, max_d=4, max_coef=6):
    n = draw(st.integers(1, max_n))
    d = draw(st.integers(1, max_d))
    monos = [e for e in itertools.product(range(d + 1), repeat=n) if sum(e) == d]
    chosen = draw(st.lists(st.sampled_from(monos), min_size=1, max_size=5, unique=True))
    coefs = draw(st.lists(st.integers(-max_coef, max_coef).filter(bool),
                          min_size=len(chosen), max_size=len(chosen)))
    return Form(n, d, dict(zip(chosen, coefs)))


def vectors(n, bound=6):
    return st.lists(st.integers(-bound, bound), min_size=n, max_size=n)


@pytest.fixture
def quinary():
    return FormSystem([parse_form("x1^2+x2^2+x3^2+x4^2-x5^2", 5)])
