import random

import pytest
import sympy
from hypothesis import given, settings
from hypothesis import strategies as st

from weylforms.exact import (IncrementalRank, adjugate, det, exact_rank_with_certificate,
                             left_kernel_check, matmul, primitive, rank, rank_mod_p)


def test_certificate_examples():
    assert exact_rank_with_certificate([[2, 4], [1, 2]]) == (1, (1, -2))
    assert exact_rank_with_certificate([[1, 0], [0, 1]]) == (2, None)
    assert exact_rank_with_certificate([[0, 0, 0], [0, 0, 0]]) == (0, (1, 0))


def matrices(max_r=4, max_c=6, bound=5):
    return st.integers(1, max_r).flatmap(lambda r: st.integers(1, max_c).flatmap(
        lambda c: st.lists(st.lists(st.integers(-bound, bound), min_size=c, max_size=c),
                           min_size=r, max_size=r)))


@given(matrices())
@settings(max_examples=150, deadline=None)
def test_rank_and_certificate_against_sympy(M):
    rk, b = exact_rank_with_certificate(M)
    assert rk == sympy.Matrix(M).rank()
    if rk < len(M):
        assert b is not None
        assert primitive(b) == b and any(b)
        assert left_kernel_check(b, M)
    else:
        assert b is None


@given(matrices())
@settings(max_examples=60, deadline=None)
def test_dependent_rows_always_detected(M):
    M = [row[:] for row in M] + [[2 * v for v in M[0]]]
    rk, b = exact_rank_with_certificate(M)
    assert rk < len(M) and left_kernel_check(b, M)


@given(st.integers(1, 5).flatmap(lambda n: st.lists(
    st.lists(st.integers(-6, 6), min_size=n, max_size=n), min_size=n, max_size=n)))
@settings(max_examples=100, deadline=None)
def test_det_and_adjugate(M):
    n = len(M)
    assert det(M) == sympy.Matrix(M).det()
    A = adjugate(M)
    D = det(M)
    ident = [[D if i == j else 0 for j in range(n)] for i in range(n)]
    assert matmul(A, M) == ident
    assert matmul(M, A) == ident


def test_primitive():
    assert primitive([4, -6, 0]) == (2, -3, 0)
    assert primitive([-3, 6]) == (1, -2)  # first nonzero entry made positive
    with pytest.raises(ValueError):
        primitive([0, 0])


def test_rank_mod_p():
    M = [[1, 2], [3, 6 + 5]]
    assert rank(M) == 2 and rank_mod_p(M, 5) == 1


def test_incremental_rank_matches_batch():
    rng = random.Random(3)
    for _ in range(30):
        r = rng.randint(1, 4)
        cols = [[rng.randint(-2, 2) for _ in range(r)] for _ in range(rng.randint(1, 8))]
        inc = IncrementalRank(r)
        for c in cols:
            inc.add(c)
        M = [[c[i] for c in cols] for i in range(r)]
        assert inc.rank == rank(M)
        chosen = [[c[i] for c in inc.columns] for i in range(r)]
        assert rank(chosen) == inc.rank == len(inc.columns)
        if not inc.full:
            assert left_kernel_check(inc.kernel_vector(), M)


@given(matrices())
@settings(max_examples=80, deadline=None)
def test_left_nullspace_dimension_and_annihilation(M):
    from weylforms.exact import left_nullspace
    K = left_nullspace(M, len(M))
    assert len(K) == len(M) - sympy.Matrix(M).rank()
    assert all(left_kernel_check(k, M) for k in K)
    if K:
        assert sympy.Matrix(K).rank() == len(K)
