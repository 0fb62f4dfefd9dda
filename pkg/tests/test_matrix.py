import itertools
import random
from fractions import Fraction
from math import gcd

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from chainkit.matrix import (
    IntegerMatrix,
    column_span_contains,
    determinant,
    determinant_divisors,
    integer_kernel,
    integer_solve,
    rank,
    smith_normal_form,
)
from chainkit.random_fixtures import random_matrix, random_unimodular


def leibniz_det(m):
    """Permutation-expansion determinant; independent of Bareiss."""
    n = m.rows
    total = 0
    for perm in itertools.permutations(range(n)):
        inv = sum(1 for i in range(n) for j in range(i + 1, n) if perm[i] > perm[j])
        prod = 1
        for i, p in enumerate(perm):
            prod *= m[i, p]
        total += -prod if inv % 2 else prod
    return total


def fraction_rank(m):
    rows = [[Fraction(v) for v in r] for r in m.tolist()]
    r = 0
    for c in range(m.cols):
        piv = next((i for i in range(r, m.rows) if rows[i][c] != 0), None)
        if piv is None:
            continue
        rows[r], rows[piv] = rows[piv], rows[r]
        for i in range(m.rows):
            if i != r and rows[i][c]:
                f = rows[i][c] / rows[r][c]
                rows[i] = [a - f * b for a, b in zip(rows[i], rows[r])]
        r += 1
    return r


matrices = st.integers(1, 6).flatmap(
    lambda r: st.integers(1, 6).flatmap(
        lambda c: st.lists(st.integers(-9, 9), min_size=r * c, max_size=r * c).map(
            lambda e: IntegerMatrix(r, c, e))))


def test_basic_arithmetic():
    a = IntegerMatrix.from_rows([[1, 2], [3, 4]])
    b = IntegerMatrix.from_rows([[0, 1], [1, 0]])
    assert (a @ b).tolist() == [[2, 1], [4, 3]]
    assert (a + b).tolist() == [[1, 3], [4, 4]]
    assert (a - a).is_zero()
    assert a.transpose().tolist() == [[1, 3], [2, 4]]
    assert a.apply([1, 1]) == [3, 7]
    assert a.mod(2).tolist() == [[1, 0], [1, 0]]
    assert a.hstack(b).shape == (2, 4)
    assert a.vstack(b).shape == (4, 2)
    assert IntegerMatrix.from_columns([[1, 3], [2, 4]], 2) == a


def test_shape_mismatch_raises():
    with pytest.raises(ValueError):
        IntegerMatrix(2, 2, [1, 2, 3])
    with pytest.raises(ValueError):
        IntegerMatrix.zeros(2, 3) @ IntegerMatrix.zeros(2, 3)


def test_determinant_matches_leibniz():
    rng = random.Random(3)
    for _ in range(40):
        n = rng.randint(1, 5)
        m = random_matrix(rng, n, n)
        assert determinant(m) == leibniz_det(m)


def test_snf_of_known_matrix():
    a = IntegerMatrix.from_rows([[2, 4, 4], [-6, 6, 12], [10, -4, -16]])
    snf = smith_normal_form(a)
    assert snf.diagonal == [2, 6, 12]
    assert snf.U @ a @ snf.V == snf.D


def test_snf_zero_and_empty():
    snf = smith_normal_form(IntegerMatrix.zeros(2, 3))
    assert snf.rank == 0
    assert smith_normal_form(IntegerMatrix.zeros(0, 3)).rank == 0


@settings(max_examples=150, deadline=None)
@given(matrices)
def test_snf_properties(a):
    snf = smith_normal_form(a)
    assert snf.U @ a @ snf.V == snf.D
    assert abs(determinant(snf.U)) == 1 and abs(determinant(snf.V)) == 1
    d = snf.diagonal
    for i in range(a.rows):
        for j in range(a.cols):
            if i != j:
                assert snf.D[i, j] == 0
    nz = [x for x in d if x]
    assert all(x > 0 for x in nz)
    assert all(nz[i + 1] % nz[i] == 0 for i in range(len(nz) - 1))
    assert nz == determinant_divisors(a)
    assert snf.rank == fraction_rank(a) == rank(a)


def test_determinant_divisors_oracle_small():
    # d_1 = gcd of entries, d_1 d_2 = |det|
    a = IntegerMatrix.from_rows([[4, 6], [2, 8]])
    assert determinant_divisors(a) == [2, 10]
    assert gcd(4, gcd(6, gcd(2, 8))) == 2 and abs(leibniz_det(a)) == 20


@settings(max_examples=80, deadline=None)
@given(matrices)
def test_kernel_is_saturated_kernel(a):
    k = integer_kernel(a)
    assert (a @ k).is_zero()
    assert k.cols == a.cols - rank(a)
    if k.cols:
        # a basis of the full integer kernel has invariant factors all 1
        assert all(d == 1 for d in smith_normal_form(k).invariant_factors)


def test_integer_solve():
    a = IntegerMatrix.from_rows([[2, 0], [0, 3]])
    assert integer_solve(a, [4, 9]) == [2, 3]
    assert integer_solve(a, [1, 0]) is None
    assert column_span_contains(a, [2, 3])
    assert not column_span_contains(a, [1, 3])


def test_random_unimodular_inverse():
    rng = random.Random(7)
    for _ in range(30):
        n = rng.randint(1, 5)
        u, inv = random_unimodular(rng, n, rng.randint(0, 5))
        assert u @ inv == IntegerMatrix.identity(n)
        assert abs(determinant(u)) == 1
