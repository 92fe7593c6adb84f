from fractions import Fraction

import pytest

from courantlab import linalg


def test_det_and_inverse():
    a = linalg.mat([[2, 1], [1, 1]])
    assert linalg.det(a) == 1
    inv = linalg.inverse(a)
    assert linalg.mat_mul(a, inv) == linalg.identity(2)
    assert linalg.det([]) == 1  # empty matrix convention


def test_singular():
    a = linalg.mat([[1, 2], [2, 4]])
    assert linalg.det(a) == 0
    with pytest.raises(ValueError, match="singular"):
        linalg.inverse(a)


def test_rank():
    assert linalg.rank(linalg.mat([[1, 2], [2, 4], [0, 0]])) == 1
    assert linalg.rank(linalg.identity(3)) == 3
    assert linalg.rank([]) == 0


def test_solve_consistent():
    a = linalg.mat([[1, 1], [0, 1], [1, 2]])
    b = [Fraction(3), Fraction(1), Fraction(4)]
    x, farkas = linalg.solve_with_certificate(a, b)
    assert farkas is None
    assert linalg.mat_vec(a, x) == b


def test_solve_infeasible_gives_farkas():
    # x + y = 1 and x + y = 2 cannot both hold
    a = linalg.mat([[1, 1], [1, 1]])
    b = [Fraction(1), Fraction(2)]
    x, farkas = linalg.solve_with_certificate(a, b)
    assert x is None
    combo = [
        sum(lam * row[j] for lam, row in zip(farkas, a))
        for j in range(2)
    ]
    assert all(v == 0 for v in combo)
    assert sum(lam * rhs for lam, rhs in zip(farkas, b)) != 0
