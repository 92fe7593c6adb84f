import random
from fractions import Fraction

import pytest

from courantlab.polyexpr import (
    ParseError,
    PolyMap,
    Polynomial,
    monomials_up_to,
    parse,
)

from conftest import eval_term_by_term, fd_partial


def rand_poly(rng, num_vars, degree=4, terms=4):
    monos = monomials_up_to(num_vars, degree)
    out = {}
    for _ in range(terms):
        out[rng.choice(monos)] = Fraction(rng.randint(-6, 6), rng.randint(1, 4))
    return Polynomial(num_vars, out)


class TestParse:
    def test_zero(self):
        assert parse("0", ["x1"]).is_zero()

    def test_cancellation(self):
        assert parse("x1*x1 - x1^2", ["x1"]).is_zero()

    def test_canonical_terms(self):
        p = parse("3/2*x1^2*x2 + 1", ["x1", "x2"])
        assert p.terms == {(2, 1): Fraction(3, 2), (0, 0): Fraction(1)}

    def test_unary_minus(self):
        assert parse("-x1 + 2", ["x1"]) == parse("2 - x1", ["x1"])
        assert parse("3 - -x1", ["x1"]) == parse("3 + x1", ["x1"])

    def test_parentheses_and_precedence(self):
        assert parse("(x1+1)*(x1-1)", ["x1"]) == parse("x1^2 - 1", ["x1"])
        assert parse("2*x1^2", ["x1"]) == parse("2*(x1^2)", ["x1"])

    def test_rational_literal(self):
        assert parse("2/4", []).constant_value() == Fraction(1, 2)

    def test_syntax_error_position(self):
        with pytest.raises(ParseError) as err:
            parse("x1 + * 2", ["x1"])
        assert err.value.position == 5

    def test_unknown_identifier(self):
        with pytest.raises(ParseError, match="unknown identifier"):
            parse("x1 + y", ["x1"])

    def test_negative_exponent(self):
        with pytest.raises(ParseError, match="negative exponent"):
            parse("x1^-2", ["x1"])

    def test_non_integer_exponent(self):
        with pytest.raises(ParseError):
            parse("x1^(2)", ["x1"])

    def test_trailing_garbage(self):
        with pytest.raises(ParseError, match="trailing"):
            parse("x1 x1", ["x1"])

    def test_print_parse_roundtrip(self):
        rng = random.Random(7)
        names = ["x1", "x2", "x3"]
        for _ in range(50):
            p = rand_poly(rng, 3)
            assert parse(p.to_string(names), names) == p


class TestArith:
    def test_additive_inverse(self):
        x = parse("x1", ["x1"])
        assert (x + (-x)).is_zero()

    def test_difference_of_squares(self):
        x1 = ["x1"]
        assert parse("x1+1", x1) * parse("x1-1", x1) == parse("x1^2-1", x1)

    def test_sub(self):
        x1 = ["x1"]
        assert parse("2*x1", x1) - parse("x1", x1) == parse("x1", x1)

    def test_arity_mismatch(self):
        with pytest.raises(ValueError, match="variable-count mismatch"):
            parse("x1", ["x1"]) + parse("x1", ["x1", "x2"])

    def test_scalar_coercion(self):
        x = parse("x1", ["x1"])
        assert 2 * x - x == x
        assert x + 1 == parse("x1 + 1", ["x1"])
        assert Fraction(1, 2) * (2 * x) == x

    def test_ring_axioms_randomized(self):
        rng = random.Random(11)
        for _ in range(60):
            a, b, c = (rand_poly(rng, 2) for _ in range(3))
            assert (a + b) + c == a + (b + c)
            assert a + b == b + a
            assert (a * b) * c == a * (b * c)
            assert a * b == b * a
            assert a * (b + c) == a * b + a * c

    def test_pow(self):
        x = parse("x1+1", ["x1"])
        assert x ** 0 == Polynomial.constant(1, 1)
        assert x ** 3 == x * x * x
        with pytest.raises(ValueError):
            x ** -1


class TestDiff:
    def test_power_rule(self):
        p = parse("x1^2*x2", ["x1", "x2"])
        assert p.diff(0) == parse("2*x1*x2", ["x1", "x2"])

    def test_constant(self):
        assert Polynomial.constant(1, 5).diff(0).is_zero()

    def test_independent_variable(self):
        assert parse("x1^3", ["x1", "x2"]).diff(1).is_zero()

    def test_index_out_of_range(self):
        with pytest.raises(ValueError, match="out of range"):
            parse("x1", ["x1"]).diff(1)

    def test_product_rule_randomized(self):
        rng = random.Random(3)
        for _ in range(100):
            p, q = rand_poly(rng, 2), rand_poly(rng, 2)
            for var in (0, 1):
                assert (p * q).diff(var) == p.diff(var) * q + p * q.diff(var)

    def test_matches_finite_differences(self, rational_points):
        rng = random.Random(5)
        for point in rational_points(2):
            p = rand_poly(rng, 2)
            for var in (0, 1):
                assert p.diff(var).eval(point) == fd_partial(p, var, point)


class TestEval:
    def test_direct_substitution(self):
        assert parse("x1^2+x2", ["x1", "x2"]).eval([2, 3]) == 7

    def test_constant_term_at_zero(self):
        p = parse("x1^3 - 2*x1 + 5/2", ["x1"])
        assert p.eval([0]) == Fraction(5, 2)

    def test_root(self):
        p = parse("(x1-1)*(x1-2)", ["x1"])
        assert p.eval([1]) == 0

    def test_arity_mismatch(self):
        with pytest.raises(ValueError):
            parse("x1", ["x1"]).eval([1, 2])

    def test_against_term_by_term_oracle(self, rational_points):
        rng = random.Random(13)
        for point in rational_points(3, count=8):
            p = rand_poly(rng, 3)
            assert p.eval(point) == eval_term_by_term(p, point)


class TestCompose:
    def test_binomial(self):
        p = parse("y1^2", ["y1"])
        sub = PolyMap.from_exprs(["x1+x2"], ["x1", "x2"])
        assert p.compose(sub) == parse("x1^2+2*x1*x2+x2^2", ["x1", "x2"])

    def test_constant_passthrough(self):
        p = Polynomial.constant(2, Fraction(7, 3))
        sub = PolyMap.from_exprs(["x1", "0"], ["x1"])
        assert p.compose(sub) == Polynomial.constant(1, Fraction(7, 3))

    def test_zero_factor(self):
        p = parse("y1*y2", ["y1", "y2"])
        sub = PolyMap.from_exprs(["x1", "0"], ["x1"])
        assert p.compose(sub).is_zero()

    def test_arity_mismatch(self):
        with pytest.raises(ValueError):
            parse("y1*y2", ["y1", "y2"]).compose(PolyMap.from_exprs(["x1"], ["x1"]))


class TestPolyMap:
    def test_jacobian_frozen_example(self):
        # column (2x, 3x^2), cross-checked by the finite-difference oracle
        f = PolyMap.from_exprs(["x1^2", "x1^3"], ["x1"])
        jac = f.jacobian()
        assert jac[0][0] == parse("2*x1", ["x1"])
        assert jac[1][0] == parse("3*x1^2", ["x1"])
        for point in ([Fraction(1, 2)], [Fraction(-2)], [Fraction(3)],
                      [Fraction(0)], [Fraction(5, 3)]):
            for i in range(2):
                assert jac[i][0].eval(point) == fd_partial(f[i], 0, point)

    def test_jacobian_identity(self):
        jac = PolyMap.identity(3).jacobian()
        for i in range(3):
            for j in range(3):
                expected = Polynomial.constant(3, int(i == j))
                assert jac[i][j] == expected

    def test_jacobian_constant(self):
        f = PolyMap.constant(2, [1, 2, 3])
        assert all(p.is_zero() for row in f.jacobian() for p in row)

    def test_chain_rule_randomized(self):
        rng = random.Random(17)
        for _ in range(20):
            inner = PolyMap(2, [rand_poly(rng, 2, degree=2) for _ in range(2)])
            outer = PolyMap(2, [rand_poly(rng, 2, degree=2) for _ in range(2)])
            composed = outer.compose(inner)
            lhs = composed.jacobian()
            jo = [[p.compose(inner) for p in row] for row in outer.jacobian()]
            ji = inner.jacobian()
            for i in range(2):
                for j in range(2):
                    rhs = Polynomial(2)
                    for k in range(2):
                        rhs = rhs + jo[i][k] * ji[k][j]
                    assert lhs[i][j] == rhs

    def test_compose_eval_consistency(self):
        rng = random.Random(19)
        inner = PolyMap(2, [rand_poly(rng, 2, degree=2) for _ in range(3)])
        outer = rand_poly(rng, 3, degree=2)
        point = [Fraction(1, 2), Fraction(-2)]
        assert outer.compose(inner).eval(point) == outer.eval(inner.eval(point))


def test_monomials_up_to():
    assert monomials_up_to(1, 3) == [(0,), (1,), (2,), (3,)]
    assert len(monomials_up_to(2, 2)) == 6
    assert monomials_up_to(0, 4) == [()]
    monos = monomials_up_to(3, 3)
    assert len(monos) == 20 and len(set(monos)) == 20


def test_lift():
    p = parse("x1*x2", ["x1", "x2"])
    lifted = p.lift(4, 1)
    assert lifted == parse("x2*x3", ["x1", "x2", "x3", "x4"])
    with pytest.raises(ValueError):
        p.lift(2, 1)
