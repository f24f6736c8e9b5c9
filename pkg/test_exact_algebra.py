"""
Tests for exact fields, graded rings and linear algebra
"""
import random
import unittest

from services.errors import MixedRingError, ParseError, ValidationError
from services.exact_algebra import (
    Field, GradedRing, Subspace, format_polynomial, is_homogeneous, is_isolated_singularity,
    matrix_rank, parse_polynomial, poly_arith, solve_linear, tjurina_algebra
)


def ring(variables, weights, potential, field=None):
    return GradedRing.create(field or Field.rationals(), variables, weights, potential)


def random_polynomial(R, rng, max_degree=3):
    """Dense random polynomial in two variables with small integer coefficients."""
    p = R.zero
    for i in range(max_degree + 1):
        for j in range(max_degree + 1 - i):
            p += R.monomial((i, j), R.field.scalar(rng.randint(-5, 5)))
    return p


def apply_matrix(matrix, vector, zero):
    out = []
    for row in matrix:
        acc = zero
        for a, b in zip(row, vector):
            acc += a * b
        out.append(acc)
    return out


class TestGradedRing(unittest.TestCase):
    """Ring construction and polynomial parsing"""

    def test_potential_degree(self):
        """Weighted degree of the potential"""
        R = ring(['x', 'y'], [2, 3], 'x^3 + y^2')
        self.assertEqual(R.df, 6)
        self.assertEqual(R.ngens, 2)

    def test_potential_is_canonicalised(self):
        """Equivalent potentials give equal rings"""
        self.assertEqual(ring(['x', 'y'], [1, 1], 'y^2 + x^2'), ring(['x', 'y'], [1, 1], 'x**2 + y**2'))

    def test_inhomogeneous_potential_rejected(self):
        """A potential that is not weighted-homogeneous is a validation error"""
        with self.assertRaises(ValidationError):
            ring(['x', 'y'], [1, 1], 'x^2 + y')

    def test_bad_weights_rejected(self):
        with self.assertRaises(ValidationError):
            ring(['x'], [0], 'x^2')
        with self.assertRaises(ValidationError):
            ring(['x', 'y'], [1], 'x^2')

    def test_unknown_field_kind(self):
        with self.assertRaises(ValidationError):
            Field('reals')

    def test_composite_modulus_rejected(self):
        with self.assertRaises(ValidationError):
            Field.prime(6)

    def test_parse_rejects_code(self):
        """Only polynomial text is accepted"""
        R = ring(['x'], [1], 'x^2')
        for text in ('__import__("os")', 'x; y', '', '1.5*x', 'z^2'):
            with self.subTest(text=text):
                with self.assertRaises(ParseError):
                    parse_polynomial(text, R)

    def test_parse_and_format(self):
        R = ring(['x', 'y'], [1, 1], 'x^2 + y^2')
        p = R.parse('1/2*x*y - y^2 + x^2')
        self.assertTrue(is_homogeneous(p, R, 2))
        self.assertFalse(is_homogeneous(p + R.parse('x'), R))
        self.assertEqual(R.parse(format_polynomial(p, R)), p)

    def test_finite_field_arithmetic(self):
        """Coefficients are reduced mod p and bad denominators are refused"""
        R = ring(['x'], [1], 'x^3', Field.prime(7))
        self.assertEqual(R.parse('8*x'), R.parse('x'))
        with self.assertRaises(ParseError):
            R.parse('1/7*x')

    def test_poly_arith(self):
        R = ring(['x', 'y'], [1, 1], 'x^2 + y^2')
        x, y = R.gens
        self.assertEqual(poly_arith(x, y, 'mul'), R.parse('x*y'))
        self.assertEqual(poly_arith(x, -x), R.zero)
        self.assertEqual(poly_arith(x, y, 'sub'), R.parse('x - y'))
        with self.assertRaises(ValidationError):
            poly_arith(x, y, 'div')

    def test_poly_arith_mixed_rings(self):
        R = ring(['x', 'y'], [1, 1], 'x^2 + y^2')
        S = ring(['t'], [1], 't^2')
        with self.assertRaises(MixedRingError):
            poly_arith(R.gens[0], S.gens[0], 'add')

    def test_ring_axioms_on_random_triples(self):
        """Commutative ring laws hold exactly over QQ and GF(7)"""
        for field in (Field.rationals(), Field.prime(7)):
            R = ring(['x', 'y'], [1, 1], 'x^2 + y^2', field)
            rng = random.Random(f'ring-axioms/{field.describe()}')
            for _ in range(100):
                a, b, c = (random_polynomial(R, rng) for _ in range(3))
                with self.subTest(field=field.describe(), a=R.format(a), b=R.format(b), c=R.format(c)):
                    add = lambda p, q: poly_arith(p, q, 'add')
                    mul = lambda p, q: poly_arith(p, q, 'mul')
                    self.assertEqual(add(add(a, b), c), add(a, add(b, c)))
                    self.assertEqual(add(a, b), add(b, a))
                    self.assertEqual(mul(mul(a, b), c), mul(a, mul(b, c)))
                    self.assertEqual(mul(a, b), mul(b, a))
                    self.assertEqual(mul(a, add(b, c)), add(mul(a, b), mul(a, c)))
                    self.assertEqual(add(a, R.zero), a)
                    self.assertEqual(mul(a, R.one), a)
                    self.assertEqual(poly_arith(a, a, 'sub'), R.zero)

    def test_ring_dict_roundtrip(self):
        R = ring(['x', 'y'], [1, 2], 'x^4 + y^2', Field.prime(5))
        self.assertEqual(GradedRing.from_dict(R.to_dict()), R)

    def test_malformed_ring_dict(self):
        with self.assertRaises(ParseError):
            GradedRing.from_dict({'variables': ['x']})


class TestLinearAlgebra(unittest.TestCase):
    """Exact solving, rank and subspaces"""

    def setUp(self):
        self.domain = Field.rationals().domain
        self.k = self.domain.convert

    def test_solve_consistent(self):
        k = self.k
        result = solve_linear([[k(1), k(2)], [k(2), k(4)]], [k(3), k(6)], self.domain)
        self.assertTrue(result.consistent)
        x, y = result.solution
        self.assertEqual(x + 2 * y, k(3))
        self.assertEqual(len(result.kernel), 1)

    def test_solve_inconsistent(self):
        k = self.k
        result = solve_linear([[k(1), k(1)], [k(1), k(1)]], [k(1), k(2)], self.domain)
        self.assertFalse(result.consistent)

    def test_random_systems(self):
        """Solutions satisfy A x = b, kernel vectors satisfy A k = 0, rank + nullity = columns"""
        rng = random.Random('linear-systems')
        k, zero = self.k, self.domain.zero
        for trial in range(100):
            nrows, ncols = rng.randint(1, 5), rng.randint(1, 6)
            matrix = [[k(rng.choice([0, 0, 1, -1, 2, -3])) for _ in range(ncols)] for _ in range(nrows)]
            if trial % 2:
                rhs = [k(rng.randint(-4, 4)) for _ in range(nrows)]
            else:
                rhs = apply_matrix(matrix, [k(rng.randint(-4, 4)) for _ in range(ncols)], zero)
            with self.subTest(trial=trial):
                result = solve_linear(matrix, rhs, self.domain)
                if trial % 2 == 0:
                    self.assertTrue(result.consistent)
                if result.consistent:
                    self.assertEqual(apply_matrix(matrix, result.solution, zero), rhs)
                for vector in result.kernel:
                    self.assertEqual(apply_matrix(matrix, vector, zero), [zero] * nrows)
                self.assertEqual(matrix_rank(matrix, self.domain) + len(result.kernel), ncols)

    def test_rank_over_finite_field(self):
        """A matrix of full rank over QQ can drop rank mod p"""
        F = Field.prime(3)
        k = F.domain.convert
        m = [[k(1), k(2)], [k(2), k(1)]]
        self.assertEqual(matrix_rank(m, F.domain), 1)
        q = [[self.k(1), self.k(2)], [self.k(2), self.k(1)]]
        self.assertEqual(matrix_rank(q, self.domain), 2)

    def test_subspace_coordinates(self):
        k = self.k
        S = Subspace(3, self.domain, [{0: k(1), 1: k(1)}, {1: k(1), 2: k(1)}])
        self.assertEqual(S.dimension, 2)
        self.assertTrue(S.contains({0: k(1), 2: k(-1)}))
        self.assertFalse(S.contains({0: k(1)}))
        self.assertIsNone(S.coordinates({2: k(5), 0: k(1)}))


class TestTjurina(unittest.TestCase):
    """Isolated singularity check"""

    def test_cubic_in_one_variable(self):
        report = tjurina_algebra(ring(['x'], [1], 'x^3'))
        self.assertTrue(report.isolated)
        self.assertEqual(report.dimension, 2)
        self.assertEqual(report.hilbert, [1, 1])

    def test_sum_of_squares(self):
        report = tjurina_algebra(ring(['x', 'y'], [1, 1], 'x^2 + y^2'))
        self.assertTrue(report.isolated)
        self.assertEqual(report.dimension, 1)

    def test_non_isolated(self):
        """x^2*y is singular along the y-axis"""
        report = tjurina_algebra(ring(['x', 'y'], [1, 1], 'x^2*y'))
        self.assertFalse(report.isolated)
        self.assertIsNone(report.dimension)

    def test_is_isolated_singularity(self):
        self.assertEqual(is_isolated_singularity(ring(['x'], [1], 'x^4')), (True, 3))
        self.assertEqual(is_isolated_singularity(ring(['x', 'y'], [1, 1], 'x^3 + y^3')), (True, 4))
        self.assertEqual(is_isolated_singularity(ring(['x', 'y'], [1, 1], 'x^2*y')), (False, None))


if __name__ == '__main__':
    unittest.main()
