"""
Tests for graded matrices and spaces of degree-legal maps
"""
import itertools
import random
import unittest

from services.errors import DimensionMismatchError, ValidationError
from services.exact_algebra import Field, GradedRing, Subspace
from services.graded_maps import GradedFreeModule, GradedMatrix, MapSpace, graded_map_space, solve_for_maps
from services.suite import random_matrix


class TestGradedMaps(unittest.TestCase):

    def setUp(self):
        self.ring = GradedRing.create(Field.rationals(), ['x', 'y'], [1, 1], 'x^2 + y^2')
        self.rank_one = GradedFreeModule.of([0])

    def test_map_space_basis(self):
        """Degree-one maps of a rank-one module are spanned by the variables"""
        basis = graded_map_space(self.rank_one, self.rank_one, 1, self.ring)
        self.assertEqual(len(basis), 2)
        for matrix in basis:
            self.assertEqual(matrix.degree_violations(), [])
        x, y = self.ring.gens
        self.assertEqual({m.entries[0][0] for m in basis}, {x, y})

    def test_negative_degree_space_is_empty(self):
        self.assertEqual(graded_map_space(self.rank_one, GradedFreeModule.of([1]), 0, self.ring), [])

    def test_dimension_counts_homogeneous_pieces(self):
        """The basis has one element per entry and monomial of the entry's degree, and spans"""
        R = GradedRing.create(Field.rationals(), ['x', 'y'], [1, 2], 'x^4 + y^2')
        rng = random.Random('map-space-dimension')

        def piece(degree):
            return sum(1 for a, b in itertools.product(range(degree + 1), repeat=2) if a + 2 * b == degree)

        for trial in range(20):
            source = GradedFreeModule.of([rng.randint(0, 3) for _ in range(rng.randint(1, 3))])
            target = GradedFreeModule.of([rng.randint(0, 3) for _ in range(rng.randint(1, 3))])
            shift = rng.randint(0, 4)
            with self.subTest(trial=trial, source=source.weights, target=target.weights, shift=shift):
                basis = graded_map_space(source, target, shift, R)
                expected = sum(piece(s + shift - t) for s in source.weights for t in target.weights if s + shift >= t)
                self.assertEqual(len(basis), expected)
                space = MapSpace(R, [(source, target, shift)])
                vectors = [space.flatten([b]) for b in basis]
                self.assertEqual(Subspace(space.dimension, R.field.domain, vectors).dimension, expected)
                sample = random_matrix(R, source, target, shift, rng)
                self.assertEqual(space.unflatten(space.flatten([sample]))[0], sample)

    def test_composition_adds_shifts(self):
        a = GradedMatrix.build(self.ring, self.rank_one, self.rank_one, 1, [['x']])
        b = GradedMatrix.build(self.ring, self.rank_one, self.rank_one, 1, [['y']])
        product = a @ b
        self.assertEqual(product.shift, 2)
        self.assertEqual(product.degree_violations(), [])
        with self.assertRaises(DimensionMismatchError):
            a @ GradedMatrix.zero(self.ring, self.rank_one, GradedFreeModule.of([0, 0]), 1)

    def test_degree_violation_reported(self):
        bad = GradedMatrix.build(self.ring, self.rank_one, self.rank_one, 1, [['x^2']])
        self.assertEqual(bad.degree_violations(), [(0, 0)])
        space = MapSpace(self.ring, [(self.rank_one, self.rank_one, 1)])
        with self.assertRaises(ValidationError):
            space.flatten([bad])

    def test_solve_for_maps(self):
        """x*h = x*y has the unique degree-one solution h = y"""
        space = MapSpace(self.ring, [(self.rank_one, self.rank_one, 1)])
        left = GradedMatrix.scalar(self.ring, self.rank_one, self.ring.gens[0], 1)

        def equations(maps):
            return [left @ maps[0]]

        rhs = GradedMatrix.build(self.ring, self.rank_one, self.rank_one, 2, [['x*y']])
        solution = solve_for_maps(space, equations, [rhs])
        self.assertIsNotNone(solution)
        self.assertEqual(solution[0].entries[0][0], self.ring.gens[1])

        unreachable = GradedMatrix.build(self.ring, self.rank_one, self.rank_one, 2, [['y^2']])
        self.assertIsNone(solve_for_maps(space, equations, [unreachable]))


if __name__ == '__main__':
    unittest.main()
