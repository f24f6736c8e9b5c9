"""
Tests for idempotent splitting, Krull-Schmidt and the formal completion
"""
import random
import unittest

from services.errors import PreconditionError, ValidationError
from services.exact_algebra import Field, GradedRing
from services.group_twist import GroupData, RingAction
from services.mf_core import (
    EquivariantMF, MFMorphism, direct_sum, direct_sum_maps, homotopy_witness, identity, validate_mf
)
from services.graded_maps import GradedMatrix
from services.splitting import (
    FormalIdempotentObject, compare_with_split, formal_compose, formal_hom_dimension, formal_identity, formal_morphism,
    ks_decompose, same_decomposition, split_homotopy_idempotent, split_strict_idempotent
)
from services.suite import object_families, random_sample


def induced_sign_object():
    """sigma-orbit sum of (x, x) over k[x]/x^2 with s swapping the two copies"""
    R = GradedRing.create(Field.rationals(), ['x'], [1], 'x^2')
    action = RingAction.from_mapping(R, GroupData.cyclic(2, 's'), {'s': {'x': '-x'}})
    swap = [['0', '1'], ['1', '0']]
    X = EquivariantMF.build(R, [0, 0], [1, 1], [['x', '0'], ['0', '-x']], [['x', '0'], ['0', '-x']],
                            action, M0={'s': swap}, M1={'s': swap})
    return R, action, X


class TestStrictSplitting(unittest.TestCase):
    """Splitting e with e o e = e"""

    def setUp(self):
        self.ring, self.action, self.X = induced_sign_object()
        self.e = MFMorphism(
            self.X, self.X,
            GradedMatrix.build(self.ring, self.X.p0, self.X.p0, 0, [['1/2', '1/2'], ['1/2', '1/2']]),
            GradedMatrix.build(self.ring, self.X.p1, self.X.p1, 0, [['1/2', '-1/2'], ['-1/2', '1/2']])
        )

    def test_split_symmetriser(self):
        result = split_strict_idempotent(self.X, self.e)
        self.assertEqual(result.mode, 'strict')
        self.assertEqual(result.obj.rank, 1)
        self.assertTrue(validate_mf(result.obj).ok)
        self.assertEqual(result.pi @ result.iota, identity(result.obj))
        self.assertEqual(result.iota @ result.pi, self.e)

    def test_non_idempotent_refused(self):
        twice = self.e + self.e
        with self.assertRaises(PreconditionError):
            split_strict_idempotent(self.X, twice)

    def test_krull_schmidt(self):
        """The induced object splits into the two sign structures"""
        D = ks_decompose(self.X)
        self.assertEqual(len(D.summands), 2)
        self.assertEqual(len(D.classes), 2)
        self.assertEqual(D.summary()['contractible'], 0)
        self.assertEqual(D.iota_total @ D.pi_total, identity(self.X))


class TestHomotopySplitting(unittest.TestCase):
    """Splitting e with e o e homotopic to e"""

    def setUp(self):
        self.ring = GradedRing.create(Field.rationals(), ['x'], [1], 'x^3')
        self.X = EquivariantMF.build(self.ring, [0], [1], [['x']], [['x^2']])
        self.C = EquivariantMF.build(self.ring, [0], [0], [['1']], [['x^3']])
        self.S, self.inclusions, self.projections = direct_sum_maps([self.X, self.C])

    def test_contractible_summand_dropped(self):
        D = ks_decompose(self.S)
        self.assertEqual(len(D.summands), 2)
        self.assertEqual(len(D.noncontractible), 1)
        self.assertEqual(len(D.classes), 1)

    def test_identity_splits_to_reduced_part(self):
        result = split_homotopy_idempotent(self.S, identity(self.S))
        self.assertEqual(result.mode, 'homotopy')
        self.assertEqual(result.obj.rank, 1)
        self.assertIsNotNone(homotopy_witness(result.pi @ result.iota, identity(result.obj)))
        self.assertIsNotNone(homotopy_witness(result.iota @ result.pi, identity(self.S)))

    def test_projection_onto_contractible_part_splits_to_zero(self):
        e = self.inclusions[1] @ self.projections[1]
        result = split_homotopy_idempotent(self.S, e)
        self.assertEqual(result.obj.rank, 0)

    def test_same_decomposition(self):
        self.assertTrue(same_decomposition(self.S, self.X))
        self.assertFalse(same_decomposition(direct_sum(self.X, self.X), self.X))


class TestFormalCompletion(unittest.TestCase):
    """Pairs (X, e) compared with split objects"""

    def test_formal_summand_matches_split(self):
        ring = GradedRing.create(Field.rationals(), ['x'], [1], 'x^3')
        X = EquivariantMF.build(ring, [0], [1], [['x']], [['x^2']])
        S, inclusions, projections = direct_sum_maps([X, X])
        e = inclusions[0] @ projections[0]
        P = FormalIdempotentObject.create(S, e)
        self.assertEqual(formal_hom_dimension(P, P), 1)
        split = split_homotopy_idempotent(S, e)
        comparison = compare_with_split(P, split)
        self.assertIn('pi_iota', comparison.homotopies)
        self.assertEqual(split.obj.rank, 1)

    def test_incompatible_map_reports_the_failing_identity(self):
        ring = GradedRing.create(Field.rationals(), ['x'], [1], 'x^3')
        X = EquivariantMF.build(ring, [0], [1], [['x']], [['x^2']])
        S, inclusions, projections = direct_sum_maps([X, X])
        P = FormalIdempotentObject.create(S, inclusions[0] @ projections[0])
        Q = FormalIdempotentObject.create(S, inclusions[1] @ projections[1])
        with self.assertRaises(PreconditionError) as caught:
            formal_morphism(P, Q, identity(S))
        self.assertEqual(caught.exception.details['identity'], 'u e_P = u')
        self.assertTrue(any(e != '0' for row in caught.exception.details['U0'] for e in row))

        swap = inclusions[1] @ projections[0]
        self.assertEqual(formal_morphism(P, Q, swap).map, swap)
        self.assertEqual(formal_compose(formal_identity(P), formal_identity(P)).map, P.idempotent @ P.idempotent)
        with self.assertRaises(ValidationError) as caught:
            formal_compose(formal_identity(Q), formal_identity(P))
        self.assertEqual(caught.exception.details, {'same_object': True, 'same_idempotent': False})


class TestKrullSchmidtUniqueness(unittest.TestCase):
    """Decompositions survive a random equivariant change of basis"""

    def test_conjugated_sums(self):
        by_name = {family.name: family for family in object_families()}
        for name in ('x^3', 'x^4/sign', 'x^2+y^2/sign'):
            family = by_name[name]
            rng = random.Random(f'ks-uniqueness/{name}')
            for trial in range(4):
                sample = random_sample(family, rng, max_rank=3, contractible=trial % 2 == 1)
                with self.subTest(family=name, trial=trial):
                    D = ks_decompose(sample.obj)
                    expected = sorted(family.blocks[k].rank for k in sample.labels if k >= 0)
                    self.assertEqual(sorted(s.obj.rank for s in D.noncontractible), expected)
                    self.assertEqual(len(D.summands), len(sample.labels))
                    self.assertTrue(same_decomposition(sample.obj, sample.plain))


if __name__ == '__main__':
    unittest.main()
