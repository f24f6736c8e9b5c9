"""
Tests for equivariant matrix factorizations, morphisms and stable Hom
"""
import random
import unittest

from services.errors import DimensionMismatchError, ValidationError
from services.exact_algebra import Field, GradedRing
from services.group_twist import GroupData, RingAction
from services.mf_core import (
    EquivariantMF, MFMorphism, check_morphism, cone, contraction, direct_sum, direct_sum_maps, find_isomorphism,
    identity, is_contractible, is_homotopic, morphism_space, require_valid, shift, stable_hom, strict_hom,
    twist, validate_mf, zero_morphism
)
from services.suite import object_families, random_null_homotopic, random_sample


def cubic_ring():
    return GradedRing.create(Field.rationals(), ['x'], [1], 'x^3')


def sign_action():
    R = GradedRing.create(Field.rationals(), ['x'], [1], 'x^2')
    return RingAction.from_mapping(R, GroupData.cyclic(2, 's'), {'s': {'x': '-x'}})


def sign_object(action, p0_sign, p1_sign):
    return EquivariantMF.build(action.ring, [0], [1], [['x']], [['x']], action,
                               M0={'s': [[str(p0_sign)]]}, M1={'s': [[str(p1_sign)]]})


class TestValidation(unittest.TestCase):
    """validate_mf on good and bad factorizations"""

    def setUp(self):
        self.ring = cubic_ring()

    def test_valid_factorization(self):
        X = EquivariantMF.build(self.ring, [0], [1], [['x']], [['x^2']])
        report = validate_mf(X)
        self.assertTrue(report.ok)
        self.assertEqual(X.rank, 1)

    def test_product_must_be_potential(self):
        X = EquivariantMF.build(self.ring, [0], [1], [['x']], [['x']])
        report = validate_mf(X)
        self.assertFalse(report.ok)
        self.assertIn('f*I', report.violation)
        with self.assertRaises(ValidationError):
            require_valid(X, 'broken')

    def test_entries_must_have_the_right_degree(self):
        """A = x^2 on P1 = k(-1) has the wrong degree even though AB = f"""
        X = EquivariantMF.build(self.ring, [0], [1], [['x^2']], [['x']])
        report = validate_mf(X)
        self.assertFalse(report.ok)
        self.assertIn('degree', report.violation)

    def test_ranks_must_agree(self):
        with self.assertRaises(DimensionMismatchError):
            EquivariantMF.build(self.ring, [0], [1, 1], [['x']], [['x^2']])

    def test_equivariant_structure_checked(self):
        action = sign_action()
        self.assertTrue(validate_mf(sign_object(action, 1, -1)).ok)
        self.assertFalse(validate_mf(sign_object(action, 1, 1)).ok)


class TestMorphisms(unittest.TestCase):
    """Morphisms, homotopies and the stable category"""

    def setUp(self):
        self.ring = cubic_ring()
        self.X = EquivariantMF.build(self.ring, [0], [1], [['x']], [['x^2']])
        self.C = EquivariantMF.build(self.ring, [0], [0], [['1']], [['x^3']])

    def test_identity_is_a_morphism(self):
        self.assertTrue(check_morphism(identity(self.X)).ok)

    def test_non_chain_map_rejected(self):
        u = MFMorphism(self.X, self.X, identity(self.X).U0, identity(self.X).U1.scale(self.ring.field.scalar(2)))
        report = check_morphism(u)
        self.assertFalse(report.ok)

    def test_shift_squared_is_a_twist(self):
        self.assertEqual(shift(shift(self.X)), twist(self.X, -self.ring.df))
        self.assertTrue(validate_mf(shift(self.X)).ok)

    def test_contractible_object(self):
        self.assertTrue(is_contractible(self.C))
        self.assertFalse(is_contractible(self.X))
        H = contraction(self.C)
        self.assertEqual(H.boundary(), identity(self.C) - zero_morphism(self.C, self.C))

    def test_stable_endomorphisms(self):
        """The residue field of k[x]/x^3 has stable endomorphisms k"""
        hom = stable_hom(self.X, self.X)
        self.assertEqual(hom.dimension, 1)
        self.assertGreaterEqual(strict_hom(self.X, self.X).dimension, hom.dimension)
        self.assertEqual(stable_hom(self.C, self.C).dimension, 0)

    def test_scaled_object_is_isomorphic(self):
        Y = EquivariantMF.build(self.ring, [0], [1], [['2*x']], [['1/2*x^2']])
        certificate = find_isomorphism(self.X, Y)
        self.assertIsNotNone(certificate)
        self.assertEqual(certificate.source_homotopy.boundary(),
                         certificate.backward @ certificate.forward - identity(self.X))
        self.assertEqual(certificate.target_homotopy.boundary(),
                         certificate.forward @ certificate.backward - identity(Y))

    def test_shift_is_not_isomorphic(self):
        """k[x]/x and k[x]/x^2 are different modules"""
        self.assertIsNone(find_isomorphism(self.X, twist(shift(self.X), 2)))

    def test_direct_sum_maps(self):
        S, inclusions, projections = direct_sum_maps([self.X, self.C])
        self.assertEqual(S.rank, 2)
        for k, Y in enumerate([self.X, self.C]):
            self.assertEqual(projections[k] @ inclusions[k], identity(Y))
        self.assertTrue((projections[0] @ inclusions[1]).is_zero())

    def test_cone_of_identity_is_contractible(self):
        data = cone(identity(self.X))
        self.assertTrue(validate_mf(data.cone).ok)
        self.assertTrue(is_contractible(data.cone))

    def test_identity_homotopic_to_itself(self):
        self.assertTrue(is_homotopic(identity(self.X), identity(self.X)))
        self.assertFalse(is_homotopic(identity(self.X), zero_morphism(self.X, self.X)))


class TestEquivariantHom(unittest.TestCase):
    """Hom spaces respect the group action"""

    def setUp(self):
        self.action = sign_action()
        self.plus = sign_object(self.action, 1, -1)
        self.minus = sign_object(self.action, -1, 1)

    def test_equivariant_endomorphisms(self):
        self.assertEqual(stable_hom(self.plus, self.plus).dimension, 1)

    def test_distinct_structures_have_no_maps(self):
        self.assertEqual(strict_hom(self.plus, self.minus).dimension, 0)
        self.assertIsNone(find_isomorphism(self.plus, self.minus))

    def test_decomposable_objects_are_matched_summandwise(self):
        """plus + minus and minus + plus are isomorphic although no single basis composite is a unit"""
        X = direct_sum(self.plus, self.minus)
        Y = direct_sum(self.minus, self.plus)
        certificate = find_isomorphism(X, Y)
        self.assertIsNotNone(certificate)
        self.assertEqual(certificate.source_homotopy.boundary(),
                         certificate.backward @ certificate.forward - identity(X))
        self.assertEqual(certificate.target_homotopy.boundary(),
                         certificate.forward @ certificate.backward - identity(Y))
        self.assertIsNone(find_isomorphism(X, direct_sum(self.plus, self.plus)))

    def test_morphism_space_basis(self):
        basis = morphism_space(self.plus, self.plus)
        self.assertEqual(len(basis), 1)
        self.assertTrue(check_morphism(basis[0]).ok)
        self.assertEqual(morphism_space(self.plus, self.minus), [])


def random_morphism(X, Y, rng):
    """A random combination of the strict Hom basis."""
    u = zero_morphism(X, Y)
    for b in morphism_space(X, Y):
        u = u + b.scale(X.ring.field.scalar(rng.randint(-2, 2)))
    return u


class TestStableCategoryLaws(unittest.TestCase):
    """Randomized checks of the additive and triangulated structure"""

    def setUp(self):
        by_name = {family.name: family for family in object_families()}
        self.families = [by_name[name] for name in ('x^4/sign', 'x^2+y^2/swap', 'x^3+y^3')]

    def samples(self, label, count=4):
        for family in self.families:
            rng = random.Random(f'{label}/{family.name}')
            for trial in range(count):
                yield family, trial, rng, random_sample(family, rng, max_rank=2).obj

    def test_null_homotopic_maps_form_an_ideal(self):
        for family, trial, rng, X in self.samples('ideal'):
            h, k = random_null_homotopic(X, rng), random_null_homotopic(X, rng)
            u = random_morphism(X, X, rng)
            zero = zero_morphism(X, X)
            with self.subTest(family=family.name, trial=trial):
                self.assertTrue(is_homotopic(h, zero))
                self.assertTrue(is_homotopic(h + k, zero))
                self.assertTrue(is_homotopic(u @ h, zero))
                self.assertTrue(is_homotopic(h @ u, zero))

    def test_constructions_stay_valid(self):
        for family, trial, rng, X in self.samples('constructions'):
            Y = family.blocks[rng.randrange(len(family.blocks))]
            u = random_morphism(X, X, rng)
            data = cone(u)
            with self.subTest(family=family.name, trial=trial):
                for built in (direct_sum(X, Y), shift(X), twist(X, 3), data.cone):
                    self.assertTrue(validate_mf(built).ok, validate_mf(built).violation)
                self.assertTrue(check_morphism(data.inclusion).ok)
                self.assertTrue(check_morphism(data.projection).ok)
                self.assertTrue((data.projection @ data.inclusion).is_zero())

    def test_stable_hom_is_additive(self):
        for family in self.families:
            rng = random.Random(f'additive/{family.name}')
            for trial in range(3):
                X, Y, Z = (family.blocks[rng.randrange(len(family.blocks))] for _ in range(3))
                with self.subTest(family=family.name, trial=trial):
                    self.assertEqual(stable_hom(direct_sum(X, Y), Z).dimension,
                                     stable_hom(X, Z).dimension + stable_hom(Y, Z).dimension)
                    self.assertEqual(stable_hom(Z, direct_sum(X, Y)).dimension,
                                     stable_hom(Z, X).dimension + stable_hom(Z, Y).dimension)


if __name__ == '__main__':
    unittest.main()
