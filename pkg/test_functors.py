"""
Tests for base change, forget/induce, averaging and strictification
"""
import random
import unittest

from services.errors import UnsupportedCharacteristicError, ValidationError
from services.exact_algebra import Field, GradedRing
from services.functors import (
    HomotopyEquivariantObject, RingHom, averaging_splitting, base_change, base_change_homotopy, base_change_morphism,
    certify_homotopy_equivariant_object, compare_end_homology, forget, induce, strictify
)
from services.group_twist import GroupData, RingAction
from services.mf_core import (
    EquivariantMF, Homotopy, average_homotopy, check_morphism, direct_sum, find_isomorphism, identity, is_homotopic,
    validate_mf, zero_morphism
)
from services.splitting import ks_decompose
from services.suite import object_families, random_matrix


def sign_setup(field=None):
    R = GradedRing.create(field or Field.rationals(), ['x'], [1], 'x^2')
    action = RingAction.from_mapping(R, GroupData.cyclic(2, 's'), {'s': {'x': '-x'}})
    plus = EquivariantMF.build(R, [0], [1], [['x']], [['x']], action, M0={'s': [['1']]}, M1={'s': [['-1']]})
    minus = EquivariantMF.build(R, [0], [1], [['x']], [['x']], action, M0={'s': [['-1']]}, M1={'s': [['1']]})
    return action, plus, minus


class TestBaseChange(unittest.TestCase):
    """Ring maps sending f to f'"""

    def setUp(self):
        self.action, self.plus, self.minus = sign_setup()

    def gaussian(self):
        target_ring = GradedRing.create(Field.extension('sqrt(-1)'), ['x'], [1], 'x^2')
        target = RingAction.from_mapping(target_ring, self.action.group, {'s': {'x': '-x'}})
        return RingHom.from_mapping(self.action, target, {'x': 'x'})

    def test_field_extension(self):
        phi = self.gaussian()
        Y = base_change(phi, self.plus)
        self.assertEqual(Y.rank, 1)
        self.assertTrue(validate_mf(Y).ok)
        self.assertTrue(check_morphism(base_change_morphism(phi, identity(self.plus))).ok)

    def test_field_extension_preserves_stable_end(self):
        comparisons = compare_end_homology(self.gaussian(), self.plus, [0, 1])
        self.assertEqual(len(comparisons), 4)
        self.assertTrue(all(c.isomorphism for c in comparisons))

    def test_adding_a_variable(self):
        target_ring = GradedRing.create(Field.rationals(), ['x', 'y'], [1, 1], 'x^2')
        target = RingAction.from_mapping(target_ring, self.action.group, {'s': {'x': '-x'}})
        phi = RingHom.from_mapping(self.action, target, {'x': 'x'})
        self.assertTrue(validate_mf(base_change(phi, self.minus)).ok)

    def test_potential_must_be_preserved(self):
        with self.assertRaises(ValidationError):
            RingHom.from_mapping(self.action, self.action, {'x': '2*x'})

    def test_null_homotopic_maps_stay_null_homotopic(self):
        phi = self.gaussian()
        X = direct_sum(self.plus, self.minus, self.plus)
        rng = random.Random('base-change-null')
        ring = X.ring
        for trial in range(10):
            H = average_homotopy(Homotopy(X, X, random_matrix(ring, X.p0, X.p1, 0, rng),
                                          random_matrix(ring, X.p1, X.p0, -ring.df, rng)))
            with self.subTest(trial=trial):
                moved = base_change_morphism(phi, H.boundary())
                self.assertEqual(base_change_homotopy(phi, H).boundary(), moved)
                self.assertTrue(is_homotopic(moved, zero_morphism(moved.source, moved.target)))


class TestInduceAndAverage(unittest.TestCase):
    """Forget, induce and the averaging splitting"""

    def setUp(self):
        self.action, self.plus, self.minus = sign_setup()

    def test_forget_drops_the_action(self):
        P = forget(self.plus)
        self.assertTrue(P.group.is_trivial)
        self.assertEqual(P.A, self.plus.A)

    def test_induced_object_contains_both_structures(self):
        E = induce(forget(self.plus), self.action)
        self.assertTrue(validate_mf(E).ok)
        self.assertEqual(E.rank, 2)
        D = ks_decompose(E)
        self.assertEqual(len(D.classes), 2)
        found = [any(find_isomorphism(D.summands[c.representative].obj, Y) is not None for c in D.classes)
                 for Y in (self.plus, self.minus)]
        self.assertEqual(found, [True, True])

    def test_averaging_splitting(self):
        result = averaging_splitting(self.plus)
        self.assertTrue(all(result.checks.values()))
        self.assertEqual(result.p @ result.j, identity(self.plus))
        self.assertEqual(result.induced.rank, 2)

    def test_forget_and_induce_are_additive(self):
        self.assertIsNotNone(find_isomorphism(forget(direct_sum(self.plus, self.minus)),
                                              direct_sum(forget(self.plus), forget(self.minus))))
        family = next(f for f in object_families() if f.name == 'x^4/sign')
        rng = random.Random('induce-additive')
        for trial in range(3):
            P, Q = (forget(family.blocks[rng.randrange(len(family.blocks))]) for _ in range(2))
            with self.subTest(trial=trial):
                self.assertIsNotNone(find_isomorphism(induce(direct_sum(P, Q), family.action),
                                                      direct_sum(induce(P, family.action), induce(Q, family.action))))

    def test_characteristic_two_refused(self):
        """|G| = 2 is not invertible over GF(2)"""
        R = GradedRing.create(Field.prime(2), ['x', 'y'], [1, 1], 'x^2 + y^2')
        action = RingAction.from_mapping(R, GroupData.cyclic(2, 's'), {'s': {'x': 'y', 'y': 'x'}})
        Y = EquivariantMF.build(R, [0], [1], [['x + y']], [['x + y']], action,
                                M0={'s': [['1']]}, M1={'s': [['1']]})
        self.assertTrue(validate_mf(Y).ok)
        with self.assertRaises(UnsupportedCharacteristicError):
            averaging_splitting(Y)


class TestStrictification(unittest.TestCase):
    """Homotopy-equivariant objects made genuinely equivariant"""

    def setUp(self):
        self.action, self.plus, self.minus = sign_setup()

    def test_genuine_objects_strictify_to_themselves(self):
        for X in (self.plus, self.minus):
            with self.subTest(structure=X.M0[1].to_text()):
                H = HomotopyEquivariantObject.from_equivariant(X)
                result = strictify(H, seed=0)
                self.assertTrue(validate_mf(result.obj).ok)
                self.assertIsNotNone(find_isomorphism(result.obj, X))
                self.assertIn('phi_psi', result.homotopies)
                self.assertIn('compatible:s', result.homotopies)

    def test_cocycle_failure_rejected(self):
        """theta_s = 2 sign(1, -1) squares to 4, not to the identity"""
        P = forget(self.plus)
        H = HomotopyEquivariantObject.build(P, self.action, {'s': ([['2']], [['-2']])})
        with self.assertRaises(ValidationError):
            certify_homotopy_equivariant_object(H)


if __name__ == '__main__':
    unittest.main()
