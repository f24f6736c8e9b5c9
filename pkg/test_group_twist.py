"""
Tests for finite groups, ring actions and the twisted group algebra
"""
import random
import unittest

from services.errors import ValidationError
from services.exact_algebra import Field, GradedRing
from services.graded_maps import GradedFreeModule, GradedMatrix
from services.group_twist import (
    GroupData, RingAction, TwistedElement, act_on_vector, check_cocycle, check_intertwines, check_semilinear_module,
    is_invariant, twisted_multiply
)
from services.mf_core import EquivariantMF


def ring(variables, potential):
    return GradedRing.create(Field.rationals(), variables, [1] * len(variables), potential)


class TestGroupData(unittest.TestCase):
    """Multiplication tables"""

    def test_cyclic_group(self):
        G = GroupData.cyclic(3, 'g')
        self.assertEqual(G.elements, ('e', 'g', 'g2'))
        self.assertEqual(G.mul(1, 2), 0)
        self.assertEqual(G.inverse(1), 2)
        self.assertEqual(G.non_identity(), [1, 2])

    def test_from_labels_roundtrip(self):
        G = GroupData.cyclic(2, 's')
        data = G.to_dict()
        self.assertEqual(GroupData.from_labels(data['elements'], data['table']), G)

    def test_missing_inverse_rejected(self):
        with self.assertRaises(ValidationError):
            GroupData.from_labels(['e', 'a'], [['e', 'a'], ['a', 'a']])

    def test_unknown_label_rejected(self):
        with self.assertRaises(ValidationError):
            GroupData.from_labels(['e', 'a'], [['e', 'a'], ['a', 'b']])
        with self.assertRaises(ValidationError):
            GroupData.cyclic(2).index('t')


class TestRingAction(unittest.TestCase):
    """Actions by graded automorphisms fixing the potential"""

    def test_sign_action(self):
        R = ring(['x'], 'x^2')
        action = RingAction.from_mapping(R, GroupData.cyclic(2, 's'), {'s': {'x': '-x'}})
        x = R.gens[0]
        self.assertEqual(action.apply(1, x), -x)
        self.assertTrue(is_invariant(x * x, action))
        self.assertFalse(is_invariant(x, action))
        self.assertEqual(action.to_mapping(), {'s': {'x': '-x'}})

    def test_potential_must_be_invariant(self):
        R = ring(['x'], 'x^3')
        with self.assertRaises(ValidationError):
            RingAction.from_mapping(R, GroupData.cyclic(2, 's'), {'s': {'x': '-x'}})

    def test_images_must_be_homogeneous(self):
        R = ring(['x', 'y'], 'x^2 + y^2')
        with self.assertRaises(ValidationError):
            RingAction.from_mapping(R, GroupData.cyclic(2, 's'), {'s': {'x': 'x^2'}})

    def test_images_must_respect_the_table(self):
        """An order-four substitution cannot represent an element of order two"""
        R = ring(['x', 'y'], 'x^2 + y^2')
        with self.assertRaises(ValidationError):
            RingAction.from_mapping(R, GroupData.cyclic(2, 's'), {'s': {'x': 'y', 'y': '-x'}})

    def test_unknown_variable(self):
        R = ring(['x'], 'x^2')
        with self.assertRaises(ValidationError):
            RingAction.from_mapping(R, GroupData.cyclic(2, 's'), {'s': {'z': 'x'}})


class TestTwistedAlgebra(unittest.TestCase):
    """Q#G multiplication and semilinear structures"""

    def setUp(self):
        self.ring = ring(['x'], 'x^2')
        self.action = RingAction.from_mapping(self.ring, GroupData.cyclic(2, 's'), {'s': {'x': '-x'}})
        self.x = self.ring.gens[0]
        self.module = GradedFreeModule.of([0])

    def test_twisted_product(self):
        """(x s)(x s) = x sigma_s(x) e = -x^2"""
        u = TwistedElement.basis(self.action, 1, self.x)
        product = u * u
        self.assertEqual(product.coefficients[0], -self.x ** 2)
        self.assertFalse(product.coefficients[1])

    def test_twisted_product_is_associative(self):
        R, x = self.ring, self.x
        u = TwistedElement(self.action, (R.zero, x))
        v = TwistedElement(self.action, (x, R.one))
        w = TwistedElement(self.action, (x ** 2, 3 * x))
        self.assertEqual(twisted_multiply(twisted_multiply(u, v), w), twisted_multiply(u, twisted_multiply(v, w)))
        self.assertEqual((u + v).coefficients, (x, x + R.one))

    def test_semilinear_module(self):
        R = self.ring
        sign = [GradedMatrix.identity(R, self.module), GradedMatrix.build(R, self.module, self.module, 0, [['-1']])]
        self.assertTrue(check_semilinear_module(self.action, self.module, sign).ok)
        not_identity = [sign[1], sign[1]]
        self.assertFalse(check_semilinear_module(self.action, self.module, not_identity).ok)

    def test_foreign_ring_is_reported(self):
        other = ring(['x'], 'x^4')
        foreign = [GradedMatrix.identity(other, self.module)] * 2
        report = check_semilinear_module(self.action, self.module, foreign)
        self.assertFalse(report.ok)
        self.assertIn('another ring', report.violation)
        self.assertFalse(check_semilinear_module(self.action).ok)

    def test_semilinear_factorizations(self):
        """Sign structures on (x, x): only M1 = -M0 commutes with the differentials"""
        def signs(m0, m1):
            return EquivariantMF.build(self.ring, [0], [1], [['x']], [['x']], self.action,
                                       M0={'s': [[m0]]}, M1={'s': [[m1]]})

        self.assertTrue(check_semilinear_module(EquivariantMF.build(self.ring, [0], [1], [['x']], [['x']])).ok)
        self.assertTrue(check_semilinear_module(signs('1', '-1')).ok)
        report = check_semilinear_module(signs('1', '1'))
        self.assertFalse(report.ok)
        self.assertIn('not equivariant', report.violation)
        self.assertEqual(report.witness['g'], 's')

    def test_cocycle(self):
        R = self.ring
        good = [GradedMatrix.identity(R, self.module), GradedMatrix.build(R, self.module, self.module, 0, [['-1']])]
        self.assertTrue(check_cocycle(self.action, self.module, good).ok)
        bad = [GradedMatrix.identity(R, self.module), GradedMatrix.build(R, self.module, self.module, 0, [['2']])]
        report = check_cocycle(self.action, self.module, bad)
        self.assertFalse(report.ok)
        self.assertIn('cocycle', report.violation)

    def test_intertwining(self):
        """x: P1 -> P0 intertwines M1 = -1 with M0 = 1 under x -> -x"""
        R = self.ring
        P0, P1 = GradedFreeModule.of([0]), GradedFreeModule.of([1])
        d = GradedMatrix.build(R, P1, P0, 0, [['x']])
        m0 = [GradedMatrix.identity(R, P0), GradedMatrix.build(R, P0, P0, 0, [['1']])]
        m1 = [GradedMatrix.identity(R, P1), GradedMatrix.build(R, P1, P1, 0, [['-1']])]
        self.assertTrue(check_intertwines(self.action, d, m1, m0).ok)
        wrong = [GradedMatrix.identity(R, P0), GradedMatrix.build(R, P0, P0, 0, [['-1']])]
        self.assertFalse(check_intertwines(self.action, d, m1, wrong).ok)

    def test_act_on_vector(self):
        R = self.ring
        mats = [GradedMatrix.identity(R, self.module), GradedMatrix.build(R, self.module, self.module, 0, [['-1']])]
        s = TwistedElement.basis(self.action, 1)
        self.assertEqual(act_on_vector(s, mats, (self.x,)), (self.x,))


def random_polynomial(R, rng, max_degree=2):
    p = R.zero
    for i in range(max_degree + 1):
        for j in range(max_degree + 1 - i):
            p += R.monomial((i, j), R.field.scalar(rng.randint(-3, 3)))
    return p


class TestTwistedAlgebraLaws(unittest.TestCase):
    """Randomized Q#G laws over a sign action and a swap action on x^2 + y^2"""

    def setUp(self):
        R = ring(['x', 'y'], 'x^2 + y^2')
        group = GroupData.cyclic(2, 's')
        module = GradedFreeModule.of([0, 0])

        def structure(rows):
            return [GradedMatrix.identity(R, module), GradedMatrix.build(R, module, module, 0, rows)]

        self.cases = {
            'sign': (RingAction.from_mapping(R, group, {'s': {'x': '-x', 'y': '-y'}}),
                     structure([['1', '0'], ['0', '-1']])),
            'swap': (RingAction.from_mapping(R, group, {'s': {'x': 'y', 'y': 'x'}}),
                     structure([['0', '1'], ['1', '0']])),
        }
        self.ring = R
        self.module = module

    def random_element(self, action, rng):
        return TwistedElement(action, tuple(random_polynomial(self.ring, rng) for _ in range(action.group.order)))

    def test_associative_and_unital(self):
        for name, (action, _) in self.cases.items():
            rng = random.Random(f'twisted-laws/{name}')
            one = TwistedElement.basis(action, action.group.identity)
            for trial in range(100):
                u, v, w = (self.random_element(action, rng) for _ in range(3))
                with self.subTest(action=name, trial=trial):
                    self.assertEqual(twisted_multiply(twisted_multiply(u, v), w),
                                     twisted_multiply(u, twisted_multiply(v, w)))
                    self.assertEqual(one * u, u)
                    self.assertEqual(u * one, u)

    def test_invariants_are_central(self):
        for name, (action, _) in self.cases.items():
            rng = random.Random(f'twisted-center/{name}')
            for trial in range(50):
                p = random_polynomial(self.ring, rng)
                a = p + action.apply(1, p)
                self.assertTrue(is_invariant(a, action))
                central = TwistedElement.basis(action, action.group.identity, a)
                u = self.random_element(action, rng)
                with self.subTest(action=name, trial=trial):
                    self.assertEqual(central * u, u * central)

    def test_semilinear_action_is_a_module(self):
        """(u v) . m = u . (v . m) for structures that pass the semilinear check"""
        for name, (action, matrices) in self.cases.items():
            self.assertTrue(check_semilinear_module(action, self.module, matrices).ok)
            rng = random.Random(f'twisted-module/{name}')
            for trial in range(50):
                u, v = self.random_element(action, rng), self.random_element(action, rng)
                m = (random_polynomial(self.ring, rng), random_polynomial(self.ring, rng))
                with self.subTest(action=name, trial=trial):
                    self.assertEqual(act_on_vector(u * v, matrices, m),
                                     act_on_vector(u, matrices, act_on_vector(v, matrices, m)))


if __name__ == '__main__':
    unittest.main()
