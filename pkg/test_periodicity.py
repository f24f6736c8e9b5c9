"""
Tests for hypersurface quotients, syzygies and the periodic resolution of k
"""
import unittest

from services.errors import DegreeWindowExhausted, NoPeriodicityError, PreconditionError
from services.exact_algebra import Field, GradedRing
from services.mf_core import EquivariantMF, find_isomorphism, shift, twist, validate_mf
from services.periodicity import (
    HypersurfaceQuotient, extract_mf, hilbert_function, kstab, residue_field_module, resolve_periodic,
    syzygy_step
)


def ring(variables, potential, field=None):
    return GradedRing.create(field or Field.rationals(), variables, [1] * len(variables), potential)


class TestHypersurfaceQuotient(unittest.TestCase):
    """Degree pieces of Q/(f)"""

    def test_truncated_polynomials(self):
        R = HypersurfaceQuotient(ring(['x'], 'x^3'))
        self.assertEqual([R.dimension(d) for d in range(5)], [1, 1, 1, 0, 0])
        self.assertEqual(R.dimension(-1), 0)

    def test_plane_conic(self):
        R = HypersurfaceQuotient(ring(['x', 'y'], 'x^2 + y^2'))
        self.assertEqual([R.dimension(d) for d in range(5)], [1, 2, 2, 2, 2])

    def test_reduction_mod_f(self):
        Q = ring(['x', 'y'], 'x^2 + y^2')
        R = HypersurfaceQuotient(Q)
        self.assertTrue(R.is_zero_mod_f(Q.parse('x^3 + x*y^2')))
        self.assertFalse(R.is_zero_mod_f(Q.parse('x^2')))

    def test_residue_field_hilbert_function(self):
        k = residue_field_module(ring(['x', 'y'], 'x^2 + y^2'))
        self.assertEqual(hilbert_function(k, range(4)), [1, 0, 0, 0])


class TestSyzygyStep(unittest.TestCase):
    """One step of a minimal graded resolution"""

    def setUp(self):
        self.k = residue_field_module(ring(['x'], 'x^3'))

    def test_first_syzygy_of_residue_field(self):
        """ker(x) on k[x]/x^3 is generated by x^2 in degree 3"""
        step = syzygy_step(self.k)
        self.assertEqual(list(step.module.presentation.source.weights), [3])
        self.assertEqual(step.kernel_dimensions[1], 0)
        self.assertEqual(step.kernel_dimensions[3], 1)

    def test_narrow_window_exhausted(self):
        with self.assertRaises(DegreeWindowExhausted):
            syzygy_step(self.k, degree_bound=2)


class TestPeriodicResolution(unittest.TestCase):
    """Periodicity detection and extraction"""

    def test_powers_of_x(self):
        """The residue field of k[x]/x^n gives (x, x^(n-1))"""
        for n in range(2, 6):
            with self.subTest(n=n):
                R = ring(['x'], f'x^{n}')
                tail = resolve_periodic(residue_field_module(R))
                self.assertEqual(tail.period_start, 1)
                expected = EquivariantMF.build(R, [0], [1], [['x']], [[f'x^{n - 1}']])
                self.assertEqual(extract_mf(tail, 1), expected)

    def test_later_steps_are_also_factorizations(self):
        R = ring(['x'], 'x^3')
        tail = resolve_periodic(residue_field_module(R), max_steps=6)
        X = extract_mf(tail, tail.period_start + 1)
        self.assertTrue(validate_mf(X).ok)
        with self.assertRaises(PreconditionError):
            extract_mf(tail, 0)

    def test_period_steps_agree_up_to_shift_and_twist(self):
        """Steps s, s+1 and s+2 give X, X[1] and X(d_f) after the matching twist"""
        for potential, variables in (('x^3', ['x']), ('x^4', ['x']), ('x^2 + y^2', ['x', 'y'])):
            R = ring(variables, potential)
            tail = resolve_periodic(residue_field_module(R))
            s = tail.period_start
            X = extract_mf(tail, s)
            with self.subTest(potential=potential):
                self.assertIsNotNone(find_isomorphism(twist(shift(X), R.df), extract_mf(tail, s + 1)))
                self.assertIsNotNone(find_isomorphism(twist(X, R.df), extract_mf(tail, s + 2)))

    def test_plane_conic(self):
        X = kstab(ring(['x', 'y'], 'x^2 + y^2'))
        self.assertTrue(validate_mf(X).ok)
        self.assertEqual(X.rank, 2)

    def test_over_a_prime_field(self):
        X = kstab(ring(['x', 'y'], 'x^2 + y^2', Field.prime(5)))
        self.assertTrue(validate_mf(X).ok)

    def test_step_budget(self):
        with self.assertRaises(NoPeriodicityError):
            resolve_periodic(residue_field_module(ring(['x', 'y'], 'x^2 + y^2')), max_steps=1)


if __name__ == '__main__':
    unittest.main()
