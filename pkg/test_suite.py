"""
Tests for the acceptance corpus runner
"""
import json
import os
import shutil
import tempfile
import unittest

from services.errors import ValidationError
from services.suite import (
    SuiteCounts, check_kstab, check_strictification, object_families, run_suite, sign_structures, write_suite
)
from services.mf_core import validate_mf

NOTHING = dict(homotopy_idempotents=0, classification_samples=0, averaging_objects=0,
               strictify_samples=0, random_algebras=0, strict_idempotents=0)


class TestSuiteCounts(unittest.TestCase):
    """Suite settings from the config's suite block"""

    def test_defaults(self):
        counts = SuiteCounts.from_dict(None)
        self.assertEqual(counts.homotopy_idempotents, 100)
        self.assertEqual(counts.strict_idempotents, 100)
        self.assertTrue(counts.determinism)
        self.assertEqual(counts.criteria, [])

    def test_partial_override(self):
        counts = SuiteCounts.from_dict({'random_algebras': 3, 'determinism': False, 'criteria': ['findim']})
        self.assertEqual(counts.random_algebras, 3)
        self.assertFalse(counts.determinism)
        self.assertEqual(counts.criteria, ['findim'])
        self.assertEqual(counts.averaging_objects, 50)
        self.assertEqual(SuiteCounts.from_dict(counts.to_dict()), counts)

    def test_rejects_bad_settings(self):
        bad = [
            {'samples': 3},
            {'averaging_objects': -1},
            {'averaging_objects': True},
            {'averaging_objects': '5'},
            {'determinism': 1},
            {'criteria': 'findim'},
            {'criteria': [1]},
        ]
        for data in bad:
            with self.subTest(settings=data):
                with self.assertRaises(ValidationError):
                    SuiteCounts.from_dict(data)


class TestSampleObjects(unittest.TestCase):
    """The building blocks the random samples are drawn from"""

    def test_families_are_valid(self):
        for family in object_families():
            for k, X in enumerate(family.blocks):
                with self.subTest(family=family.name, block=k):
                    self.assertTrue(validate_mf(X).ok, validate_mf(X).violation)
            with self.subTest(family=family.name, block='contractible'):
                self.assertTrue(validate_mf(family.contractible()).ok)

    def test_two_sign_structures(self):
        """Of the four constant signs on (x, x) only the two with M1 = -M0 intertwine"""
        action, structures = sign_structures()
        self.assertEqual(len(structures), 2)
        self.assertEqual(action.group.order, 2)


class TestRunSuite(unittest.TestCase):
    """Small suite runs"""

    def setUp(self):
        self.out_dir = tempfile.mkdtemp()

    def tearDown(self):
        shutil.rmtree(self.out_dir, ignore_errors=True)

    def test_unknown_criterion(self):
        with self.assertRaises(ValidationError):
            run_suite(SuiteCounts(**NOTHING, determinism=False), seed=1, only=['everything'])

    def test_kstab_criterion(self):
        result = check_kstab(SuiteCounts(**NOTHING), 0)
        self.assertTrue(result.passed, result.failures)
        self.assertEqual(result.checked, 4)
        self.assertEqual([r.task for r in result.reports], ['kstab.n2', 'kstab.n3', 'kstab.n4', 'kstab.n5'])

    def test_strictify_criterion_full_count(self):
        """Every default strictification sample, decomposable ones included, is certified"""
        counts = SuiteCounts(**dict(NOTHING, strictify_samples=SuiteCounts().strictify_samples))
        result = check_strictification(counts, 0)
        self.assertTrue(result.passed, result.failures)
        self.assertEqual(result.checked, 21)

    def test_criteria_from_counts(self):
        counts = SuiteCounts(**NOTHING, determinism=False, criteria=['kstab'])
        result = run_suite(counts, seed=3)
        self.assertEqual([c.name for c in result.criteria], ['kstab'])
        self.assertTrue(result.passed)

    def test_sign_count_is_deterministic(self):
        result = run_suite(SuiteCounts(**NOTHING), seed=11, only=['sign_count'])
        self.assertEqual([c.name for c in result.criteria], ['sign_count', 'determinism'])
        self.assertTrue(result.passed, [c.failures for c in result.criteria])
        self.assertEqual(len(result.reports()), 3)
        self.assertEqual(result.criteria[1].checked, 3)

    def test_strict_split_samples(self):
        counts = SuiteCounts(**dict(NOTHING, strict_idempotents=2), determinism=False)
        result = run_suite(counts, seed=5, only=['strict_split'])
        self.assertTrue(result.passed, result.criteria[0].failures)
        self.assertEqual(result.criteria[0].checked, 2)

    def test_write_suite(self):
        result = run_suite(SuiteCounts(**NOTHING, determinism=False), seed=2, only=['kstab'])
        paths = write_suite(result, self.out_dir)
        self.assertEqual(len(paths), 5)
        with open(os.path.join(self.out_dir, 'summary.json'), 'r', encoding='utf-8') as f:
            summary = json.load(f)
        self.assertTrue(summary['passed'])
        self.assertEqual(summary['seed'], 2)
        self.assertEqual(summary['criteria'][0]['reports'], ['kstab.n2', 'kstab.n3', 'kstab.n4', 'kstab.n5'])


if __name__ == '__main__':
    unittest.main()
