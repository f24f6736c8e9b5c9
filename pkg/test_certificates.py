"""
Tests for the JSON codec, report building and independent re-verification
"""
import copy
import json
import unittest

from services.certificates import ReportBuilder, verify_report
from services.errors import ParseError, ValidationError
from services.exact_algebra import Field, GradedRing
from services.group_twist import GroupData, RingAction
from services.mf_core import EquivariantMF, contraction, identity
from services.report_store import render_report
from services.serialization import action_from_dict, mf_from_dict, mf_to_dict


def cubic_objects():
    R = GradedRing.create(Field.rationals(), ['x'], [1], 'x^3')
    X = EquivariantMF.build(R, [0], [1], [['x']], [['x^2']])
    C = EquivariantMF.build(R, [0], [0], [['1']], [['x^3']])
    return X, C


def sample_report():
    X, C = cubic_objects()
    builder = ReportBuilder('validate', 'sample', 0)
    builder.claim_valid(X, 'X')
    builder.claim_valid(C, 'C')
    builder.claim_morphism('idX', identity(X))
    builder.claim_equal(['idX', 'idX'], ['id:X'])
    builder.claim_homotopic(['id:C'], [], 'h', contraction(C), note='contractible')
    return builder.build({'objects': 2})


class TestSerialization(unittest.TestCase):
    """Objects and contexts as JSON"""

    def setUp(self):
        R = GradedRing.create(Field.rationals(), ['x'], [1], 'x^2')
        self.action = RingAction.from_mapping(R, GroupData.cyclic(2, 's'), {'s': {'x': '-x'}})

    def test_object_with_action(self):
        data = {'p0': [0], 'p1': [1], 'A': [['x']], 'B': [['x']],
                'action': {'s': {'p0': [['1']], 'p1': [['-1']]}}}
        X = mf_from_dict(data, self.action, 'plus')
        self.assertEqual(mf_to_dict(X), data)

    def test_missing_matrix(self):
        with self.assertRaises(ParseError):
            mf_from_dict({'p0': [0], 'p1': [1], 'A': [['x']]}, self.action, 'broken')

    def test_unknown_group_element(self):
        data = {'p0': [0], 'p1': [1], 'A': [['x']], 'B': [['x']],
                'action': {'t': {'p0': [['1']], 'p1': [['-1']]}}}
        with self.assertRaises(ValidationError):
            mf_from_dict(data, self.action, 'broken')

    def test_context_block(self):
        data = {'ring': self.action.ring.to_dict(), 'group': {'cyclic': 2, 'generator': 's'},
                'action': {'s': {'x': '-x'}}}
        self.assertEqual(action_from_dict(data), self.action)


class TestVerification(unittest.TestCase):
    """verify_report on intact and corrupted reports"""

    def setUp(self):
        self.data = json.loads(render_report(sample_report()))

    def test_intact_report_verifies(self):
        result = verify_report(self.data)
        self.assertTrue(result.ok)
        self.assertEqual(result.checked, 5)

    def test_rendering_is_canonical(self):
        self.assertEqual(render_report(sample_report()), render_report(sample_report()))
        self.assertTrue(render_report(sample_report()).endswith('\n'))

    def test_corrupted_object_detected(self):
        data = copy.deepcopy(self.data)
        data['objects']['X']['B'] = [['x']]
        result = verify_report(data)
        self.assertFalse(result.ok)
        self.assertEqual([f.index for f in result.failures], [0])
        self.assertEqual(result.failures[0].kind, 'valid-mf')

    def test_corrupted_homotopy_detected(self):
        data = copy.deepcopy(self.data)
        data['homotopies']['h']['H0'] = [['2']]
        result = verify_report(data)
        self.assertEqual([f.index for f in result.failures], [4])
        self.assertIn('boundary', result.failures[0].message)

    def test_unknown_map_reported(self):
        data = copy.deepcopy(self.data)
        data['claims'][3]['lhs'] = ['missing']
        result = verify_report(data)
        self.assertEqual([f.index for f in result.failures], [3])

    def test_unknown_claim_kind(self):
        data = copy.deepcopy(self.data)
        data['claims'][0]['kind'] = 'believe-me'
        with self.assertRaises(ValidationError):
            verify_report(data)


if __name__ == '__main__':
    unittest.main()
