"""
Tests for the HTTP API
"""
import copy
import json
import os
import time
import unittest

from app import app

PRESETS = os.path.join(os.path.dirname(os.path.abspath(__file__)), 'presets')

RING = {
    'field': {'kind': 'rationals'},
    'variables': ['x'],
    'weights': [1],
    'potential': 'x^2'
}
GROUP = {'cyclic': 2, 'generator': 's', 'action': {'s': {'x': '-x'}}}


def sign_object(m0, m1):
    return {
        'p0': [0], 'p1': [1],
        'A': [['x']], 'B': [['x']],
        'action': {'s': {'p0': [[m0]], 'p1': [[m1]]}}
    }


class TestMFGAPI(unittest.TestCase):
    """Test cases for the API endpoints"""

    def setUp(self):
        """Set up test client"""
        self.app = app.test_client()
        self.app.testing = True

    def post(self, url, body):
        return self.app.post(url, data=json.dumps(body), content_type='application/json')

    def test_api_info(self):
        """The info endpoint lists the routes"""
        response = self.app.get('/api')
        self.assertEqual(response.status_code, 200)
        data = response.get_json()
        self.assertIn('message', data)
        self.assertIn('schema', data)
        self.assertIn('/api/objects/validate', data['endpoints'])

    def test_health_endpoint(self):
        response = self.app.get('/health')
        self.assertEqual(response.status_code, 200)
        self.assertEqual(response.get_json()['status'], 'healthy')

    def test_validate_good_object(self):
        response = self.post('/api/objects/validate',
                             {'ring': RING, 'group': GROUP, 'object': sign_object('1', '-1')})
        self.assertEqual(response.status_code, 200)
        data = response.get_json()
        self.assertTrue(data['ok'])
        self.assertEqual(data['rank'], 1)

    def test_validate_reports_violation(self):
        """An object that does not intertwine is reported, not rejected"""
        response = self.post('/api/objects/validate',
                             {'ring': RING, 'group': GROUP, 'object': sign_object('1', '1')})
        self.assertEqual(response.status_code, 200)
        data = response.get_json()
        self.assertFalse(data['ok'])
        self.assertTrue(data['violation'])

    def test_validate_without_ring(self):
        response = self.post('/api/objects/validate', {'object': sign_object('1', '-1')})
        self.assertEqual(response.status_code, 400)
        self.assertEqual(response.get_json()['error_code'], 'parse_error')

    def test_validate_non_json_body(self):
        response = self.app.post('/api/objects/validate', data='not json', content_type='text/plain')
        self.assertEqual(response.status_code, 400)

    def test_stable_hom(self):
        body = {'ring': RING, 'group': GROUP, 'source': sign_object('1', '-1')}
        response = self.post('/api/objects/stable-hom', {**body, 'target': sign_object('1', '-1')})
        self.assertEqual(response.status_code, 200)
        data = response.get_json()
        self.assertEqual(data['dimension'], 1)
        self.assertEqual(len(data['basis']), 1)

        response = self.post('/api/objects/stable-hom', {**body, 'target': sign_object('-1', '1')})
        self.assertEqual(response.get_json()['dimension'], 0)

    def test_stable_hom_invalid_source(self):
        """An invalid input object is a validation error"""
        response = self.post('/api/objects/stable-hom', {
            'ring': RING, 'group': GROUP,
            'source': sign_object('1', '1'), 'target': sign_object('1', '-1')
        })
        self.assertEqual(response.status_code, 422)
        self.assertEqual(response.get_json()['error_code'], 'validation_error')

    def test_stable_hom_bad_parity(self):
        response = self.post('/api/objects/stable-hom', {
            'ring': RING, 'group': GROUP, 'parity': 2,
            'source': sign_object('1', '-1'), 'target': sign_object('1', '-1')
        })
        self.assertEqual(response.status_code, 400)

    def test_is_isolated(self):
        response = self.post('/api/objects/is-isolated', {'ring': dict(RING, potential='x^3')})
        self.assertEqual(response.status_code, 200)
        data = response.get_json()
        self.assertTrue(data['isolated'])
        self.assertEqual(data['tjurina_dimension'], 2)

    def test_task_job_and_verify(self):
        """A background task completes and its report verifies over HTTP"""
        with open(os.path.join(PRESETS, 'a1_sign_action.json'), 'r', encoding='utf-8') as f:
            problem = json.load(f)
        response = self.post('/api/tasks/run', {'problem': problem, 'task': 'hom_plus_plus'})
        self.assertEqual(response.status_code, 202)
        started = response.get_json()
        self.assertEqual(started['op'], 'stable-hom')

        job = None
        deadline = time.time() + 60
        while time.time() < deadline:
            job = self.app.get(f"/api/tasks/{started['job_id']}").get_json()
            if job['status'] in ('completed', 'failed', 'cancelled'):
                break
            time.sleep(0.1)
        self.assertEqual(job['status'], 'completed', job)
        report = job['result']['report']
        self.assertEqual(report['summary']['dimension'], 1)

        response = self.post('/api/reports/verify', report)
        self.assertEqual(response.status_code, 200)
        self.assertTrue(response.get_json()['ok'])

        tampered = copy.deepcopy(report)
        name = sorted(tampered['objects'])[0]
        tampered['objects'][name]['B'] = [['2*x']]
        self.assertFalse(self.post('/api/reports/verify', tampered).get_json()['ok'])

        response = self.app.delete(f"/api/tasks/{started['job_id']}")
        self.assertEqual(response.status_code, 200)

    def test_task_with_invalid_problem(self):
        with open(os.path.join(PRESETS, 'a1_sign_action.json'), 'r', encoding='utf-8') as f:
            problem = json.load(f)
        problem['objects']['plus']['action']['s']['p1'] = [['1']]
        response = self.post('/api/tasks/run', {'problem': problem, 'task': 'hom_plus_plus'})
        self.assertEqual(response.status_code, 422)

    def test_unknown_job(self):
        response = self.app.get('/api/tasks/no-such-job')
        self.assertEqual(response.status_code, 404)


if __name__ == '__main__':
    unittest.main()
