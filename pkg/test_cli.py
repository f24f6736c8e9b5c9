"""
Tests for the batch front end and its exit codes
"""
import json
import os
import shutil
import tempfile
import unittest

from click.testing import CliRunner

from cli import EXIT_COMPUTATION, EXIT_OK, EXIT_PARSE, EXIT_VALIDATION, cli

PRESETS = os.path.join(os.path.dirname(os.path.abspath(__file__)), 'presets')
SIGN_PRESET = os.path.join(PRESETS, 'a1_sign_action.json')


class TestCli(unittest.TestCase):
    """Commands, report files and exit codes"""

    def setUp(self):
        self.runner = CliRunner()
        self.out_dir = tempfile.mkdtemp()

    def tearDown(self):
        shutil.rmtree(self.out_dir, ignore_errors=True)

    def write_config(self, name, text):
        path = os.path.join(self.out_dir, name)
        with open(path, 'w', encoding='utf-8') as f:
            f.write(text)
        return path

    def test_validate_writes_report(self):
        """validate on a good config exits 0 and writes one report"""
        result = self.runner.invoke(cli, ['validate', SIGN_PRESET, '--out', self.out_dir])
        self.assertEqual(result.exit_code, EXIT_OK, result.output)
        path = os.path.join(self.out_dir, 'validate.json')
        self.assertTrue(os.path.exists(path))
        with open(path, 'r', encoding='utf-8') as f:
            report = json.load(f)
        self.assertEqual(report['task'], 'validate')

    def test_run_single_task(self):
        result = self.runner.invoke(cli, ['run', SIGN_PRESET, 'hom_plus_minus', '--out', self.out_dir])
        self.assertEqual(result.exit_code, EXIT_OK, result.output)
        self.assertTrue(os.path.exists(os.path.join(self.out_dir, 'hom_plus_minus.json')))

    def test_missing_config_is_parse_error(self):
        result = self.runner.invoke(cli, ['validate', os.path.join(self.out_dir, 'absent.json')])
        self.assertEqual(result.exit_code, EXIT_PARSE)

    def test_malformed_config_is_parse_error(self):
        path = self.write_config('broken.json', '{"schema": ')
        result = self.runner.invoke(cli, ['validate', path, '--out', self.out_dir])
        self.assertEqual(result.exit_code, EXIT_PARSE)
        self.assertEqual(os.listdir(self.out_dir), ['broken.json'])

    def test_wrong_schema_is_validation_error(self):
        with open(SIGN_PRESET, 'r', encoding='utf-8') as f:
            data = json.load(f)
        data['schema'] = 'mfg/0'
        path = self.write_config('old.json', json.dumps(data))
        result = self.runner.invoke(cli, ['validate', path, '--out', self.out_dir])
        self.assertEqual(result.exit_code, EXIT_VALIDATION)

    def test_unknown_task_is_validation_error(self):
        result = self.runner.invoke(cli, ['run', SIGN_PRESET, 'no_such_task', '--out', self.out_dir])
        self.assertEqual(result.exit_code, EXIT_VALIDATION)

    def test_verify_intact_and_corrupted(self):
        """verify exits 0 on the written report and 1 once an object is tampered with"""
        self.runner.invoke(cli, ['validate', SIGN_PRESET, '--out', self.out_dir])
        path = os.path.join(self.out_dir, 'validate.json')
        result = self.runner.invoke(cli, ['verify', path])
        self.assertEqual(result.exit_code, EXIT_OK, result.output)

        with open(path, 'r', encoding='utf-8') as f:
            report = json.load(f)
        report['objects']['plus']['B'] = [['2*x']]
        tampered = self.write_config('tampered.json', json.dumps(report))
        result = self.runner.invoke(cli, ['verify', tampered])
        self.assertEqual(result.exit_code, EXIT_COMPUTATION)

    def test_verify_missing_report(self):
        result = self.runner.invoke(cli, ['verify', os.path.join(self.out_dir, 'absent.json')])
        self.assertEqual(result.exit_code, EXIT_PARSE)

    def test_suite_single_criterion(self):
        result = self.runner.invoke(cli, ['suite', '--only', 'kstab', '--seed', '4', '--out', self.out_dir])
        self.assertEqual(result.exit_code, EXIT_OK, result.output)
        written = sorted(os.listdir(os.path.join(self.out_dir, 'suite')))
        self.assertIn('summary.json', written)
        self.assertIn('kstab.n3.json', written)

    def test_suite_unknown_criterion(self):
        result = self.runner.invoke(cli, ['suite', '--only', 'everything', '--out', self.out_dir])
        self.assertEqual(result.exit_code, EXIT_VALIDATION)


if __name__ == '__main__':
    unittest.main()
