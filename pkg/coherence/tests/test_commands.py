import json
import tempfile
from io import StringIO
from pathlib import Path

import numpy as np
from django.core.management import call_command
from django.core.management.base import CommandError
from django.test import SimpleTestCase

from coherence.linalg import random_density
from coherence.serialization import load_witness, matrix_to_dict
from coherence.tomography import PAULI

PLUS = np.full((2, 2), 0.5)
W1 = np.array([[1, 1, 2], [1, 1, 0], [2, 0, 2]]) / 4


class CommandTestCase(SimpleTestCase):
    def setUp(self):
        tmp = tempfile.TemporaryDirectory()
        self.addCleanup(tmp.cleanup)
        self.tmp = Path(tmp.name)

    def write(self, name, obj):
        path = self.tmp / name
        path.write_text(obj if isinstance(obj, str) else json.dumps(obj), encoding='utf-8')
        return str(path)

    def matrix_file(self, name, a, **header):
        return self.write(name, matrix_to_dict(a, **header))

    def call(self, *args, **options):
        out = StringIO()
        call_command(*args, stdout=out, **options)
        return out.getvalue()

    def call_json(self, *args, **options):
        return json.loads(self.call(*args, **options))

    def assertExitCode(self, code, *args, **options):
        with self.assertRaises(CommandError) as ctx:
            self.call(*args, **options)
        self.assertEqual(ctx.exception.returncode, code)
        return ctx.exception


class MeasureCommandTests(CommandTestCase):
    def test_plus_state(self):
        report = self.call_json('measure', self.matrix_file('plus.json', PLUS))
        self.assertEqual(report['dim'], 2)
        self.assertTrue(report['coherent'])
        self.assertAlmostEqual(report['c_h'], 1.0)
        self.assertAlmostEqual(report['c_l1'], 1.0)
        self.assertAlmostEqual(report['roc'], 1.0, delta=1e-6)
        self.assertLessEqual(report['split_residual'], 1e-6)
        self.assertAlmostEqual(sum(report['robustness']['d']), 2.0, delta=1e-6)
        self.assertEqual(report['robustness']['dual_witness']['kind'], 'witness')
        self.assertEqual(report['robustness']['tau']['dim'], 2)

    def test_incoherent_state(self):
        report = self.call_json('measure', self.matrix_file('diag.json', np.diag([0.7, 0.3])))
        self.assertFalse(report['coherent'])
        self.assertEqual(report['c_h'], 0.0)
        self.assertEqual(report['roc'], 0.0)
        self.assertNotIn('split_residual', report)

    def test_malformed_file(self):
        self.assertExitCode(2, 'measure', self.write('bad.json', '{"dim": 2, "re": [1, 0'))
        self.assertExitCode(2, 'measure', str(self.tmp / 'missing.json'))

    def test_invalid_state(self):
        self.assertExitCode(4, 'measure', self.matrix_file('trace2.json', np.eye(2)))

    def test_cut_budget_exhausted(self):
        path = self.matrix_file('rho4.json', random_density(4, 'mixed', seed=1).matrix)
        out = StringIO()
        with self.assertRaises(CommandError) as ctx:
            call_command('measure', path, max_cuts=4, stdout=out)
        self.assertEqual(ctx.exception.returncode, 3)
        partial = json.loads(out.getvalue())
        self.assertLessEqual(partial['roc_lower'], partial['roc_upper'])


class WitnessCommandTests(CommandTestCase):
    def test_check_suboptimal_witness(self):
        report = self.call_json('witness', 'check', self.matrix_file('w1.json', W1, kind='witness'))
        self.assertTrue(report['witness'])
        self.assertFalse(report['optimal'])
        self.assertEqual(report['reason'], 'ok')

    def test_check_optimal_witness(self):
        report = self.call_json('witness', 'check', self.matrix_file('x.json', PAULI['x']))
        self.assertTrue(report['witness'])
        self.assertTrue(report['optimal'])

    def test_check_positive_operator(self):
        report = self.call_json('witness', 'check', self.matrix_file('id.json', np.eye(2) / 2))
        self.assertFalse(report['witness'])
        self.assertFalse(report['detects'])

    def test_finer_is_reflexive(self):
        path = self.matrix_file('w1.json', W1, kind='witness')
        report = self.call_json('witness', 'finer', path, path)
        self.assertTrue(report['finer'])
        self.assertEqual(report['epsilon'], 0.0)

    def test_make_writes_a_loadable_witness(self):
        target = self.tmp / 'made.json'
        self.call('witness', 'make', self.matrix_file('plus.json', PLUS), out=str(target))
        w = load_witness(target)
        self.assertTrue(w.optimal)
        np.testing.assert_allclose(w.matrix, -PAULI['x'] / 2, atol=1e-12)

    def test_make_on_incoherent_state(self):
        self.assertExitCode(4, 'witness', 'make', self.matrix_file('diag.json', np.diag([0.5, 0.5])))

    def test_wrong_number_of_files(self):
        path = self.matrix_file('w1.json', W1)
        self.assertExitCode(5, 'witness', 'finer', path)
        self.assertExitCode(5, 'witness', 'evaluate', path)


class TomoCommandTests(CommandTestCase):
    def test_stokes_expectation(self):
        report = self.call_json('tomo', self.matrix_file('plus.json', PLUS), mode='stokes', expectation=True)
        self.assertLess(report['trace_distance'], 1e-10)
        self.assertTrue(report['coherent'])
        self.assertEqual(report['witness_label'], [0, 1, 'R'])

    def test_stokes_needs_a_qubit(self):
        self.assertExitCode(5, 'tomo', self.matrix_file('mixed3.json', np.eye(3) / 3), mode='stokes')

    def test_qudit_csv(self):
        text = self.call('tomo', self.matrix_file('plus.json', PLUS), expectation=True, format='csv')
        lines = text.splitlines()
        self.assertEqual(lines[0], 'index,label,estimate,stderr')
        self.assertEqual(len(lines), 1 + 3)
        index, label, estimate, _ = lines[1].split(',')
        self.assertEqual((index, label), ('0', '0:1:R'))
        self.assertAlmostEqual(float(estimate), 0.5)

    def test_same_seed_same_report(self):
        path = self.matrix_file('plus.json', PLUS)
        self.assertEqual(self.call('tomo', path, seed=11, shots=500), self.call('tomo', path, seed=11, shots=500))


class DetectCommandTests(CommandTestCase):
    def test_dephased_state(self):
        path = self.matrix_file('diag.json', np.diag([0.5, 0.3, 0.2]))
        report = self.call_json('detect', path, expectation=True)
        self.assertEqual(report['verdict'], 'incoherent')
        self.assertEqual(report['measurements_used'], 6)

    def test_fixed_policy_on_plus(self):
        report = self.call_json('detect', self.matrix_file('plus.json', PLUS), policy='fixed')
        self.assertEqual(report['verdict'], 'coherent')
        self.assertEqual(report['measurements_used'], 1)

    def test_state_required(self):
        self.assertExitCode(5, 'detect')

    def test_dicke_report(self):
        report = self.call_json('detect', dicke=True, trials=2000, detect_trials=50)
        self.assertEqual(report['i'], 28)
        self.assertAlmostEqual(report['formula'], 57 / 29)
        self.assertFalse(report['matches_published'])


class ExpectedCommandTests(CommandTestCase):
    def test_single_value(self):
        report = self.call_json('expected', '56', '28', trials=1000)
        self.assertAlmostEqual(report['E_formula'], 57 / 29)
        self.assertEqual(report['E_closed'], report['E_formula'])

    def test_table_as_csv(self):
        lines = self.call('expected', '3', trials=100, format='csv').splitlines()
        self.assertEqual(lines[0], 'N,i,E_formula,E_closed,E_mc,mc_stderr')
        self.assertEqual(len(lines), 1 + 9)
        self.assertEqual(lines[1].split(',')[:3], ['1', '0', '1.0'])

    def test_out_of_range(self):
        self.assertExitCode(5, 'expected', '3', '4')


class VerifyCommandTests(CommandTestCase):
    def test_norm_suite(self):
        report = self.call_json('verify', 'norm', trials=50)
        self.assertTrue(report['passed'])
        self.assertEqual([s['name'] for s in report['suites']], ['norm'])
        self.assertTrue(report['suites'][0]['findings'])

    def test_csv(self):
        lines = self.call('verify', 'theorem2', trials=20, format='csv').splitlines()
        self.assertEqual(lines[0], 'suite,check,passed,trials,failures,worst')
        self.assertEqual(len(lines), 1 + 3)

    def test_same_seed_same_output(self):
        self.assertEqual(self.call('verify', 'chain', trials=30, seed=4),
                         self.call('verify', 'chain', trials=30, seed=4))

    def test_unknown_suite(self):
        self.assertExitCode(5, 'verify', 'theorem9')


class OptionValidationTests(CommandTestCase):
    def test_invalid_alpha(self):
        error = self.assertExitCode(5, 'measure', self.matrix_file('plus.json', PLUS), alpha=2.0)
        self.assertIn('alpha', str(error))

    def test_unwritable_output(self):
        self.assertExitCode(5, 'measure', self.matrix_file('plus.json', PLUS),
                            out=str(self.tmp / 'no' / 'such' / 'dir.json'))
