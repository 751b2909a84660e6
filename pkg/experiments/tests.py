import json
import shutil
import tempfile
from io import StringIO
from pathlib import Path

from django.core.management import call_command
from django.test import SimpleTestCase, TestCase, override_settings
from django.urls import reverse
from rest_framework import status
from rest_framework.test import APIClient

from core.exceptions import DomainError, FrequencyOutOfWindow, StructuralError
from experiments.config import load_config_file, resolve_config
from experiments.models import ExperimentRun
from experiments.output import read_csv
from experiments.verification import HARD, SOFT, Suite, VerificationReport, _Abort


class TempDirMixin:

    def setUp(self):
        super().setUp()
        self.tmp = Path(tempfile.mkdtemp())
        self.addCleanup(shutil.rmtree, self.tmp, ignore_errors=True)

    def write(self, name, text):
        path = self.tmp / name
        path.write_text(text)
        return path


class ConfigTests(TempDirMixin, SimpleTestCase):

    def test_flat_and_json_files_agree(self):
        flat = self.write('run.env', 'solve.omega=0.12\nsolve.n=4097\n')
        sectioned = self.write('run.json', json.dumps({'solve': {'omega': 0.12, 'n': 4097}}))
        self.assertEqual(load_config_file(flat), {'solve': {'omega': '0.12', 'n': '4097'}})
        self.assertEqual(resolve_config('solve', flat), resolve_config('solve', sectioned))

    def test_defaults_and_override_precedence(self):
        flat = self.write('run.env', 'solve.omega=0.12\nsolve.n=4097\n')
        config = resolve_config('solve', flat, {'omega': 0.1, 'r_max': None})
        self.assertEqual(config['omega'], 0.1)
        self.assertEqual(config['n'], 4097)
        self.assertIsNone(config['r_max'])
        self.assertEqual(config['ode_tolerance'], 1e-12)
        self.assertFalse(config['one_d'])

    def test_unknown_keys_and_sections(self):
        with self.assertRaises(DomainError) as caught:
            resolve_config('solve', overrides={'omega': 0.1, 'frequency': 0.1})
        self.assertEqual(caught.exception.context['field'], 'frequency')
        with self.assertRaises(DomainError):
            load_config_file(self.write('bad.env', 'plot.color=red\n'))
        with self.assertRaises(DomainError):
            load_config_file(self.write('flat.env', 'omega=0.1\n'))

    def test_bad_files(self):
        with self.assertRaises(StructuralError):
            load_config_file(self.tmp / 'missing.env')
        with self.assertRaises(StructuralError):
            load_config_file(self.write('broken.json', '{"solve": '))

    def test_frequency_outside_window(self):
        with self.assertRaises(FrequencyOutOfWindow) as caught:
            resolve_config('solve', overrides={'omega': 0.2})
        self.assertEqual(caught.exception.exit_code, 2)
        self.assertEqual(caught.exception.context['section'], 'solve')

    def test_invalid_values_are_domain_errors(self):
        for command, overrides in (
            ('solve', {'omega': 0.1, 'n': 4096}),
            ('scan', {'points': 5}),
            ('scan', {'omega_min': 0.1, 'omega_max': 0.05}),
            ('minimize', {}),
            ('minimize', {'mass': 20.0, 'mass_factor': 2.0}),
            ('simulate', {'grid_points': 100}),
        ):
            with self.subTest(command=command, **overrides):
                with self.assertRaises(DomainError) as caught:
                    resolve_config(command, overrides=overrides)
                self.assertNotIsInstance(caught.exception, FrequencyOutOfWindow)


class SuiteTests(SimpleTestCase):

    def test_soft_failures_continue(self):
        report = VerificationReport(mode='quick')
        suite = Suite(report)
        suite.check('small', 1e-9, 1e-6)
        suite.check('slow', 1.0, 1e-3, SOFT)
        suite.check('positive', 0.5, 0.0, lower_bound=True)
        self.assertEqual(len(report.checks), 3)
        self.assertEqual(report.soft_failures, ['slow'])
        self.assertFalse(report.passed)
        self.assertEqual(report.aborted_at, '')

    def test_hard_failure_stops(self):
        report = VerificationReport(mode='full')
        suite = Suite(report)
        suite.check('fine', 0.0, 1e-6)
        with self.assertRaises(_Abort):
            suite.check('broken', float('nan'), 1e-6, HARD)
        self.assertEqual(report.aborted_at, 'broken')
        self.assertFalse(report.passed)
        self.assertEqual([check.passed for check in report.checks], [True, False])
        self.assertEqual(report.as_dict()['aborted_at'], 'broken')


class CommandTests(TempDirMixin, TestCase):

    def call(self, command, **options):
        stdout, stderr = StringIO(), StringIO()
        with override_settings(LAB_OUTPUT_DIR=self.tmp):
            call_command(command, stdout=stdout, stderr=stderr, **options)
        return stdout.getvalue()

    def test_out_of_window_frequency_exits_with_domain_code(self):
        stderr = StringIO()
        with override_settings(LAB_OUTPUT_DIR=self.tmp):
            with self.assertRaises(SystemExit) as caught:
                call_command('solve', omega=0.2, stdout=StringIO(), stderr=stderr)
        self.assertEqual(caught.exception.code, 2)
        error = json.loads(stderr.getvalue())
        self.assertEqual(error['kind'], 'frequency_out_of_window')
        self.assertEqual(error['exit_code'], 2)
        run = ExperimentRun.objects.get()
        self.assertEqual(run.status, 'failed')
        self.assertEqual(run.error_kind, 'frequency_out_of_window')
        self.assertEqual(run.exit_code, 2)

    def test_solve_writes_record_and_profile(self):
        self.call('solve', omega=0.1)
        document = json.loads((self.tmp / 'solve' / 'record.json').read_text())
        self.assertEqual(document['schema_version'], 1)
        self.assertEqual(document['config']['omega'], 0.1)
        self.assertLessEqual(abs(document['result']['pohozaev_residual']), 1e-6)
        rows = read_csv(self.tmp / 'solve' / 'profile.csv')
        self.assertEqual(len(rows), 8193)
        self.assertEqual(float(rows[0]['r']), 0.0)
        run = ExperimentRun.objects.get()
        self.assertEqual(run.status, 'succeeded')
        self.assertEqual(run.summary['omega'], 0.1)

    def test_reruns_are_byte_identical(self):
        out = self.tmp / 'same'
        self.call('solve', omega=0.1, output_dir=str(out))
        first = (out / 'record.json').read_bytes(), (out / 'profile.csv').read_bytes()
        self.call('solve', omega=0.1, output_dir=str(out))
        second = (out / 'record.json').read_bytes(), (out / 'profile.csv').read_bytes()
        self.assertEqual(first, second)

    def test_one_dimensional_solve_matches_closed_form(self):
        self.call('solve', omega=0.1, one_d=True, n=16385)
        result = json.loads((self.tmp / 'solve' / 'record.json').read_text())['result']
        self.assertEqual(result['dim'], 1)
        self.assertLessEqual(result['closed_form_sup_error'], 1e-8)

    def test_scan_then_invert_from_table(self):
        self.call('scan', points=10, omega_min=0.01, omega_max=0.1, workers=1)
        rows = read_csv(self.tmp / 'scan' / 'branch.csv')
        self.assertEqual(len(rows), 10)
        self.assertEqual(list(rows[0]), ['omega', 'mass', 'energy', 'alpha', 'c_alpha', 'pohozaev_residual'])
        target = 0.5 * (float(rows[4]['mass']) + float(rows[5]['mass']))
        self.call('invert', mass=target, table=str(self.tmp / 'scan' / 'branch.json'))
        result = json.loads((self.tmp / 'invert' / 'inversion.json').read_text())['result']
        self.assertLessEqual(result['round_trip_residual'], 1e-9)
        self.assertGreater(result['omega'], float(rows[4]['omega']))
        self.assertLess(result['omega'], float(rows[5]['omega']))

    def test_invert_below_threshold(self):
        self.call('scan', points=10, omega_min=0.01, omega_max=0.1, workers=1)
        with override_settings(LAB_OUTPUT_DIR=self.tmp):
            with self.assertRaises(SystemExit) as caught:
                call_command('invert', mass=5.0, table=str(self.tmp / 'scan' / 'branch.json'),
                             stdout=StringIO(), stderr=StringIO())
        self.assertEqual(caught.exception.code, 2)
        self.assertEqual(ExperimentRun.objects.get(command='invert').error_kind, 'mass_below_threshold')

    def test_missing_table(self):
        with override_settings(LAB_OUTPUT_DIR=self.tmp):
            with self.assertRaises(SystemExit) as caught:
                call_command('invert', mass=20.0, table=str(self.tmp / 'nope.json'),
                             stdout=StringIO(), stderr=StringIO())
        self.assertEqual(caught.exception.code, 1)

    def test_scattering_simulation_writes_trace(self):
        self.call('simulate', experiment='scattering', T=0.5, dt=0.01, grid_points=64,
                  box_length=64.0, record_every=10)
        rows = read_csv(self.tmp / 'simulate' / 'trace.csv')
        self.assertEqual(len(rows), 6)
        self.assertEqual(rows[0]['orbital_distance'], '')
        self.assertLessEqual(max(float(row['mass_drift']) for row in rows), 1e-10)
        trace = json.loads((self.tmp / 'simulate' / 'trace.json').read_text())['result']
        self.assertAlmostEqual(trace['horizon'], 0.5)
        self.assertFalse(trace['aborted'])

    def test_stability_simulation_sizes_its_box(self):
        self.call('simulate', experiment='stability', omega=0.15, delta=0.0, T=0.2, dt=1e-3,
                  grid_points=256, record_every=100)
        trace = json.loads((self.tmp / 'simulate' / 'trace.json').read_text())['result']
        self.assertFalse(trace['aborted'])
        self.assertEqual(trace['abort_reason'], '')
        self.assertLessEqual(max(trace['orbital_distance']), 1e-5)

    def test_stability_simulation_in_small_box(self):
        stderr = StringIO()
        with override_settings(LAB_OUTPUT_DIR=self.tmp):
            with self.assertRaises(SystemExit) as caught:
                call_command('simulate', experiment='stability', omega=0.15, delta=0.0, T=0.2,
                             grid_points=256, box_length=64.0, stdout=StringIO(), stderr=stderr)
        self.assertEqual(caught.exception.code, 2)
        self.assertEqual(json.loads(stderr.getvalue())['kind'], 'domain_error')

    def test_quick_verification_is_deterministic(self):
        out = self.tmp / 'verify'
        outputs = []
        for _ in range(2):
            with override_settings(LAB_OUTPUT_DIR=self.tmp):
                try:
                    call_command('verify', quick=True, output_dir=str(out),
                                 stdout=StringIO(), stderr=StringIO())
                except SystemExit as exc:
                    self.assertEqual(exc.code, 1)
            outputs.append(((out / 'verification.csv').read_bytes(),
                            (out / 'verification.json').read_bytes()))
        self.assertEqual(outputs[0], outputs[1])
        result = json.loads(outputs[0][1])['result']
        self.assertEqual(result['aborted_at'], '')
        names = {check['name'] for check in result['checks']}
        for name in ('oned_oracle_0.1', 'townes_refinement', 'pohozaev_residual',
                     'minimizer_seed_distance_2', 'stability_distance_growth',
                     'scattering_variance_convexity'):
            self.assertIn(name, names)
        self.assertEqual(ExperimentRun.objects.filter(command='verify').count(), 2)


class ExperimentRunApiTests(TestCase):

    def setUp(self):
        self.client = APIClient()
        ExperimentRun.objects.create(command='solve', status='succeeded', config={'omega': 0.1})
        ExperimentRun.objects.create(command='solve', status='failed', exit_code=2,
                                     error_kind='frequency_out_of_window')
        ExperimentRun.objects.create(command='scan', status='succeeded')

    def test_list_runs(self):
        response = self.client.get(reverse('run-list'))
        self.assertEqual(response.status_code, status.HTTP_200_OK)
        self.assertEqual(response.data['status_code'], 200)
        self.assertEqual(len(response.data['data']), 3)

    def test_filter_runs(self):
        response = self.client.get(reverse('run-list'), {'status': 'failed'})
        self.assertEqual(len(response.data['data']), 1)
        self.assertEqual(response.data['data'][0]['error_kind'], 'frequency_out_of_window')
        response = self.client.get(reverse('run-list'), {'command': 'scan'})
        self.assertEqual(len(response.data['data']), 1)

    def test_retrieve_run(self):
        run = ExperimentRun.objects.get(command='solve', status='succeeded')
        response = self.client.get(reverse('run-detail', args=[run.pk]))
        self.assertEqual(response.status_code, status.HTTP_200_OK)
        self.assertEqual(response.data['data']['config'], {'omega': 0.1})
        self.assertIsNone(response.data['data']['duration'])

    def test_runs_are_read_only(self):
        response = self.client.post(reverse('run-list'), {'command': 'solve'}, format='json')
        self.assertEqual(response.status_code, status.HTTP_405_METHOD_NOT_ALLOWED)
