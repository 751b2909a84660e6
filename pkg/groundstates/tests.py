from types import SimpleNamespace

import numpy as np
from django.test import SimpleTestCase

from core.exceptions import FrequencyOutOfWindow, NumericError, StructuralError
from core.testing import cubic_ground_state, cubic_mass, ground_state
from functionals.engine import gn_check
from groundstates.physics import (
    OMEGA_MAX, Nonlinearity, check_window, closed_form_1d, energy_threshold, force_roots,
    shooting_bracket,
)
from groundstates.shooting import OVERSHOOT, UNDERSHOOT
from groundstates.solver import (
    ShootingConfig, classify_amplitude, is_positive_decreasing, solve_scalar_field, townes_mass,
)
from groundstates.tail import fit_decay, fit_tail_amplitude, tail_extend
from quadrature.grid import RadialGrid, RadialProfile, decay_kernel, integrate_radial


class WindowTests(SimpleTestCase):

    def test_frequencies_outside_window_rejected(self):
        for omega in (0.0, -0.1, OMEGA_MAX, 0.2):
            with self.assertRaises(FrequencyOutOfWindow):
                check_window(omega)

    def test_out_of_window_solve_is_domain_error(self):
        with self.assertRaises(FrequencyOutOfWindow) as ctx:
            solve_scalar_field(0.2)
        self.assertEqual(ctx.exception.kind, 'frequency_out_of_window')
        self.assertEqual(ctx.exception.exit_code, 2)

    def test_config_validation(self):
        with self.assertRaises(StructuralError):
            ShootingConfig(n=8192)
        with self.assertRaises(StructuralError):
            ShootingConfig(max_bisections=10)
        with self.assertRaises(StructuralError):
            ShootingConfig(ode_tolerance=0.0)


class PhysicsTests(SimpleTestCase):

    def test_force_roots_are_zeros_of_force(self):
        nl = Nonlinearity(0.1)
        for root in force_roots(0.1):
            self.assertAlmostEqual(nl.force(root), 0.0, places=14)

    def test_energy_threshold_zeroes_primitive(self):
        nl = Nonlinearity(0.12)
        self.assertAlmostEqual(nl.primitive(energy_threshold(0.12)), 0.0, places=14)

    def test_bracket_is_ordered(self):
        for omega in (0.01, 0.1, 0.18):
            low, high = shooting_bracket(Nonlinearity(omega))
            self.assertLess(low, high)

    def test_closed_form_solves_line_equation(self):
        omega = 0.1
        x = np.linspace(-20.0, 20.0, 40001)
        h = x[1] - x[0]
        phi = closed_form_1d(omega, x)
        d2 = (phi[2:] - 2.0 * phi[1:-1] + phi[:-2]) / h ** 2
        residual = -d2 + Nonlinearity(omega).force(phi[1:-1])
        self.assertLess(np.max(np.abs(residual)), 1e-6)
        self.assertIsInstance(closed_form_1d(omega, 0.0), float)


class GroundStateTests(SimpleTestCase):

    @classmethod
    def setUpClass(cls):
        super().setUpClass()
        cls.record = ground_state(0.1)

    def test_profile_is_positive_and_decreasing(self):
        values = self.record.profile.values
        resolved = values[values > 1e-10 * values[0]]
        self.assertTrue(np.all(np.diff(resolved) <= 0.0))
        self.assertGreater(resolved.size, values.size // 4)
        self.assertGreater(values.min(), -1e-14)

    def test_pohozaev_identity(self):
        self.assertLessEqual(abs(self.record.norms.pohozaev_residual), 1e-6)

    def test_center_value_inside_bracket(self):
        low, high = shooting_bracket(Nonlinearity(0.1))
        self.assertTrue(low < self.record.center_value < high)
        self.assertLess(self.record.bracket_width, 1e-10)
        self.assertEqual(self.record.diagnostics['method'], 'shooting')

    def test_bracket_ends_classify(self):
        lower, upper = self.record.diagnostics['bracket']
        self.assertEqual(classify_amplitude(lower, 0.1), UNDERSHOOT)
        self.assertEqual(classify_amplitude(upper, 0.1), OVERSHOOT)

    def test_amplitudes_split_at_center_value(self):
        low, high = shooting_bracket(Nonlinearity(0.1))
        center = self.record.center_value
        for fraction in (0.1, 0.3, 0.5, 0.7, 0.9):
            with self.subTest(fraction=fraction):
                self.assertEqual(classify_amplitude(low + fraction * (center - low), 0.1), UNDERSHOOT)
                self.assertEqual(classify_amplitude(center + fraction * (high - center), 0.1), OVERSHOOT)

    def test_narrower_bracket_finds_same_solution(self):
        low, high = shooting_bracket(Nonlinearity(0.1))
        center = self.record.center_value
        narrow = solve_scalar_field(0.1, ShootingConfig(), bracket=(0.5 * (low + center), 0.5 * (center + high)))
        self.assertAlmostEqual(narrow.center_value, center, delta=1e-10)
        self.assertLessEqual(np.max(np.abs(narrow.profile.values - self.record.profile.values)), 1e-10)

    def test_grid_refinement_converges(self):
        fine = self.record.mass
        errors = [abs(solve_scalar_field(0.1, ShootingConfig(n=n)).mass - fine) for n in (2049, 4097)]
        self.assertLess(errors[1], errors[0])
        self.assertLessEqual(errors[1], 1e-6 * fine)

    def test_tail_extension_of_solved_profile(self):
        extended = tail_extend(self.record)
        mass = integrate_radial(extended.values ** 2, extended.grid)
        self.assertLessEqual(abs(mass - self.record.mass), 1e-8 * self.record.mass)
        twice = tail_extend(SimpleNamespace(profile=extended, omega=0.1))
        self.assertLessEqual(np.max(np.abs(twice.values - extended.values)), 1e-12)

    def test_plateau_noise_is_not_a_rise(self):
        values = np.linspace(1.0, 0.5, 50)
        values[10] = values[9] + 2.0 * np.finfo(float).eps
        self.assertTrue(is_positive_decreasing(values))
        values[10] = values[9] + 1e-9
        self.assertFalse(is_positive_decreasing(values))
        self.assertFalse(is_positive_decreasing(np.array([1.0, 0.5, 0.0])))

    def test_decay_fit(self):
        kappa, prefactor = fit_decay(self.record.profile, 0.1)
        self.assertAlmostEqual(kappa, np.sqrt(0.1), delta=1e-3 * np.sqrt(0.1))
        self.assertAlmostEqual(prefactor, 0.5, delta=0.15)

    def test_tail_extension_keeps_exact_far_field(self):
        omega = 0.1
        grid = RadialGrid(60.0, 2001)
        kappa = np.sqrt(omega)
        far = RadialProfile(grid, 3.0 * decay_kernel(kappa * np.maximum(grid.nodes, grid.spacing)))
        record = SimpleNamespace(profile=far, omega=omega)
        amplitude, residual = fit_tail_amplitude(far, omega)
        self.assertAlmostEqual(amplitude, 3.0, places=10)
        self.assertLess(residual, 1e-12)
        extended = tail_extend(record)
        self.assertTrue(np.allclose(extended.values, far.values, rtol=1e-10, atol=0.0))
        self.assertAlmostEqual(extended.tail_rate, kappa)

    def test_tail_extension_rejects_bad_fit(self):
        grid = RadialGrid(60.0, 2001)
        record = SimpleNamespace(profile=RadialProfile(grid, np.exp(-grid.nodes / 50.0)), omega=0.1)
        with self.assertRaises(NumericError):
            tail_extend(record)


class OneDimensionalOracleTests(SimpleTestCase):

    def test_matches_closed_form(self):
        for omega in (0.05, 0.10, 0.15):
            with self.subTest(omega=omega):
                profile = ground_state(omega, dim=1, n=16385).profile
                exact = closed_form_1d(omega, profile.nodes)
                self.assertLessEqual(np.max(np.abs(profile.values - exact)), 1e-8)


class FlatTopTests(SimpleTestCase):

    def test_continuation_near_window_edge(self):
        record = ground_state(0.18)
        self.assertEqual(record.diagnostics['method'], 'continuation')
        self.assertGreater(record.diagnostics['continuation_steps'], 0)
        self.assertTrue(np.all(record.profile.values > 0.0))
        self.assertGreater(record.mass, ground_state(0.1).mass)

    def test_mass_blows_up_near_window_edge(self):
        record = ground_state(0.186)
        self.assertEqual(record.diagnostics['method'], 'continuation')
        self.assertGreater(record.mass, 5.0 * cubic_mass())


class TownesMassTests(SimpleTestCase):

    def test_value_and_refinement(self):
        mass = cubic_mass()
        self.assertAlmostEqual(mass, 11.7008, delta=1e-3)
        self.assertAlmostEqual(townes_mass(ShootingConfig().refined()), mass, delta=1e-3)

    def test_cubic_ground_state_identities(self):
        rec = cubic_ground_state()
        self.assertEqual(rec.kind, 'cubic')
        self.assertAlmostEqual(rec.profile.values[0], 2.2062, delta=1e-4)
        self.assertLessEqual(abs(rec.norms.l4_pow4 - 2.0 * rec.mass) / rec.mass, 1e-8)
        # q is the Gagliardo-Nirenberg optimizer
        self.assertLessEqual(abs(gn_check(rec.norms, rec.mass)) / rec.norms.l4_pow4, 1e-8)
