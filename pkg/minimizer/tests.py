from functools import lru_cache

import numpy as np
from django.test import SimpleTestCase

from core.exceptions import DomainError, MassBelowThreshold
from core.testing import branch, cubic_mass
from functionals.engine import report, scale_profile
from minimizer.flow import (
    FlowConfig, compare_to_branch, euler_lagrange_residual, gaussian_seed, minimize_energy_at_mass,
    verify_negative_energy_by_scaling,
)
from quadrature.grid import RadialGrid, RadialProfile

FLOW = FlowConfig(grid=RadialGrid(160.0, 4097))


@lru_cache(maxsize=None)
def minimizer(seed_width=3.0):
    return minimize_energy_at_mass(2.0 * cubic_mass(), FLOW, seed_width, townes=cubic_mass())


def gaussian_with_mass(m):
    grid = RadialGrid(12.0, 4001)
    return RadialProfile(grid, gaussian_seed(m, grid, width=1.0))


class FlowConfigTests(SimpleTestCase):

    def test_rejects_bad_settings(self):
        for kwargs in ({'time_step': 0.0}, {'stationarity_tolerance': -1.0}, {'max_steps': 0}):
            with self.subTest(**kwargs):
                with self.assertRaises(DomainError):
                    FlowConfig(**kwargs)

    def test_below_threshold(self):
        with self.assertRaises(MassBelowThreshold):
            minimize_energy_at_mass(cubic_mass(), FLOW, townes=cubic_mass())


class GradientFlowTests(SimpleTestCase):

    def test_minimizer_has_negative_energy_at_fixed_mass(self):
        result = minimizer()
        self.assertLess(result.energy, 0.0)
        self.assertLessEqual(abs(report(result.profile).mass - result.mass), 1e-10 * result.mass)
        self.assertGreater(result.multiplier, 0.0)
        self.assertLess(result.multiplier, 3.0 / 16.0)

    def test_energy_never_increases(self):
        energies = np.array(minimizer().energies)
        allowed = 1e-12 * np.abs(energies[:-1])
        self.assertTrue(np.all(np.diff(energies) <= allowed))

    def test_euler_lagrange_equation(self):
        result = minimizer()
        self.assertLessEqual(euler_lagrange_residual(result), 10.0 * FLOW.stationarity_tolerance)
        self.assertIn('multiplier', result.as_dict(include_profile=False))
        self.assertNotIn('u', result.as_dict(include_profile=False))

    def test_seed_independence(self):
        wide, narrow = minimizer(3.0), minimizer(1.0)
        self.assertLessEqual(np.max(np.abs(wide.profile.values - narrow.profile.values)), 1e-4)
        self.assertAlmostEqual(wide.energy, narrow.energy, delta=1e-8)

    def test_matches_shooting_ground_state(self):
        match = compare_to_branch(minimizer(), branch(10))
        self.assertLessEqual(match.profile_distance, 1e-4)
        self.assertLessEqual(match.multiplier_gap, 1e-5)
        self.assertLessEqual(match.energy_gap, 1e-5)
        self.assertEqual(set(match.as_dict()), {'omega', 'profile_distance', 'multiplier_gap', 'energy_gap'})

    def test_no_trial_beats_the_minimizer(self):
        result = minimizer()
        grid = FLOW.grid
        rng = np.random.default_rng(7)
        for _ in range(20):
            width, power = rng.uniform(1.0, 12.0), rng.uniform(1.0, 3.0)
            shape = np.exp(-(grid.nodes / width) ** power)
            trial = RadialProfile(grid, shape * np.sqrt(result.mass / report(RadialProfile(grid, shape)).mass))
            self.assertLessEqual(result.energy, report(trial).energy)

    def test_minimizer_close_to_threshold(self):
        result = minimize_energy_at_mass(1.2 * cubic_mass(), FLOW, townes=cubic_mass())
        self.assertLess(result.energy, 0.0)
        self.assertLess(result.multiplier, 3.0 / 16.0)
        match = compare_to_branch(result, branch(10))
        self.assertLessEqual(match.profile_distance, 1e-4)
        self.assertLessEqual(match.multiplier_gap, 1e-5)


class ScalingWitnessTests(SimpleTestCase):

    def test_finds_negative_energy_rescaling(self):
        m = 2.0 * 11.7008
        u = gaussian_with_mass(m)
        lam, energy = verify_negative_energy_by_scaling(m, u)
        self.assertLess(energy, 0.0)
        self.assertGreater(lam, 0.0)
        self.assertLessEqual(lam, 1.0)
        scaled = report(scale_profile(u, lam, lam))
        self.assertLessEqual(abs(scaled.mass - m), 1e-12 * m)

    def test_small_mass_has_no_witness(self):
        with self.assertRaises(DomainError):
            verify_negative_energy_by_scaling(1.0, gaussian_with_mass(1.0))

    def test_mass_mismatch(self):
        with self.assertRaises(DomainError):
            verify_negative_energy_by_scaling(5.0, gaussian_with_mass(4.0))
