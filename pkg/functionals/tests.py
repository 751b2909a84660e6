import numpy as np
from django.test import SimpleTestCase

from core.exceptions import DomainError
from core.testing import cubic_mass, ground_state
from functionals.engine import (
    alpha_of, alpha_relations_check, c_alpha, energy_lower_bound_slack, f_alpha, gn_check,
    interpolation_slack, pohozaev_residual, report, scale_profile,
)
from propagation.field import CartesianField
from quadrature.grid import RadialGrid, RadialProfile


def gaussian():
    grid = RadialGrid(10.0, 4001)
    return RadialProfile(grid, np.exp(-grid.nodes ** 2))


class RadialReportTests(SimpleTestCase):

    def test_gaussian_functionals(self):
        rep = report(gaussian())
        expected = {
            'mass': np.pi / 2,
            'grad_norm_sq': np.pi,
            'l4_pow4': np.pi / 4,
            'l6_pow6': np.pi / 6,
            'energy': np.pi / 2 - np.pi / 16 + np.pi / 36,
        }
        for name, value in expected.items():
            with self.subTest(functional=name):
                self.assertLess(abs(getattr(rep, name) - value) / value, 1e-9)
        self.assertEqual(rep.momentum, (0.0, 0.0))
        self.assertAlmostEqual(rep.beta, 1.0 / 6.0, places=9)
        self.assertAlmostEqual(alpha_of(rep), 1.0 / 9.0, places=9)

    def test_homogeneity(self):
        u = gaussian()
        base = report(u)
        for c in (0.3, 2.0):
            with self.subTest(c=c):
                scaled = report(u.with_values(c * u.values))
                self.assertLess(abs(scaled.mass - c ** 2 * base.mass) / scaled.mass, 1e-13)
                self.assertLess(abs(scaled.l4_pow4 - c ** 4 * base.l4_pow4) / scaled.l4_pow4, 1e-13)
                self.assertLess(abs(scaled.l6_pow6 - c ** 6 * base.l6_pow6) / scaled.l6_pow6, 1e-13)

    def test_report_serializes(self):
        data = report(gaussian()).as_dict()
        self.assertEqual(data['momentum'], [0.0, 0.0])
        self.assertIn('pohozaev_residual', data)

    def test_pohozaev_needs_gradient(self):
        grid = RadialGrid(10.0, 101)
        with self.assertRaises(DomainError):
            pohozaev_residual(RadialProfile(grid, np.zeros(grid.n)))


class CartesianReportTests(SimpleTestCase):

    def test_matches_radial_gaussian(self):
        n, length = 128, 32.0
        axis = (np.arange(n) - n // 2) * (length / n)
        X, Y = np.meshgrid(axis, axis, indexing='ij')
        k = 2.0 * np.pi * 3 / length
        values = np.exp(-(X ** 2 + Y ** 2)) * np.exp(1j * k * X)
        rep = report(CartesianField(n, length, values))
        self.assertLess(abs(rep.mass - np.pi / 2) / (np.pi / 2), 1e-10)
        self.assertLess(abs(rep.l4_pow4 - np.pi / 4) / (np.pi / 4), 1e-10)
        self.assertLess(abs(rep.grad_norm_sq - (np.pi + k ** 2 * np.pi / 2)) / np.pi, 1e-9)
        self.assertLess(abs(rep.momentum[0] - 2.0 * k * rep.mass), 1e-9)
        self.assertLess(abs(rep.momentum[1]), 1e-9)


class InterpolationFunctionalTests(SimpleTestCase):

    def test_scale_invariance(self):
        u = gaussian()
        for alpha in (0.1, 1.0, 4.0):
            base = f_alpha(u, alpha)
            for lam, mu in ((0.5, 3.0), (2.0, 0.25)):
                with self.subTest(alpha=alpha, lam=lam, mu=mu):
                    scaled = f_alpha(scale_profile(u, lam, mu), alpha)
                    self.assertLess(abs(scaled - base) / base, 1e-12)

    def test_rejects_bad_arguments(self):
        with self.assertRaises(DomainError):
            f_alpha(gaussian(), 0.0)
        grid = RadialGrid(10.0, 101)
        with self.assertRaises(DomainError):
            f_alpha(RadialProfile(grid, np.zeros(grid.n)), 1.0)

    def test_ground_state_attains_infimum(self):
        rec = ground_state(0.1)
        self.assertLess(abs(f_alpha(rec.norms, rec.alpha) - c_alpha(rec.norms, rec.alpha))
                        / c_alpha(rec.norms, rec.alpha), 1e-8)
        self.assertGreater(f_alpha(gaussian(), rec.alpha), c_alpha(rec.norms, rec.alpha))


class InequalityTests(SimpleTestCase):

    def test_gagliardo_nirenberg_slack(self):
        self.assertGreaterEqual(gn_check(gaussian(), 11.7008), 0.0)
        self.assertGreaterEqual(gn_check(ground_state(0.1).norms, cubic_mass()), 0.0)

    def test_alpha_relations(self):
        l4_residual, omega_residual = alpha_relations_check(ground_state(0.1))
        self.assertLessEqual(l4_residual, 1e-6)
        self.assertLessEqual(omega_residual, 1e-6)

    def test_young_slacks(self):
        for u in (gaussian(), ground_state(0.1).profile):
            for eps in (0.1, 0.5, 2.0 / 3.0):
                with self.subTest(eps=eps):
                    self.assertGreaterEqual(interpolation_slack(u, eps), 0.0)
                    self.assertGreaterEqual(energy_lower_bound_slack(u, eps), 0.0)
