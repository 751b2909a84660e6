import numpy as np
from django.test import SimpleTestCase
from scipy import special

from core.exceptions import NumericError, StructuralError
from quadrature.grid import (
    RadialGrid, RadialProfile, decay_kernel, differentiate, first_derivative, half_max_radius,
    integrate_profile, integrate_radial, radial_laplacian,
)


class RadialGridTests(SimpleTestCase):

    def test_rejects_even_or_short_grids(self):
        for n in (8, 10, 7):
            with self.assertRaises(StructuralError):
                RadialGrid(10.0, n)

    def test_rejects_non_positive_radius(self):
        with self.assertRaises(StructuralError):
            RadialGrid(0.0, 101)

    def test_nodes_are_read_only(self):
        grid = RadialGrid(4.0, 9)
        self.assertEqual(grid.spacing, 0.5)
        with self.assertRaises(ValueError):
            grid.nodes[0] = 1.0

    def test_scaled_keeps_node_count(self):
        grid = RadialGrid(10.0, 101).scaled(2.0)
        self.assertEqual(grid.n, 101)
        self.assertAlmostEqual(grid.r_max, 5.0)


class QuadratureTests(SimpleTestCase):

    def setUp(self):
        self.grid = RadialGrid(10.0, 4001)
        self.gauss = np.exp(-self.grid.nodes ** 2)

    def test_gaussian_area_integral(self):
        self.assertAlmostEqual(integrate_radial(self.gauss, self.grid), np.pi, delta=1e-10)

    def test_line_integral_of_even_profile(self):
        value = integrate_profile(self.gauss, self.grid, dim=1)
        self.assertAlmostEqual(value, np.sqrt(np.pi), delta=1e-10)

    def test_disk_area(self):
        grid = RadialGrid(3.0, 101)
        self.assertAlmostEqual(integrate_radial(np.ones(grid.n), grid), 9.0 * np.pi, delta=1e-10)

    def test_exponential_integral(self):
        grid = RadialGrid(60.0, 8193)
        self.assertAlmostEqual(integrate_radial(np.exp(-grid.nodes), grid), 2.0 * np.pi, delta=1e-9)

    def test_linearity(self):
        r = self.grid.nodes
        f, g = np.exp(-r), np.cos(r) * np.exp(-r ** 2)
        combined = integrate_radial(2.5 * f - 0.75 * g, self.grid)
        separate = 2.5 * integrate_radial(f, self.grid) - 0.75 * integrate_radial(g, self.grid)
        self.assertLessEqual(abs(combined - separate), 1e-13 * abs(separate))

    def test_fourth_order_refinement(self):
        errors = []
        for n in (41, 81):
            grid = RadialGrid(6.0, n)
            errors.append(abs(integrate_radial(np.exp(-grid.nodes ** 2), grid) - np.pi))
        self.assertGreaterEqual(errors[0] / errors[1], 14.0)
        self.assertLessEqual(errors[0] / errors[1], 18.0)

    def test_mismatched_samples(self):
        with self.assertRaises(StructuralError):
            integrate_radial(self.gauss[:-1], self.grid)

    def test_non_finite_samples(self):
        samples = self.gauss.copy()
        samples[3] = np.nan
        with self.assertRaises(NumericError):
            integrate_radial(samples, self.grid)


class DifferenceTests(SimpleTestCase):

    def test_first_derivative_is_fourth_order(self):
        grid = RadialGrid(2.0, 2001)
        du = first_derivative(np.sin(grid.nodes), grid.spacing)
        self.assertLess(np.max(np.abs(du - np.cos(grid.nodes))), 1e-9)

    def test_differentiate_is_exact_on_quadratics(self):
        grid = RadialGrid(4.0, 1025)
        du = differentiate(RadialProfile(grid, grid.nodes ** 2))
        self.assertLessEqual(np.max(np.abs(du - 2.0 * grid.nodes)), 1e-10)

    def test_differentiate_gaussian(self):
        grid = RadialGrid(10.0, 4001)
        r = grid.nodes
        du = differentiate(RadialProfile(grid, np.exp(-r ** 2 / 2.0)))
        self.assertEqual(du[0], 0.0)
        self.assertLessEqual(np.max(np.abs(du + r * np.exp(-r ** 2 / 2.0))), 1e-8)

    def test_differentiate_constant(self):
        grid = RadialGrid(4.0, 101)
        du = differentiate(RadialProfile(grid, np.full(grid.n, 3.0)))
        self.assertLessEqual(np.max(np.abs(du)), 1e-12)

    def test_too_few_samples(self):
        with self.assertRaises(StructuralError):
            first_derivative(np.ones(4), 0.1)

    def test_planar_laplacian_of_gaussian(self):
        grid = RadialGrid(8.0, 1601)
        r = grid.nodes
        lap = radial_laplacian(np.exp(-r ** 2), grid, dim=2)
        exact = (4.0 * r ** 2 - 4.0) * np.exp(-r ** 2)
        self.assertLess(np.max(np.abs(lap - exact)), 1e-6)

    def test_line_laplacian_is_second_derivative(self):
        grid = RadialGrid(8.0, 1601)
        r = grid.nodes
        lap = radial_laplacian(np.exp(-r ** 2), grid, dim=1)
        exact = (4.0 * r ** 2 - 2.0) * np.exp(-r ** 2)
        self.assertLess(np.max(np.abs(lap - exact)), 1e-6)


class ProfileTests(SimpleTestCase):

    def setUp(self):
        self.grid = RadialGrid(6.0, 601)
        self.profile = RadialProfile(self.grid, np.exp(-self.grid.nodes ** 2))

    def test_shape_and_finiteness_checked(self):
        with self.assertRaises(StructuralError):
            RadialProfile(self.grid, np.ones(5))
        with self.assertRaises(NumericError):
            RadialProfile(self.grid, np.full(601, np.inf))

    def test_evaluate_interpolates_nodes(self):
        values = self.profile.evaluate(self.grid.nodes)
        self.assertLess(np.max(np.abs(values - self.profile.values)), 1e-12)

    def test_evaluate_between_nodes(self):
        r = np.array([0.005, 0.731, 2.4567])
        self.assertLess(np.max(np.abs(self.profile.evaluate(r) - np.exp(-r ** 2))), 1e-8)

    def test_evaluate_beyond_radius_uses_far_field(self):
        self.assertEqual(self.profile.evaluate(np.array([7.0]))[0], 0.0)
        tailed = self.profile.with_values(self.profile.values, tail_amplitude=2.0, tail_rate=0.5)
        expected = 2.0 * special.k0(3.5)
        self.assertAlmostEqual(tailed.evaluate(np.array([7.0]))[0], expected, places=12)

    def test_half_max_radius(self):
        self.assertAlmostEqual(half_max_radius(self.profile), np.sqrt(np.log(2.0)), delta=self.grid.spacing)


class KernelTests(SimpleTestCase):

    def test_planar_kernel_is_k0(self):
        x = np.array([0.5, 3.0, 40.0])
        self.assertTrue(np.allclose(decay_kernel(x, 2), special.k0(x), rtol=1e-12, atol=0.0))

    def test_line_kernel_is_exponential(self):
        x = np.array([0.5, 3.0])
        self.assertTrue(np.allclose(decay_kernel(x, 1), np.exp(-x)))
