import numpy as np
from django.test import SimpleTestCase

from branches.scanner import (
    BranchRow, BranchTable, check_alpha_monotonicity, check_hamiltonian_relation,
    default_omega_grid, frequency_for_alpha, hamiltonian_residuals, invert_mass_to_frequency,
    invert_mass_to_ground_state, mass_gap_check, minimality_margin, scan_branch,
    validate_omega_grid,
)
from core.exceptions import DomainError, MassBelowThreshold, NumericError, StructuralError
from core.testing import branch, cubic_mass, ground_state
from groundstates.solver import ShootingConfig, solve_scalar_field


def synthetic_table(masses, townes=11.7):
    rows = [
        BranchRow(omega=0.01 * (i + 1), mass=m, energy=0.0, alpha=0.1 * (i + 1),
                  c_alpha=1.0, pohozaev_residual=0.0, grad_norm_sq=1.0)
        for i, m in enumerate(masses)
    ]
    return BranchTable(rows=rows, omega_grid=np.array([row.omega for row in rows]),
                       townes_mass=townes)


class OmegaGridTests(SimpleTestCase):

    def test_default_grids(self):
        grid = default_omega_grid()
        self.assertEqual(grid.size, 30)
        self.assertAlmostEqual(grid[0], 0.005)
        self.assertAlmostEqual(grid[-1], 0.18)
        self.assertTrue(np.allclose(np.diff(np.log(grid)), np.log(grid[1] / grid[0])))
        linear = default_omega_grid(10, 0.02, 0.1, spacing='linear')
        self.assertTrue(np.allclose(np.diff(linear), 0.08 / 9))

    def test_rejects_short_or_unsorted_grids(self):
        with self.assertRaises(StructuralError):
            validate_omega_grid(default_omega_grid(9))
        with self.assertRaises(StructuralError):
            validate_omega_grid(default_omega_grid(10)[::-1])

    def test_rejects_frequencies_outside_scan_range(self):
        with self.assertRaises(DomainError):
            validate_omega_grid(np.linspace(0.001, 0.1, 10))
        with self.assertRaises(DomainError):
            scan_branch(np.linspace(0.01, 0.185, 10), workers=1, townes=11.7)


class BranchPropertyTests(SimpleTestCase):

    def test_mass_increases_above_townes(self):
        table = branch(10)
        self.assertEqual(len(table.rows), 10)
        self.assertTrue(table.mass_strictly_increasing)
        self.assertGreater(mass_gap_check(table), 0.0)
        self.assertLess(abs(table.townes_mass - cubic_mass()), 1e-12)

    def test_energy_and_residual_columns(self):
        table = branch(10)
        self.assertTrue(np.all(table.column('energy') < 0.0))
        self.assertLessEqual(np.max(np.abs(table.column('pohozaev_residual'))), 1e-6)

    def test_alpha_norm_inequalities_hold(self):
        result = check_alpha_monotonicity(branch(10))
        self.assertTrue(result.holds)
        self.assertEqual(result.violations, [])
        self.assertGreater(result.pairs_checked, 0)
        self.assertIn('holds', result.as_dict())

    def test_ground_states_beat_random_trials(self):
        self.assertGreater(minimality_margin(ground_state(0.1), trials=20), 0.0)


class HamiltonianRelationTests(SimpleTestCase):

    def test_residual_is_small_and_second_order(self):
        coarse = branch(10, 0.02, 0.10, 'linear')
        fine = branch(19, 0.02, 0.10, 'linear')
        self.assertLessEqual(check_hamiltonian_relation(fine), 1e-3)
        _, coarse_residual = hamiltonian_residuals(coarse)
        _, fine_residual = hamiltonian_residuals(fine)
        # interior coarse nodes are the even interior fine nodes
        shared = fine_residual[1::2][:len(coarse_residual)]
        ratio = np.median(coarse_residual / shared)
        self.assertGreaterEqual(ratio, 3.0)
        self.assertLessEqual(ratio, 5.0)

    def test_needs_three_rows(self):
        with self.assertRaises(StructuralError):
            hamiltonian_residuals(synthetic_table([12.0, 13.0]))


class ParallelScanTests(SimpleTestCase):

    def test_workers_do_not_change_results(self):
        serial = branch(10, 0.02, 0.10, 'linear')
        parallel = scan_branch(serial.omega_grid, ShootingConfig(), workers=2,
                               townes=serial.townes_mass)
        self.assertEqual(parallel.rows, serial.rows)


class InversionTests(SimpleTestCase):

    def test_inverts_interior_mass(self):
        table = branch(10)
        masses = table.column('mass')
        target = 0.5 * (masses[4] + masses[5])
        record = invert_mass_to_ground_state(target, table)
        self.assertLessEqual(abs(record.mass - target), 1e-9 * target)
        self.assertGreater(record.omega, table.rows[4].omega)
        self.assertLess(record.omega, table.rows[5].omega)

    def test_inverts_from_serialized_table(self):
        table = BranchTable.from_dict(branch(10).as_dict())
        self.assertEqual(table.records, [])
        target = 0.5 * (table.rows[2].mass + table.rows[3].mass)
        omega = invert_mass_to_frequency(target, table)
        self.assertGreater(omega, table.rows[2].omega)
        self.assertLess(omega, table.rows[3].omega)

    def test_rejects_mass_at_threshold(self):
        table = branch(10)
        with self.assertRaises(MassBelowThreshold) as caught:
            invert_mass_to_ground_state(table.townes_mass, table)
        self.assertEqual(caught.exception.exit_code, 2)

    def test_refuses_non_monotone_table(self):
        with self.assertRaises(NumericError) as caught:
            invert_mass_to_ground_state(12.8, synthetic_table([13.0, 12.5, 14.0]))
        self.assertEqual(caught.exception.kind, 'non_monotone_branch')

    def test_frequency_for_alpha(self):
        rows = branch(10).rows[:4]
        table = BranchTable(rows=rows, omega_grid=np.array([row.omega for row in rows]),
                            townes_mass=cubic_mass())
        target = 0.5 * (rows[1].alpha + rows[2].alpha)
        record = frequency_for_alpha(target, table)
        self.assertLessEqual(abs(record.alpha - target), 1e-9 * target)
        self.assertGreater(record.omega, rows[1].omega)
        self.assertLess(record.omega, rows[2].omega)

    def test_alpha_outside_table(self):
        table = synthetic_table([12.0, 13.0, 14.0])
        with self.assertRaises(DomainError):
            frequency_for_alpha(5.0, table)

    def test_round_trip_through_mass(self):
        cfg = ShootingConfig(n=4097)
        table = branch(10)
        for omega in (0.009, 0.014, 0.02, 0.03, 0.045, 0.065, 0.095, 0.11, 0.14, 0.16):
            with self.subTest(omega=omega):
                mass = solve_scalar_field(omega, cfg).mass
                self.assertAlmostEqual(invert_mass_to_frequency(mass, table, cfg), omega, delta=1e-7)

    def test_bracket_extends_past_table(self):
        rows = branch(10).rows[2:8]
        table = BranchTable(rows=rows, omega_grid=np.array([row.omega for row in rows]),
                            townes_mass=cubic_mass())
        for omega in (0.008, 0.1):
            with self.subTest(omega=omega):
                self.assertFalse(rows[0].omega <= omega <= rows[-1].omega)
                mass = ground_state(omega).mass
                self.assertAlmostEqual(invert_mass_to_frequency(mass, table), omega, delta=1e-7)


class FullBranchTests(SimpleTestCase):

    def test_row_masses_span_the_branch(self):
        table = branch(30)
        masses = table.column('mass')
        self.assertLessEqual(abs(masses[0] - cubic_mass()) / cubic_mass(), 0.05)
        self.assertGreaterEqual(masses[-1], 3.0 * cubic_mass())
        self.assertTrue(table.mass_strictly_increasing)
        self.assertTrue(np.all(table.column('c_alpha') > 0.0))
