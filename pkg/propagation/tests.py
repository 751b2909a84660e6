import tempfile
from functools import lru_cache
from pathlib import Path

import numpy as np
from django.test import SimpleTestCase

from core.exceptions import DomainError, FrequencyOutOfWindow, NumericError, StructuralError
from core.testing import cubic_mass, ground_state
from propagation.experiments import (
    gaussian_data, propagate, run_scattering_experiment, run_stability_experiment,
    smooth_perturbation,
)
from propagation.field import (
    CartesianField, boost, boundary_ratio, conserved_report, embed_soliton, load_snapshot,
    minimum_box_length, sample_soliton, translate, write_snapshot,
)
from propagation.orbit import h1_norm, orbital_distance
from propagation.stepping import evolve, step_strang


def quantized_velocity(box_length, modes=4):
    """Velocity with ½v·L a multiple of 2π, so the boost is periodic."""
    return 4.0 * np.pi * modes / box_length


@lru_cache(maxsize=None)
def soliton(omega=0.1, n=256, box_length=128.0):
    return embed_soliton(ground_state(omega), n=n, box_length=box_length)


def sup_distance(a, b):
    return float(np.max(np.abs(a.values - b.values)))


class CartesianFieldTests(SimpleTestCase):

    def test_grid_validation(self):
        for n in (32, 100):
            with self.subTest(n=n):
                with self.assertRaises(StructuralError):
                    CartesianField(n, 10.0, np.zeros((n, n)))
        with self.assertRaises(StructuralError):
            CartesianField(64, 10.0, np.zeros((64, 32)))
        with self.assertRaises(StructuralError):
            CartesianField(64, 0.0, np.zeros((64, 64)))
        values = np.zeros((64, 64))
        values[3, 3] = np.nan
        with self.assertRaises(NumericError):
            CartesianField(64, 10.0, values)

    def test_translate_by_grid_steps_is_a_roll(self):
        field = gaussian_data(1.0, 2.0, 64, 32.0)
        shifted = translate(field, (3 * field.spacing, -2 * field.spacing))
        expected = np.roll(np.roll(field.values, 3, axis=0), -2, axis=1)
        self.assertLessEqual(np.max(np.abs(shifted.values - expected)), 1e-12)

    def test_snapshot_round_trip(self):
        field = soliton().with_values(soliton().values, time=1.25)
        with tempfile.TemporaryDirectory() as tmp:
            binary, sidecar = write_snapshot(field, Path(tmp) / 'field.bin')
            self.assertTrue(sidecar.exists())
            loaded = load_snapshot(binary)
            self.assertEqual(loaded.n, field.n)
            self.assertEqual(loaded.box_length, field.box_length)
            self.assertEqual(loaded.time, 1.25)
            self.assertTrue(np.array_equal(loaded.values, field.values))
            sidecar.write_text('{"n": 128, "L": 96.0, "time": 0.0, "schema_version": 1}')
            with self.assertRaises(StructuralError):
                load_snapshot(binary)


class EmbeddingTests(SimpleTestCase):

    def test_mass_matches_radial_profile(self):
        mass, energy, momentum = conserved_report(soliton())
        rec = ground_state(0.1)
        self.assertLessEqual(abs(mass - rec.mass), 1e-6 * rec.mass)
        self.assertLessEqual(abs(energy - rec.energy), 1e-6 * abs(rec.energy))
        self.assertLessEqual(np.hypot(*momentum), 1e-8)

    def test_boost_carries_momentum(self):
        v = quantized_velocity(128.0)
        field = embed_soliton(ground_state(0.1), v0=(v, 0.0), n=256, box_length=128.0)
        mass, _, momentum = conserved_report(field)
        self.assertLessEqual(abs(momentum[0] - mass * v), 1e-5 * mass * v)
        self.assertLessEqual(abs(momentum[1]), 1e-8)

    def test_phase_only_rotates(self):
        rotated = embed_soliton(ground_state(0.1), theta0=0.7, n=256, box_length=128.0)
        self.assertTrue(np.allclose(np.abs(rotated.values), np.abs(soliton().values), rtol=0, atol=1e-14))

    def test_box_too_small(self):
        with self.assertRaises(DomainError):
            embed_soliton(ground_state(0.1), n=64, box_length=8.0)

    def test_edge_amplitude_is_enforced(self):
        rec = ground_state(0.15)
        with self.assertRaises(DomainError) as caught:
            embed_soliton(rec, n=256, box_length=64.0)
        self.assertGreater(caught.exception.context['boundary_ratio'], 1e-8)
        self.assertEqual(caught.exception.exit_code, 2)

    def test_box_sized_from_decay_rate(self):
        rec = ground_state(0.15)
        length = minimum_box_length(rec)
        self.assertGreater(length, 96.0)
        self.assertLessEqual(length, 128.0)
        field = embed_soliton(rec, n=256)
        self.assertEqual(field.box_length, length)
        self.assertLessEqual(boundary_ratio(field), 1e-8)

    def test_orbit_reference_skips_geometry_checks(self):
        field = sample_soliton(ground_state(0.15), n=256, box_length=64.0)
        self.assertGreater(boundary_ratio(field), 1e-8)
        self.assertLessEqual(orbital_distance(field, ground_state(0.15)).distance, 1e-8)


class StrangStepTests(SimpleTestCase):

    def test_rejects_bad_steps(self):
        field = gaussian_data(1.0, 2.0, 128, 64.0)
        with self.assertRaises(StructuralError):
            step_strang(field, 0.0)
        with self.assertRaises(StructuralError):
            step_strang(field, 0.1)

    def test_zero_field_stays_zero(self):
        zero = CartesianField(64, 16.0, np.zeros((64, 64)))
        self.assertEqual(np.max(np.abs(evolve(zero, 0.005, 20).values)), 0.0)

    def test_free_gaussian_spreads_exactly(self):
        amplitude, sigma, t = 1e-6, 2.0, 1.0
        field = CartesianField(128, 64.0, np.zeros((128, 128)))
        X, Y = field.coordinates
        field = field.with_values(amplitude * np.exp(-(X ** 2 + Y ** 2) / (2.0 * sigma ** 2)))
        evolved = evolve(field, 0.02, 50)
        s = sigma ** 2 + 2j * t
        exact = amplitude * sigma ** 2 / s * np.exp(-(X ** 2 + Y ** 2) / (2.0 * s))
        self.assertAlmostEqual(evolved.time, t)
        self.assertLessEqual(np.max(np.abs(evolved.values - exact)), 1e-8 * amplitude)

    def test_soliton_only_rotates_its_phase(self):
        field = soliton()
        evolved = evolve(field, 1e-3, 1000)
        exact = np.exp(1j * 0.1 * evolved.time) * field.values
        self.assertLessEqual(np.max(np.abs(evolved.values - exact)), 1e-5)

    def test_second_order_in_time(self):
        field = soliton(n=128)
        reference = evolve(field, 0.0025, 400)
        coarse = sup_distance(evolve(field, 0.05, 20), reference)
        fine = sup_distance(evolve(field, 0.025, 40), reference)
        self.assertGreaterEqual(coarse / fine, 3.5)
        self.assertLessEqual(coarse / fine, 4.5)

    def test_time_reversible(self):
        field = soliton(n=128)
        forward = evolve(field, 0.01, 100)
        back = evolve(forward, -0.01, 100)
        self.assertAlmostEqual(back.time, 0.0)
        self.assertLessEqual(sup_distance(back, field), 1e-8)

    def test_conservation(self):
        field = soliton()
        mass0, energy0, _ = conserved_report(field)
        mass, energy, momentum = conserved_report(evolve(field, 1e-3, 2000))
        self.assertLessEqual(abs(mass - mass0) / mass0, 1e-10)
        self.assertLessEqual(abs(energy - energy0) / abs(energy0), 1e-6)
        self.assertLessEqual(np.hypot(*momentum), 1e-8)

    def test_galilean_covariance(self):
        field = soliton()
        v = quantized_velocity(field.box_length)
        t = 1.0
        moving = evolve(boost(field, (v, 0.0)), 0.01, 100)
        resting = evolve(field, 0.01, 100)
        expected = boost(translate(resting, (v * t, 0.0)), (v, 0.0))
        expected = expected.with_values(expected.values * np.exp(-0.25j * v ** 2 * t))
        self.assertLessEqual(sup_distance(moving, expected), 1e-5)


class OrbitalDistanceTests(SimpleTestCase):

    def setUp(self):
        self.rec = ground_state(0.1)

    def test_shifted_rotated_soliton_is_on_the_orbit(self):
        h = 128.0 / 256
        x0 = (7 * h, -5 * h)
        field = embed_soliton(self.rec, x0=x0, theta0=0.7, n=256, box_length=128.0)
        distance, theta, y = orbital_distance(field, self.rec)
        self.assertLessEqual(distance, 1e-6)
        self.assertAlmostEqual(theta, 0.7, places=8)
        self.assertAlmostEqual(y[0], x0[0], places=8)
        self.assertAlmostEqual(y[1], x0[1], places=8)

    def test_scaled_soliton(self):
        field = soliton()
        scaled = field.with_values(1.01 * field.values)
        expected = 0.01 * h1_norm(field)
        self.assertLessEqual(abs(orbital_distance(scaled, self.rec).distance - expected), 0.05 * expected)

    def test_phase_invariance(self):
        field = soliton()
        bump = smooth_perturbation(field, 0.05 * h1_norm(field), seed=3, envelope=6.0)
        perturbed = field.with_values(field.values + bump.values)
        rotated = perturbed.with_values(np.exp(1.3j) * perturbed.values)
        self.assertAlmostEqual(
            orbital_distance(perturbed, self.rec).distance,
            orbital_distance(rotated, self.rec).distance,
            delta=1e-10,
        )

    def test_perturbation_has_requested_size(self):
        field = soliton()
        bump = smooth_perturbation(field, 0.3, seed=1, envelope=6.0)
        self.assertAlmostEqual(h1_norm(bump), 0.3, places=12)


class StabilityExperimentTests(SimpleTestCase):

    def test_unperturbed_soliton_stays_on_orbit(self):
        trace = run_stability_experiment(
            0.15, delta=0.0, T=2.0, dt=1e-3, n=256, box_length=128.0, record_every=500,
            rec=ground_state(0.15),
        )
        self.assertFalse(trace.aborted)
        self.assertAlmostEqual(trace.horizon, 2.0)
        self.assertLessEqual(max(trace.orbital_distance), 1e-5)
        self.assertLessEqual(max(trace.mass_drift), 1e-10)
        # a soliton-mass control does not disperse
        self.assertGreaterEqual(trace.l4_pow4[-1], 0.99 * trace.l4_pow4[0])

    def test_small_perturbation_stays_close(self):
        trace = run_stability_experiment(
            0.15, delta=1e-2, T=50.0, dt=5e-3, n=256, box_length=128.0, record_every=200,
            rec=ground_state(0.15),
        )
        initial = trace.orbital_distance[0]
        self.assertGreater(initial, 0.0)
        self.assertFalse(trace.aborted)
        self.assertAlmostEqual(trace.horizon, 50.0)
        self.assertLessEqual(max(trace.orbital_distance), 10.0 * initial)
        self.assertLessEqual(max(trace.mass_drift), 1e-10)
        self.assertEqual(len(trace.times), len(list(trace.csv_rows())))

    def test_default_box_keeps_the_edge_clean(self):
        trace = run_stability_experiment(
            0.15, delta=0.0, T=0.5, dt=1e-3, n=256, record_every=100, rec=ground_state(0.15),
        )
        self.assertFalse(trace.aborted)
        self.assertEqual(trace.abort_reason, '')
        self.assertAlmostEqual(trace.horizon, 0.5)

    def test_traveling_soliton_moves_at_its_velocity(self):
        T = 20.0
        trace = run_stability_experiment(
            0.1, delta=0.0, T=T, dt=0.01, n=256, box_length=128.0, v0=(0.5, 0.0),
            record_every=500, rec=ground_state(0.1),
        )
        velocity = (trace.center_of_mass[-1][0] - trace.center_of_mass[0][0]) / trace.times[-1]
        self.assertAlmostEqual(velocity, 0.5, delta=0.005)
        self.assertAlmostEqual(trace.center_of_mass[-1][1], 0.0, delta=1e-6)

    def test_rejects_bad_arguments(self):
        with self.assertRaises(FrequencyOutOfWindow):
            run_stability_experiment(0.2)
        with self.assertRaises(DomainError):
            run_stability_experiment(0.1, delta=-1.0, rec=ground_state(0.1))
        with self.assertRaises(DomainError):
            propagate(soliton(), dt=0.0, T=1.0)


class ScatteringExperimentTests(SimpleTestCase):

    def test_small_mass_disperses(self):
        trace = run_scattering_experiment(fraction=0.5, townes=cubic_mass())
        self.assertLessEqual(trace.l4_pow4[-1], 0.1 * trace.l4_pow4[0])
        self.assertTrue(np.all(np.diff(trace.variance) > 0.0))
        # spreading is faster than linear in t
        self.assertTrue(np.all(np.diff(trace.variance, 2) > 0.0))
        self.assertLessEqual(max(trace.mass_drift), 1e-10)
        self.assertEqual(trace.orbital_distance, [])

    def test_fraction_must_be_below_one(self):
        for fraction in (0.0, 1.0, 1.5):
            with self.subTest(fraction=fraction):
                with self.assertRaises(DomainError):
                    run_scattering_experiment(fraction=fraction, townes=cubic_mass())

    def test_snapshots_are_written(self):
        with tempfile.TemporaryDirectory() as tmp:
            initial = gaussian_data(1.0, 2.5, 64, 64.0)
            _, trace = propagate(initial, 0.05, 1.0, record_every=5, snapshot_every=10,
                                 snapshot_dir=tmp)
            self.assertEqual(len(trace.snapshots), 3)
            last = load_snapshot(trace.snapshots[-1])
            self.assertAlmostEqual(last.time, 1.0)
