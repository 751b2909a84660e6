"""
H¹ distance from a field to the orbit {e^{is}P_ω(· − y)}.

The H¹ inner product with every grid translate of the reference is one
inverse FFT of φ̂·conj(P̂)·(1 + |k|²); the best translate is then refined
below the grid spacing by quadratic fits of the correlation peak.
"""
import logging
from dataclasses import dataclass

import numpy as np
from scipy import fft

from .field import sample_soliton

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class OrbitFit:
    distance: float
    theta_star: float
    y_star: tuple

    def __iter__(self):
        return iter((self.distance, self.theta_star, self.y_star))


def reference_field(field, rec):
    """P_ω centered at the origin on the field's grid."""
    return sample_soliton(rec, (0.0, 0.0), (0.0, 0.0), 0.0, field.n, field.box_length)


def _weight(field):
    KX, KY = field.wavenumbers
    return 1.0 + KX ** 2 + KY ** 2


def _overlap_at(spectrum, reference_spectrum, weight, field, y):
    """⟨φ, P(· − y)⟩_{H¹} for a continuous shift y."""
    KX, KY = field.wavenumbers
    ramp = np.exp(1j * (KX * y[0] + KY * y[1]))
    return field.spacing ** 2 / field.values.size * np.sum(
        spectrum * np.conj(reference_spectrum) * weight * ramp
    )


def _wrap(y, box_length):
    return float(np.mod(y + 0.5 * box_length, box_length) - 0.5 * box_length)


def _vertex(minus, center, plus, limit=0.5):
    curvature = minus - 2.0 * center + plus
    if curvature >= 0.0:
        return 0.0
    return float(np.clip(0.5 * (minus - plus) / curvature, -limit, limit))


def orbital_distance(field, rec, reference=None, refine=True):
    """
    inf over (s, y) of ‖φ − e^{is}P_ω(· − y)‖_{H¹}.

    Args:
        field (CartesianField): Field to measure.
        rec (GroundStateRecord): Ground state defining the orbit.
        reference (CartesianField): P_ω embedded at the origin on the same grid,
            built when omitted.
        refine (bool): Refine the shift below the grid spacing.

    Returns:
        OrbitFit: (distance, θ*, y*), unpackable as a tuple.
    """
    if reference is None:
        reference = reference_field(field, rec)
    weight = _weight(field)
    spectrum = field.spectrum()
    reference_spectrum = reference.spectrum()
    cell = field.spacing ** 2

    correlation = cell * fft.ifft2(spectrum * np.conj(reference_spectrum) * weight)
    magnitude = np.abs(correlation)
    i, j = np.unravel_index(np.argmax(magnitude), magnitude.shape)
    n, h = field.n, field.spacing
    y = np.array([i * h, j * h])
    best = correlation[i, j]

    if refine:
        offset = (
            _vertex(magnitude[(i - 1) % n, j], magnitude[i, j], magnitude[(i + 1) % n, j]),
            _vertex(magnitude[i, (j - 1) % n], magnitude[i, j], magnitude[i, (j + 1) % n]),
        )
        candidate = y + h * np.array(offset)
        # second pass on the continuous overlap at a quarter spacing
        step = 0.25 * h
        for axis in range(2):
            e = np.zeros(2)
            e[axis] = step
            values = [abs(_overlap_at(spectrum, reference_spectrum, weight, field, candidate + s * e))
                      for s in (-1.0, 0.0, 1.0)]
            candidate = candidate + _vertex(*values, limit=1.0) * e
        overlap = _overlap_at(spectrum, reference_spectrum, weight, field, candidate)
        if abs(overlap) > abs(best):
            y, best = candidate, overlap

    theta = float(np.angle(best))
    KX, KY = field.wavenumbers
    aligned = np.exp(1j * theta) * reference_spectrum * np.exp(-1j * (KX * y[0] + KY * y[1]))
    residual = cell / field.values.size * np.sum(np.abs(spectrum - aligned) ** 2 * weight)
    y_star = (_wrap(y[0], field.box_length), _wrap(y[1], field.box_length))
    return OrbitFit(float(np.sqrt(max(residual, 0.0))), theta, y_star)


def h1_norm(field):
    """‖φ‖_{H¹} with the spectral weight 1 + |k|²."""
    spectrum = field.spectrum()
    return float(np.sqrt(
        field.spacing ** 2 / field.values.size * np.sum(np.abs(spectrum) ** 2 * _weight(field))
    ))
