"""
Strang splitting for i∂ₜφ + Δφ + |φ|²φ − |φ|⁴φ = 0.

The nonlinear subflow keeps |φ| fixed, so it is the exact phase rotation
e^{iτ(|φ|² − |φ|⁴)}; the linear subflow is the exact spectral propagator
e^{−iτ|k|²}.
"""
import logging
from functools import lru_cache

import numpy as np
from scipy import fft

from core.exceptions import NumericError, StructuralError

from .field import periodic_axes

logger = logging.getLogger(__name__)

PHASE_WRAP_LIMIT = np.pi


@lru_cache(maxsize=8)
def _linear_propagator(n, box_length, dt):
    _, _, KX, KY = periodic_axes(n, box_length)
    return np.exp(-1j * dt * (KX ** 2 + KY ** 2))


def max_linear_phase(field, dt):
    KX, KY = field.wavenumbers
    return float(abs(dt) * np.max(KX ** 2 + KY ** 2))


def nonlinear_rotation(values, tau):
    density = np.abs(values) ** 2
    return values * np.exp(1j * tau * (density - density ** 2))


def step_strang(field, dt, phase_limit=PHASE_WRAP_LIMIT):
    """
    Advance one step of size ``dt``: nonlinear half step, linear step, nonlinear half step.

    A negative ``dt`` steps backward in time.

    Args:
        field (CartesianField): Current field.
        dt (float): Step size, nonzero.
        phase_limit (float): Largest allowed dt·max|k|².

    Returns:
        CartesianField: Field at time + dt.

    Raises:
        StructuralError: If dt is zero or the linear phase per step exceeds ``phase_limit``.
        NumericError: If the step produced non-finite samples.
    """
    if dt == 0 or not np.isfinite(dt):
        raise StructuralError("Time step must be finite and nonzero", dt=dt)
    if max_linear_phase(field, dt) > phase_limit:
        raise StructuralError(
            "dt·max|k|² exceeds the phase-wrap limit",
            dt=dt, phase=max_linear_phase(field, dt), limit=phase_limit,
        )
    values = nonlinear_rotation(field.values, 0.5 * dt)
    values = fft.ifft2(fft.fft2(values) * _linear_propagator(field.n, field.box_length, dt))
    values = nonlinear_rotation(values, 0.5 * dt)
    if not np.all(np.isfinite(values)):
        raise NumericError("Non-finite samples after a Strang step, dt may be too large",
                           dt=dt, time=field.time)
    return field.with_values(values, time=field.time + dt)


def evolve(field, dt, steps):
    """Apply ``steps`` Strang steps."""
    for _ in range(steps):
        field = step_strang(field, dt)
    return field
