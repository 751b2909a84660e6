"""
Far-field fits of ground-state profiles.
"""
import logging
import math

import numpy as np

from core.exceptions import NumericError
from quadrature.grid import decay_kernel

logger = logging.getLogger(__name__)

TAIL_FRACTION = 0.1
FIT_THRESHOLD = 1e-3


def _tail_window(profile):
    n = profile.grid.n
    width = max(int(math.ceil(TAIL_FRACTION * n)), 5)
    return slice(n - width, n)


def fit_tail_amplitude(profile, omega):
    """
    Least-squares amplitude A of A·K(√ω r) over the last tenth of the grid.

    Returns:
        tuple: (A, relative fit residual).
    """
    window = _tail_window(profile)
    kappa = math.sqrt(omega)
    u = profile.values[window]
    kernel = decay_kernel(kappa * profile.grid.nodes[window], profile.dim)
    amplitude = float(u @ kernel / (kernel @ kernel))
    norm = np.linalg.norm(u)
    residual = float(np.linalg.norm(u - amplitude * kernel) / norm) if norm > 0 else 0.0
    return amplitude, residual


def fit_decay(profile, omega):
    """
    Fit log u = c − κr − p·log r on the decay corridor.

    The corridor starts where u has fallen below 1e-4 of its peak and stops
    before the last tenth of the grid.

    Returns:
        tuple: (κ, p), or (0.0, None) when the corridor is too short.
    """
    r = profile.grid.nodes
    u = profile.values
    peak = np.max(np.abs(u))
    stop = r <= (1.0 - TAIL_FRACTION) * profile.grid.r_max
    corridor = (u > 1e-250) & (u < 1e-4 * peak) & stop & (r > 0)
    if np.count_nonzero(corridor) < 10:
        return 0.0, None
    rc = r[corridor]
    if profile.dim == 1:
        design = np.column_stack([np.ones_like(rc), -rc])
    else:
        design = np.column_stack([np.ones_like(rc), -rc, -np.log(rc)])
    coeffs, *_ = np.linalg.lstsq(design, np.log(u[corridor]), rcond=None)
    kappa = float(coeffs[1])
    prefactor = float(coeffs[2]) if profile.dim == 2 else 0.0
    logger.debug("decay fit omega=%.6g kappa=%.8g p=%.4f", omega, kappa, prefactor)
    return kappa, prefactor


def attach_far_field(profile, omega):
    """Copy of ``profile`` carrying its fitted decay rate and far-field amplitude."""
    kappa, prefactor = fit_decay(profile, omega)
    amplitude, _ = fit_tail_amplitude(profile, omega)
    return profile.with_values(
        profile.values,
        decay_rate=kappa,
        prefactor_exponent=prefactor,
        tail_amplitude=amplitude,
        tail_rate=math.sqrt(omega),
    )


def tail_extend(record):
    """
    Replace the last tenth of the samples by the fitted far field A·K(√ω r).

    Args:
        record (GroundStateRecord): Converged record.

    Returns:
        RadialProfile: Profile with the far field written into its tail.

    Raises:
        NumericError: If the far-field fit residual exceeds 1e-3.
    """
    profile = record.profile
    amplitude, residual = fit_tail_amplitude(profile, record.omega)
    if residual > FIT_THRESHOLD:
        raise NumericError(
            "Far-field fit residual above threshold",
            omega=record.omega, residual=residual, threshold=FIT_THRESHOLD,
        )
    window = _tail_window(profile)
    values = profile.values.copy()
    kappa = math.sqrt(record.omega)
    values[window] = amplitude * decay_kernel(kappa * profile.grid.nodes[window], profile.dim)
    return profile.with_values(values, tail_amplitude=amplitude, tail_rate=kappa)
