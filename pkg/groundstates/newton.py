"""
Newton polish of a ground-state guess on the 4th-order grid operator.
"""
import logging

import numpy as np
from scipy import sparse
from scipy.sparse.linalg import spsolve

from core.exceptions import ConvergenceError
from quadrature.grid import kernel_ratio, radial_laplacian_matrix

logger = logging.getLogger(__name__)

ROUNDOFF_RESIDUAL = 1e-9
FAILED_RESIDUAL = 1e-6


def far_ratios(grid, nl, dim):
    """Ghost values past r_max relative to u(r_max), from the linear far field."""
    x_end = nl.decay * grid.r_max
    step = nl.decay * grid.spacing
    return (kernel_ratio(x_end, x_end + step, dim), kernel_ratio(x_end, x_end + 2.0 * step, dim))


def equation_operator(grid, nl, dim):
    return radial_laplacian_matrix(grid, dim, far_ratios(grid, nl, dim))


def ode_residual(values, grid, nl, dim, operator=None):
    """
    Relative residual of the radial equation at the interior nodes.

    Returns max|Δu − g(u)| over nodes 0..n-3 divided by max|u|.
    """
    if operator is None:
        operator = equation_operator(grid, nl, dim)
    residual = operator @ values - nl.force(values)
    scale = np.max(np.abs(values)) or 1.0
    return float(np.max(np.abs(residual[:-2])) / scale)


def polish(guess, grid, nl, dim, tolerance, max_iter=40):
    """
    Damped Newton iteration on Δu − g(u) = 0.

    Args:
        guess (ndarray): Starting samples.
        grid (RadialGrid): Grid of the samples.
        nl (Nonlinearity): Right-hand side.
        dim (int): 1 or 2.
        tolerance (float): Target relative residual.
        max_iter (int): Maximum Newton steps.

    Returns:
        tuple: (values, iterations, relative residual).

    Raises:
        ConvergenceError: If the residual stalls above roundoff level.
    """
    operator = equation_operator(grid, nl, dim)
    u = np.array(guess, dtype=float)

    def residual_of(v):
        return operator @ v - nl.force(v)

    F = residual_of(u)
    norm = np.max(np.abs(F))
    iterations = 0
    for iterations in range(1, max_iter + 1):
        scale = np.max(np.abs(u)) or 1.0
        if norm / scale <= tolerance:
            break
        jacobian = operator - sparse.diags(nl.force_prime(u), format='csc')
        step = spsolve(jacobian, -F)
        damping = 1.0
        accepted = False
        while damping >= 1.0 / 64.0:
            trial = u + damping * step
            F_trial = residual_of(trial)
            norm_trial = np.max(np.abs(F_trial))
            if norm_trial < norm:
                accepted = True
                break
            damping *= 0.5
        logger.debug("newton it=%d residual=%.3e damping=%.4f", iterations, norm / scale, damping)
        if not accepted:
            break
        stalled = norm_trial > 0.5 * norm
        u, F, norm = trial, F_trial, norm_trial
        if stalled and norm / scale <= ROUNDOFF_RESIDUAL:
            break

    relative = ode_residual(u, grid, nl, dim, operator)
    if relative > max(tolerance, ROUNDOFF_RESIDUAL) and relative > FAILED_RESIDUAL:
        raise ConvergenceError(
            "Newton polish did not converge",
            omega=nl.omega, residual=relative, iterations=iterations,
        )
    return u, iterations, relative
