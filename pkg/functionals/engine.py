"""
Mass, energy, momentum and the variational identities of ground states.

Radial profiles are measured with the Simpson rule of ``quadrature.grid``;
Cartesian fields with the equal-weight rule on their periodic grid and
spectral gradients.
"""
import logging
from dataclasses import dataclass, asdict

import numpy as np
from scipy import fft

from core.exceptions import DomainError, NumericError
from quadrature.grid import RadialProfile, differentiate, integrate_profile

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class FunctionalReport:
    """
    Functionals of a single function.

    Attributes:
        mass (float): ∫|u|² dx.
        energy (float): ½·grad_norm_sq − ¼·l4_pow4 + ⅙·l6_pow6.
        momentum (tuple): ∫2 Im(ū∇u) dx, (0, 0) for real radial profiles.
        grad_norm_sq (float): ∫|∇u|² dx.
        l4_pow4 (float): ∫|u|⁴ dx.
        l6_pow6 (float): ∫|u|⁶ dx.
        beta (float): l6_pow6 / grad_norm_sq.
        pohozaev_residual (float): (G + ⅔S6 − ½S4) / G.
    """
    mass: float
    energy: float
    momentum: tuple
    grad_norm_sq: float
    l4_pow4: float
    l6_pow6: float
    beta: float
    pohozaev_residual: float

    def as_dict(self):
        data = asdict(self)
        data['momentum'] = list(self.momentum)
        return data


def _assemble(mass, grad_norm_sq, l4_pow4, l6_pow6, momentum=(0.0, 0.0)):
    energy = 0.5 * grad_norm_sq - 0.25 * l4_pow4 + l6_pow6 / 6.0
    if grad_norm_sq > 0.0:
        beta = l6_pow6 / grad_norm_sq
        residual = (grad_norm_sq + (2.0 / 3.0) * l6_pow6 - 0.5 * l4_pow4) / grad_norm_sq
    else:
        beta = 0.0
        residual = 0.0
    return FunctionalReport(
        mass=float(mass),
        energy=float(energy),
        momentum=(float(momentum[0]), float(momentum[1])),
        grad_norm_sq=float(grad_norm_sq),
        l4_pow4=float(l4_pow4),
        l6_pow6=float(l6_pow6),
        beta=float(beta),
        pohozaev_residual=float(residual),
    )


def _radial_report(u):
    grid, dim = u.grid, u.dim
    sq = u.values ** 2
    du = differentiate(u)
    return _assemble(
        mass=integrate_profile(sq, grid, dim),
        grad_norm_sq=integrate_profile(du ** 2, grid, dim),
        l4_pow4=integrate_profile(sq ** 2, grid, dim),
        l6_pow6=integrate_profile(sq ** 3, grid, dim),
    )


def _cartesian_report(field):
    values = np.asarray(field.values)
    if not np.all(np.isfinite(values)):
        raise NumericError("Field contains non-finite samples", time=field.time)
    cell = field.spacing ** 2
    n_total = values.size
    density = np.abs(values) ** 2
    spectrum = np.abs(fft.fft2(values)) ** 2
    kx, ky = field.wavenumbers
    spectral = cell / n_total
    return _assemble(
        mass=cell * density.sum(),
        grad_norm_sq=spectral * np.sum((kx ** 2 + ky ** 2) * spectrum),
        l4_pow4=cell * np.sum(density ** 2),
        l6_pow6=cell * np.sum(density ** 3),
        momentum=(2.0 * spectral * np.sum(kx * spectrum),
                  2.0 * spectral * np.sum(ky * spectrum)),
    )


def report(u):
    """
    Evaluate every functional of a radial profile or a Cartesian field.

    Args:
        u (RadialProfile | CartesianField): Function to measure.

    Returns:
        FunctionalReport: Norms, energy, momentum and Pohozaev residual.

    Raises:
        NumericError: If the input has non-finite samples.
    """
    if isinstance(u, RadialProfile):
        return _radial_report(u)
    return _cartesian_report(u)


def _as_report(u):
    return u if isinstance(u, FunctionalReport) else report(u)


def scale_profile(u, lam, mu):
    """
    Return μ·u(λ·) exactly on the grid scaled by 1/λ.

    Keeping the node count and dividing r_max by λ makes every quadrature
    transform exactly like the continuous integrals.
    """
    return RadialProfile(u.grid.scaled(lam), mu * u.values, dim=u.dim)


def f_alpha(u, alpha):
    """
    Interpolation functional F_α(u).

    F_α = ‖∇u‖^{2/(1+α)} ‖u‖^{(2+α)/(1+α)} ‖u‖_{L⁶}^{3α/(1+α)} / ‖u‖⁴_{L⁴}

    Args:
        u (RadialProfile | FunctionalReport): Function or its report.
        alpha (float): Positive parameter.

    Returns:
        float: F_α(u) > 0.

    Raises:
        DomainError: If u vanishes or α is not positive.
    """
    if alpha <= 0:
        raise DomainError("alpha must be positive", alpha=alpha)
    rep = _as_report(u)
    if rep.l4_pow4 <= 0.0:
        raise DomainError("F_alpha is undefined for the zero function")
    exponent = 1.0 + alpha
    return float(
        rep.grad_norm_sq ** (1.0 / exponent)
        * rep.mass ** ((2.0 + alpha) / (2.0 * exponent))
        * rep.l6_pow6 ** (alpha / (2.0 * exponent))
        / rep.l4_pow4
    )


def c_alpha(rep, alpha):
    """
    Closed form of the infimum C_α in terms of the minimizer's norms.

    Args:
        rep (FunctionalReport): Report of the minimizer Q_α.
        alpha (float): Positive parameter.
    """
    exponent = 1.0 + alpha
    return float(
        (1.5 * alpha) ** (alpha / (2.0 * exponent)) / (2.0 * exponent)
        * rep.mass ** ((2.0 + alpha) / (2.0 * exponent))
        * rep.grad_norm_sq ** (-alpha / (2.0 * exponent))
    )


def alpha_of(rep):
    """α = ⅔β."""
    return 2.0 * rep.beta / 3.0


def pohozaev_residual(u):
    """
    Relative residual of the Pohozaev identity.

    Returns (∫|∇u|² + ⅔∫u⁶ − ½∫u⁴) / ∫|∇u|².

    Raises:
        DomainError: If the gradient norm vanishes.
    """
    rep = _as_report(u)
    if rep.grad_norm_sq <= 0.0:
        raise DomainError("Pohozaev residual needs a non-constant function")
    return rep.pohozaev_residual


def gn_check(u, townes_mass):
    """
    Slack in the sharp Gagliardo-Nirenberg inequality.

    Args:
        u (RadialProfile | FunctionalReport): Function to test.
        townes_mass (float): ∫q² dx of the cubic ground state.

    Returns:
        float: 2(M/townes_mass)·∫|∇u|² − ∫u⁴, nonnegative up to discretization.
    """
    rep = _as_report(u)
    return float(2.0 * rep.mass / townes_mass * rep.grad_norm_sq - rep.l4_pow4)


def alpha_relations_check(rec):
    """
    Residuals of the two relations tying α to a ground state.

    ∫Q⁴ = 2(1+α)∫|∇Q|² and ω = ((2+α)/2)·∫|∇Q|²/∫Q².

    Args:
        rec (GroundStateRecord): Converged cubic-quintic record.

    Returns:
        tuple: (relative L⁴ residual, relative ω residual).
    """
    rep = rec.norms
    alpha = rec.alpha
    l4_target = 2.0 * (1.0 + alpha) * rep.grad_norm_sq
    omega_target = (2.0 + alpha) / 2.0 * rep.grad_norm_sq / rep.mass
    return (
        abs(rep.l4_pow4 - l4_target) / rep.l4_pow4,
        abs(rec.omega - omega_target) / rec.omega,
    )


def interpolation_slack(u, eps):
    """ε∫u⁶ + ε⁻¹∫u² − ∫u⁴, nonnegative by Young's inequality."""
    rep = _as_report(u)
    return float(eps * rep.l6_pow6 + rep.mass / eps - rep.l4_pow4)


def energy_lower_bound_slack(u, eps):
    """E(u) + M(u)/(4ε), nonnegative whenever ε ≤ 2/3."""
    rep = _as_report(u)
    return float(rep.energy + rep.mass / (4.0 * eps))
