"""
Energy minimization at fixed mass by a normalized gradient flow.

Each step descends along the preconditioned, mass-projected gradient
(c − Δ)⁻¹(E′(u) + ω_k u) and rescales back onto M(u) = m. The shift c
tracks the current multiplier so the step acts like a Sobolev gradient.
"""
import logging
from dataclasses import dataclass, field

import numpy as np
from scipy import sparse
from scipy.sparse.linalg import splu

from branches.scanner import invert_mass_to_ground_state
from core.exceptions import ConvergenceError, DomainError, MassBelowThreshold
from functionals.engine import report, scale_profile
from groundstates.solver import ShootingConfig, townes_mass
from quadrature.grid import RadialGrid, RadialProfile, integrate_radial, radial_laplacian_matrix

logger = logging.getLogger(__name__)

SHIFT_FLOOR = 0.02
REFACTOR_CHANGE = 0.1
ENERGY_SLACK = 1e-12
NEAR_THRESHOLD = 0.01


@dataclass(frozen=True)
class FlowConfig:
    """
    Settings of the gradient flow.

    Attributes:
        time_step (float): Initial and largest step size τ.
        max_steps (int): Step budget.
        stationarity_tolerance (float): Max norm of the projected gradient at which the flow stops.
        grid (RadialGrid): Grid the flow runs on.
        max_backtracks (int): Step halvings allowed before giving up on a step.
    """
    time_step: float = 0.5
    max_steps: int = 20000
    stationarity_tolerance: float = 1e-9
    grid: RadialGrid = field(default_factory=lambda: RadialGrid(200.0, 8193))
    max_backtracks: int = 30

    def __post_init__(self):
        if self.time_step <= 0 or self.stationarity_tolerance <= 0:
            raise DomainError(
                "time_step and stationarity_tolerance must be positive",
                time_step=self.time_step, stationarity_tolerance=self.stationarity_tolerance,
            )
        if self.max_steps < 1:
            raise DomainError("max_steps must be at least 1", max_steps=self.max_steps)


@dataclass
class MinimizerResult:
    """
    Outcome of a constrained minimization.

    Attributes:
        profile (RadialProfile): Minimizer estimate.
        mass (float): Target mass m.
        energy (float): E(profile), the E_min(m) estimate.
        multiplier (float): ω = −⟨E′(u), u⟩/M(u).
        steps (int): Accepted steps.
        residual (float): Max norm of the projected gradient at exit.
        seed_width (float): Width of the initial Gaussian.
        energies (list): Energy after every accepted step.
    """
    profile: RadialProfile
    mass: float
    energy: float
    multiplier: float
    steps: int
    residual: float
    seed_width: float
    energies: list = field(default_factory=list, repr=False)

    def as_dict(self, include_profile=True):
        data = {
            'mass': self.mass,
            'energy': self.energy,
            'multiplier': self.multiplier,
            'steps': self.steps,
            'residual': self.residual,
            'seed_width': self.seed_width,
        }
        if include_profile:
            data['r'] = [float(r) for r in self.profile.nodes]
            data['u'] = [float(u) for u in self.profile.values]
        return data


def _mass(values, grid):
    return integrate_radial(values ** 2, grid)


def _normalize(values, grid, m):
    return values * np.sqrt(m / _mass(values, grid))


def gaussian_seed(m, grid, width=3.0):
    """exp(−(r/width)²) rescaled to mass m."""
    return _normalize(np.exp(-(grid.nodes / width) ** 2), grid, m)


def energy_gradient(values, laplacian):
    """E′(u) = −Δu − u³ + u⁵."""
    return -(laplacian @ values) - values ** 3 + values ** 5


def multiplier_of(values, gradient, grid):
    return -integrate_radial(gradient * values, grid) / _mass(values, grid)


class _Preconditioner:
    """Factorized (c − Δ) refreshed when the multiplier moves."""

    def __init__(self, laplacian):
        self.laplacian = laplacian
        self.identity = sparse.identity(laplacian.shape[0], format='csc')
        self.shift = None
        self.lu = None

    def apply(self, rhs, omega):
        shift = max(omega, SHIFT_FLOOR)
        if self.shift is None or abs(shift - self.shift) > REFACTOR_CHANGE * self.shift:
            self.shift = shift
            self.lu = splu((shift * self.identity - self.laplacian).tocsc())
        return self.lu.solve(rhs)


def minimize_energy_at_mass(m, cfg=None, seed_width=3.0, townes=None):
    """
    Minimize E over radial functions with M(u) = m.

    The step is not the explicit u − τE′(u): the projected gradient
    E′(u) + ω_k u is first multiplied by (c − Δ)⁻¹ with c = max(ω_k, 0.02),
    a Sobolev gradient that lets τ stay O(1) on fine grids. Stationary points
    are the same, so the limit still solves −Δu − u³ + u⁵ + ωu = 0.

    Args:
        m (float): Target mass, above the Townes mass.
        cfg (FlowConfig): Flow settings.
        seed_width (float): Width of the Gaussian seed.
        townes (float): Townes mass, computed when omitted.

    Returns:
        MinimizerResult: Converged minimizer with its multiplier.

    Raises:
        MassBelowThreshold: If m ≤ townes_mass.
        ConvergenceError: If backtracking cannot lower the energy or the step budget runs out.
    """
    cfg = cfg or FlowConfig()
    townes = townes if townes is not None else townes_mass()
    if m <= townes:
        raise MassBelowThreshold(
            "Energy minimizers exist only above the Townes mass", mass=m, townes_mass=townes,
        )
    if m < (1.0 + NEAR_THRESHOLD) * townes:
        logger.warning("Mass %.6g is within 1%% of the Townes mass, expect slow convergence", m)

    grid = cfg.grid
    laplacian = radial_laplacian_matrix(grid, dim=2)
    precondition = _Preconditioner(laplacian)

    u = gaussian_seed(m, grid, seed_width)
    energy = report(RadialProfile(grid, u)).energy
    energies = [energy]
    tau = cfg.time_step
    residual = np.inf
    omega = 0.0

    for step in range(1, cfg.max_steps + 1):
        gradient = energy_gradient(u, laplacian)
        omega = multiplier_of(u, gradient, grid)
        projected = gradient + omega * u
        residual = float(np.max(np.abs(projected)))
        if residual <= cfg.stationarity_tolerance:
            break
        direction = precondition.apply(projected, omega)

        for _ in range(cfg.max_backtracks):
            trial = _normalize(u - tau * direction, grid, m)
            trial_energy = report(RadialProfile(grid, trial)).energy
            if trial_energy <= energy + ENERGY_SLACK * abs(energy):
                break
            tau *= 0.5
        else:
            raise ConvergenceError(
                "Energy did not decrease after step-size backtracking",
                mass=m, step=step, energy=energy, time_step=tau, residual=residual,
            )
        u, energy = trial, trial_energy
        energies.append(energy)
        tau = min(2.0 * tau, cfg.time_step)
        if step % 500 == 0:
            logger.debug("flow step %d E=%.14g omega=%.10g residual=%.3e", step, energy, omega, residual)
    else:
        raise ConvergenceError(
            "Gradient flow did not reach stationarity",
            mass=m, steps=cfg.max_steps, residual=residual,
        )

    steps = len(energies) - 1
    logger.info(
        "Minimized at m=%.8g: E=%.12g omega=%.10g after %d steps", m, energy, omega, steps
    )
    return MinimizerResult(
        profile=RadialProfile(grid, u),
        mass=float(m),
        energy=float(energy),
        multiplier=float(omega),
        steps=steps,
        residual=residual,
        seed_width=float(seed_width),
        energies=energies,
    )


def euler_lagrange_residual(result):
    """Max norm of −Δu − u³ + u⁵ + ωu with the reported multiplier."""
    grid = result.profile.grid
    values = result.profile.values
    gradient = energy_gradient(values, radial_laplacian_matrix(grid, dim=2))
    return float(np.max(np.abs(gradient + result.multiplier * values)))


def verify_negative_energy_by_scaling(m, u, max_halvings=60):
    """
    Find λ ∈ (0, 1] with E(λu(λ·)) < 0.

    The rescaling preserves mass and gives
    E(u_λ) = λ²[½∫|∇u|² − ¼∫u⁴ + (λ²/6)∫u⁶], negative for small λ whenever
    ∫|∇u|² − ½∫u⁴ < 0.

    Args:
        m (float): Mass of ``u``.
        u (RadialProfile): Profile to rescale.
        max_halvings (int): λ is scanned over 1, ½, ¼, ...

    Returns:
        tuple: (λ, E(u_λ)).

    Raises:
        DomainError: If M(u) differs from m or the quadratic part is not negative.
    """
    rep = report(u)
    if abs(rep.mass - m) > 1e-8 * m:
        raise DomainError("Profile mass does not match m", mass=m, profile_mass=rep.mass)
    quadratic = rep.grad_norm_sq - 0.5 * rep.l4_pow4
    if quadratic >= 0.0:
        raise DomainError(
            "Scaling cannot make the energy negative: ∫|∇u|² − ½∫u⁴ ≥ 0",
            quadratic_form=quadratic,
        )
    lam = 1.0
    for _ in range(max_halvings + 1):
        energy = report(scale_profile(u, lam, lam)).energy
        if energy < 0.0:
            return lam, energy
        lam *= 0.5
    raise DomainError("No negative-energy rescaling found", smallest_lambda=lam)


@dataclass(frozen=True)
class BranchMatch:
    """Minimizer against the shooting ground state of the same mass."""
    omega: float
    profile_distance: float
    multiplier_gap: float
    energy_gap: float

    def as_dict(self):
        return {
            'omega': self.omega,
            'profile_distance': self.profile_distance,
            'multiplier_gap': self.multiplier_gap,
            'energy_gap': self.energy_gap,
        }


def compare_to_branch(result, table, cfg=None):
    """
    Compare a minimizer with P_ω for the ω whose ground state has mass m.

    Radial profiles are centered at the origin, so no translation alignment
    is needed.

    Args:
        result (MinimizerResult): Converged minimizer.
        table (BranchTable): Branch bracketing the mass.
        cfg (ShootingConfig): Solver settings for the inversion.

    Returns:
        BranchMatch: Sup-norm distance, multiplier and energy gaps.
    """
    record = invert_mass_to_ground_state(result.mass, table, cfg or ShootingConfig())
    shooting = record.profile.evaluate(result.profile.nodes)
    match = BranchMatch(
        omega=float(record.omega),
        profile_distance=float(np.max(np.abs(result.profile.values - shooting))),
        multiplier_gap=float(abs(result.multiplier - record.omega)),
        energy_gap=float(abs(result.energy - record.energy)),
    )
    logger.info("Minimizer vs branch at m=%.8g: %s", result.mass, match)
    return match
