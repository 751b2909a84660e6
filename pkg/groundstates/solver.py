"""
Ground states of the cubic-quintic scalar-field equation and of the cubic
equation, in one and two dimensions.

Shooting brackets the center value and yields a trusted trajectory; a
Newton polish on the 4th-order grid operator turns it into a profile that
solves the discrete equation to roundoff. Near ω → 3/16 the plateau is
too long to shoot through, and the solve continues in ω from a resolvable
anchor instead.
"""
import logging
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy import optimize

from core.exceptions import ConvergenceError, StructuralError
from functionals.engine import FunctionalReport, alpha_of, report
from quadrature.grid import RadialGrid, RadialProfile, kernel_ratio

from .newton import polish
from .physics import (
    Nonlinearity, check_window, default_r_max, front_radius, shooting_bracket,
)
from .shooting import bisect_center_value, shoot
from .tail import attach_far_field

logger = logging.getLogger(__name__)

CUBIC_QUINTIC = 'cubic_quintic'
CUBIC = 'cubic'

CONTINUATION_ANCHOR = 0.175
CONTINUATION_STEP = 2.0
MIN_CONTINUATION_STEP = 0.125
MONOTONE_SLACK = 8.0 * np.finfo(float).eps


@dataclass(frozen=True)
class ShootingConfig:
    """
    Solver settings.

    Attributes:
        ode_tolerance (float): Local relative error per integrator step.
        bisection_tolerance (float): Target width of the bracket on u(0).
        r_max (float): Truncation radius, None picks one from ω.
        n (int): Grid node count, odd.
        max_bisections (int): Shot budget, at least 40.
        newton_max_iter (int): Newton step budget of the polish.
    """
    ode_tolerance: float = 1e-12
    bisection_tolerance: float = 1e-12
    r_max: float = None
    n: int = 8193
    max_bisections: int = 60
    newton_max_iter: int = 40

    def __post_init__(self):
        if self.ode_tolerance <= 0 or self.bisection_tolerance <= 0:
            raise StructuralError(
                "Solver tolerances must be positive",
                ode_tolerance=self.ode_tolerance,
                bisection_tolerance=self.bisection_tolerance,
            )
        if self.max_bisections < 40:
            raise StructuralError("max_bisections must be at least 40", max_bisections=self.max_bisections)
        if self.n < 9 or self.n % 2 == 0:
            raise StructuralError("Grid node count must be odd and at least 9", n=self.n)
        if self.r_max is not None and self.r_max <= 0:
            raise StructuralError("r_max must be positive", r_max=self.r_max)

    def grid_for(self, nl, dim=2):
        return RadialGrid(self.r_max or default_r_max(nl, dim), self.n)

    def refined(self):
        """Same settings on a grid with half the spacing."""
        return ShootingConfig(
            ode_tolerance=self.ode_tolerance,
            bisection_tolerance=self.bisection_tolerance,
            r_max=self.r_max,
            n=2 * self.n - 1,
            max_bisections=self.max_bisections,
            newton_max_iter=self.newton_max_iter,
        )


@dataclass
class GroundStateRecord:
    """
    A solved ground state.

    Attributes:
        profile (RadialProfile): Samples with fitted far field.
        omega (float): Frequency, 1 for the cubic ground state.
        center_value (float): Shooting value a* = u(0), or u(0) after continuation.
        kind (str): 'cubic_quintic' or 'cubic'.
        alpha (float): ⅔β(profile).
        norms (FunctionalReport): Functionals of the profile.
        solver_iters (int): Shots, Newton steps and continuation steps taken.
        bracket_width (float): Width of the final bracket on a*.
        diagnostics (dict): Method, residuals and fit data.
    """
    profile: RadialProfile
    omega: float
    center_value: float
    kind: str
    alpha: float
    norms: FunctionalReport
    solver_iters: int
    bracket_width: float
    diagnostics: dict = field(default_factory=dict)

    @property
    def mass(self):
        return self.norms.mass

    @property
    def energy(self):
        return self.norms.energy


def _kernel(dim):
    def ratio(x, x_ref):
        return kernel_ratio(x_ref, x, dim)
    return ratio


def classify_amplitude(a, omega, cfg=None, dim=2):
    """
    Shoot once from u(0) = a and report 'overshoot' or 'undershoot'.
    """
    cfg = cfg or ShootingConfig()
    check_window(omega)
    nl = Nonlinearity(omega)
    return shoot(a, nl, dim, cfg.grid_for(nl, dim).r_max, cfg.ode_tolerance).outcome


def is_positive_decreasing(values):
    """u > 0 everywhere and non-increasing up to 8 ulp of u(0), the plateau noise level."""
    values = np.asarray(values, dtype=float)
    slack = MONOTONE_SLACK * abs(values[0])
    return bool(np.all(values > 0.0) and np.all(np.diff(values) <= slack))


def _finish(values, grid, nl, dim, kind, center_value, iters, width, diagnostics):
    profile = attach_far_field(RadialProfile(grid, values, dim=dim), nl.omega)
    norms = report(profile)
    diagnostics['decay_rate'] = profile.decay_rate
    diagnostics['prefactor_exponent'] = profile.prefactor_exponent
    if not is_positive_decreasing(values):
        logger.warning("Profile at omega=%.6g is not positive and non-increasing", nl.omega)
    if kind == CUBIC_QUINTIC and dim == 2 and abs(norms.pohozaev_residual) > 1e-5:
        logger.warning(
            "Pohozaev residual %.3e at omega=%.6g", norms.pohozaev_residual, nl.omega
        )
    return GroundStateRecord(
        profile=profile,
        omega=nl.omega,
        center_value=float(center_value),
        kind=kind,
        alpha=alpha_of(norms),
        norms=norms,
        solver_iters=int(iters),
        bracket_width=float(width),
        diagnostics=diagnostics,
    )


def _direct(nl, cfg, dim, kind, bracket=None):
    grid = cfg.grid_for(nl, dim)
    bracket = bracket or shooting_bracket(nl, dim)
    result = bisect_center_value(
        nl, grid, dim, bracket,
        tolerance=cfg.bisection_tolerance,
        max_bisections=cfg.max_bisections,
        rtol=cfg.ode_tolerance,
        kernel=_kernel(dim),
    )
    if not result.tail_reached:
        raise ConvergenceError(
            "Bracketing shots separate before the decay corridor",
            omega=nl.omega, bracket=[result.lower, result.upper],
            trust_radius=result.trust_radius,
        )
    values, newton_iters, residual = polish(
        result.guess, grid, nl, dim, cfg.ode_tolerance, cfg.newton_max_iter
    )
    diagnostics = {
        'method': 'shooting',
        'bisections': result.iterations,
        'newton_iters': newton_iters,
        'trust_radius': result.trust_radius,
        'ode_residual': residual,
        'bracket': [result.lower, result.upper],
    }
    logger.info(
        "Solved %s ground state omega=%.6g dim=%d a*=%.15g in %d shots",
        kind, nl.omega, dim, result.center_value, result.iterations,
    )
    return _finish(
        values, grid, nl, dim, kind, result.center_value,
        result.iterations + newton_iters, result.width, diagnostics,
    )


def _continue(omega, cfg, dim):
    """
    Walk from the anchor frequency to ``omega``, shifting the front outward
    by the growth of the estimated plateau radius at every step.
    """
    anchor = _direct(Nonlinearity(CONTINUATION_ANCHOR), cfg, dim, CUBIC_QUINTIC)
    target = Nonlinearity(omega)
    grid = cfg.grid_for(target, dim)
    profile = anchor.profile
    current = CONTINUATION_ANCHOR
    radius_target = front_radius(omega)
    step = CONTINUATION_STEP
    steps = 0
    newton_total = 0

    while current < omega:
        radius_now = front_radius(current)
        radius_next = min(radius_now + step, radius_target)
        if radius_next >= radius_target:
            following = omega
        else:
            following = optimize.brentq(
                lambda w: front_radius(w) - radius_next, current, omega, xtol=1e-15
            )
        shift = front_radius(following) - radius_now
        guess = profile.evaluate(np.maximum(grid.nodes - shift, 0.0))
        nl = Nonlinearity(following)
        try:
            values, newton_iters, residual = polish(
                guess, grid, nl, dim, cfg.ode_tolerance, cfg.newton_max_iter
            )
        except ConvergenceError:
            if step <= MIN_CONTINUATION_STEP:
                raise ConvergenceError(
                    "Continuation toward the flat-top limit stalled",
                    omega=omega, reached=current, step=step,
                )
            step *= 0.5
            logger.warning("Continuation step halved to %.4f at omega=%.8g", step, current)
            continue
        steps += 1
        newton_total += newton_iters
        profile = attach_far_field(RadialProfile(grid, values, dim=dim), following)
        current = following
        logger.debug("continuation omega=%.10g R=%.3f residual=%.2e", current, radius_next, residual)

    diagnostics = {
        'method': 'continuation',
        'anchor_omega': CONTINUATION_ANCHOR,
        'anchor_center_value': anchor.center_value,
        'continuation_steps': steps,
        'newton_iters': newton_total,
        'ode_residual': residual,
    }
    logger.info("Solved flat-top ground state omega=%.6g by %d continuation steps", omega, steps)
    return _finish(
        profile.values, grid, target, dim, CUBIC_QUINTIC, profile.values[0],
        anchor.solver_iters + steps + newton_total, anchor.bracket_width, diagnostics,
    )


def solve_ground_state(omega, cfg=None, dim=2, bracket=None):
    """
    Solve the cubic-quintic scalar-field equation in one or two dimensions.

    Args:
        omega (float): Frequency in (0, 3/16).
        cfg (ShootingConfig): Solver settings.
        dim (int): 2 for the plane, 1 for the line.
        bracket (tuple): Optional initial (too small, too large) center values.

    Returns:
        GroundStateRecord: Converged record.

    Raises:
        FrequencyOutOfWindow: If ω is outside (0, 3/16).
        ConvergenceError: If shooting or the polish fails.
    """
    check_window(omega)
    cfg = cfg or ShootingConfig()
    if dim not in (1, 2):
        raise StructuralError("Only dimensions 1 and 2 are supported", dim=dim)
    if dim == 2 and omega > CONTINUATION_ANCHOR and bracket is None:
        return _continue(omega, cfg, dim)
    return _direct(Nonlinearity(omega), cfg, dim, CUBIC_QUINTIC, bracket)


def solve_scalar_field(omega, cfg=None, bracket=None):
    """
    Planar ground state P_ω of −Δu + ωu − u³ + u⁵ = 0.

    Args:
        omega (float): Frequency in (0, 3/16).
        cfg (ShootingConfig): Solver settings.
        bracket (tuple): Optional initial bracket on u(0).

    Returns:
        GroundStateRecord: Positive, decreasing profile with its norms.
    """
    return solve_ground_state(omega, cfg, dim=2, bracket=bracket)


def solve_scalar_field_1d(omega, cfg=None):
    """Ground state of the same equation on the line, sampled on [0, x_max]."""
    return solve_ground_state(omega, cfg, dim=1).profile


def solve_cubic_ground_state(cfg=None):
    """
    Ground state q of −Δq + q − q³ = 0 in the plane.

    Returns:
        GroundStateRecord: Record with kind 'cubic'; its mass is the Townes mass.
    """
    cfg = cfg or ShootingConfig()
    return _direct(Nonlinearity(1.0, quintic=False), cfg, 2, CUBIC)


@lru_cache(maxsize=8)
def townes_mass(cfg=None):
    """∫q² dx of the cubic ground state, cached per configuration."""
    return solve_cubic_ground_state(cfg).mass

