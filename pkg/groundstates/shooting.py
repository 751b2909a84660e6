"""
Bisection on the center value of the radial equation.

A shot integrates u'' = g(u) − (d−1)u'/r outward with an embedded
Runge-Kutta pair. It ends either by crossing zero (center value too
large) or by turning upward while still positive (too small).
"""
import logging
from dataclasses import dataclass

import numpy as np
from scipy.integrate import solve_ivp

from core.exceptions import ConvergenceError

logger = logging.getLogger(__name__)

OVERSHOOT = 'overshoot'
UNDERSHOOT = 'undershoot'
UNDECIDED = 'undecided'

SERIES_START = 1e-3
TRUST_AGREEMENT = 1e-3
TAIL_FRACTION = 0.05


@dataclass
class Shot:
    amplitude: float
    outcome: str
    solution: object
    r_end: float


@dataclass
class BisectionResult:
    """
    Outcome of a bisection on the center value.

    Attributes:
        center_value (float): Midpoint of the final bracket.
        lower (float): Final undershooting amplitude.
        upper (float): Final overshooting amplitude.
        iterations (int): Shots taken.
        guess (ndarray): Trusted trajectory on the grid, far field beyond.
        trust_radius (float): Last radius where both bracketing shots agree.
        tail_reached (bool): Whether the trusted part reaches the decay corridor.
    """
    center_value: float
    lower: float
    upper: float
    iterations: int
    guess: np.ndarray
    trust_radius: float
    tail_reached: bool

    @property
    def width(self):
        return self.upper - self.lower


def series_start(a, nl, dim, r0):
    """Taylor start (u, u') at r0 for a shot from u(0) = a, u'(0) = 0."""
    g = nl.force(a)
    dg = nl.force_prime(a)
    if dim == 1:
        c2, c4 = g / 2.0, dg * g / 24.0
    else:
        c2, c4 = g / 4.0, dg * g / 64.0
    return np.array([a + c2 * r0 ** 2 + c4 * r0 ** 4, 2.0 * c2 * r0 + 4.0 * c4 * r0 ** 3])


def shoot(a, nl, dim, r_end, rtol):
    """
    Integrate one shot and classify it.

    Args:
        a (float): Center value.
        nl (Nonlinearity): Right-hand side.
        dim (int): 1 or 2.
        r_end (float): Horizon.
        rtol (float): Local relative tolerance of the integrator.

    Returns:
        Shot: Outcome, dense solution and the radius where the shot stopped.
    """
    friction = float(dim - 1)
    omega, quintic = nl.omega, nl.quintic

    def rhs(r, y):
        u, v = y
        g = omega * u - u * u * u
        if quintic:
            g += u ** 5
        return [v, g - friction * v / r]

    def crossed_zero(r, y):
        return y[0]
    crossed_zero.terminal = True
    crossed_zero.direction = -1

    def turned_upward(r, y):
        return y[1]
    turned_upward.terminal = True
    turned_upward.direction = 1

    r0 = SERIES_START
    sol = solve_ivp(
        rhs, (r0, r_end), series_start(a, nl, dim, r0),
        method='DOP853', rtol=rtol, atol=rtol * 1e-3,
        events=(crossed_zero, turned_upward), dense_output=True,
    )
    if sol.t_events[0].size:
        outcome = OVERSHOOT
    elif sol.t_events[1].size:
        outcome = UNDERSHOOT
    else:
        outcome = UNDECIDED
    return Shot(amplitude=a, outcome=outcome, solution=sol.sol, r_end=float(sol.t[-1]))


def _trusted_guess(lo, hi, grid, nl, dim, kernel):
    """
    Midpoint trajectory where the bracketing shots agree, far field beyond.
    """
    r = grid.nodes
    a_mid = 0.5 * (lo.amplitude + hi.amplitude)
    reach = min(lo.r_end, hi.r_end)
    inside = (r >= SERIES_START) & (r <= reach)
    idx = np.nonzero(inside)[0]
    if idx.size == 0:
        return np.full_like(r, a_mid), 0.0, False
    u_lo = lo.solution(r[idx])[0]
    u_hi = hi.solution(r[idx])[0]
    u_mid = 0.5 * (u_lo + u_hi)
    apart = np.abs(u_hi - u_lo) > TRUST_AGREEMENT * np.abs(u_mid)
    stop = np.argmax(apart) if apart.any() else idx.size
    stop = max(stop, 1)
    last = idx[stop - 1]

    guess = np.empty_like(r)
    guess[:idx[0]] = a_mid
    guess[idx[:stop]] = u_mid[:stop]
    r_trust = r[last]
    u_trust = max(u_mid[stop - 1], 0.0)
    beyond = r > r_trust
    guess[beyond] = u_trust * kernel(nl.decay * r[beyond], nl.decay * r_trust)
    tail_reached = u_trust <= TAIL_FRACTION * a_mid
    return guess, float(r_trust), bool(tail_reached)


def bisect_center_value(nl, grid, dim, bracket, tolerance, max_bisections, rtol, kernel):
    """
    Bisect the center value until the bracket is narrower than ``tolerance``.

    Bisection continues past the tolerance, up to float resolution, while
    the two bracketing shots have not yet agreed into the decay corridor.

    Args:
        nl (Nonlinearity): Right-hand side.
        grid (RadialGrid): Grid the guess is sampled on.
        dim (int): 1 or 2.
        bracket (tuple): (too small, too large) center values.
        tolerance (float): Target bracket width.
        max_bisections (int): Maximum number of shots.
        rtol (float): Integrator tolerance.
        kernel (callable): kernel(x, x_ref) = K(x)/K(x_ref) for the far field.

    Returns:
        BisectionResult: Final bracket and Newton guess.

    Raises:
        ConvergenceError: If no dichotomy appears or the bracket stays too wide.
    """
    lower, upper = bracket
    low_shot = high_shot = None
    iterations = 0
    guess, r_trust, tail_reached = None, 0.0, False

    while iterations < max_bisections:
        middle = 0.5 * (lower + upper)
        if middle <= lower or middle >= upper:
            break
        iterations += 1
        shot = shoot(middle, nl, dim, grid.r_max, rtol)
        logger.debug("shot a=%.17g outcome=%s r_end=%.3f", middle, shot.outcome, shot.r_end)
        if shot.outcome == OVERSHOOT:
            upper, high_shot = middle, shot
        elif shot.outcome == UNDERSHOOT:
            lower, low_shot = middle, shot
        else:
            # reached the horizon without deciding, both sides collapse here
            lower = upper = middle
            low_shot = high_shot = shot
            break
        if upper - lower <= tolerance and low_shot and high_shot:
            guess, r_trust, tail_reached = _trusted_guess(low_shot, high_shot, grid, nl, dim, kernel)
            if tail_reached:
                break

    if low_shot is None or high_shot is None:
        raise ConvergenceError(
            "Shooting produced no dichotomy inside the bracket",
            omega=nl.omega, bracket=[lower, upper], iterations=iterations,
        )
    if upper - lower > tolerance:
        raise ConvergenceError(
            "Bisection did not reach the requested bracket width",
            omega=nl.omega, bracket=[lower, upper], iterations=iterations,
        )
    if guess is None or not tail_reached:
        guess, r_trust, tail_reached = _trusted_guess(low_shot, high_shot, grid, nl, dim, kernel)

    return BisectionResult(
        center_value=0.5 * (lower + upper),
        lower=lower,
        upper=upper,
        iterations=iterations,
        guess=guess,
        trust_radius=r_trust,
        tail_reached=tail_reached,
    )
