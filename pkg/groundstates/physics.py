"""
Closed-form facts about the radial equation u'' + (d-1)u'/r = ωu − u³ + u⁵.
"""
from dataclasses import dataclass

import numpy as np

from core.exceptions import FrequencyOutOfWindow

OMEGA_MAX = 3.0 / 16.0
SCAN_MIN = 0.005
SCAN_MAX = 0.18

# ∫ u'² dr of the planar front at ω = 3/16
FRONT_ACTION = 0.140625 / np.sqrt(3.0)


def check_window(omega):
    """
    Raise FrequencyOutOfWindow unless 0 < ω < 3/16.
    """
    if not (0.0 < omega < OMEGA_MAX):
        raise FrequencyOutOfWindow(
            f"omega={omega} lies outside the ground-state window (0, 3/16)",
            omega=omega, window=[0.0, OMEGA_MAX],
        )


@dataclass(frozen=True)
class Nonlinearity:
    """
    Right-hand side g(u) of the radial equation.

    Attributes:
        omega (float): Frequency.
        quintic (bool): Include the defocusing u⁵ term; False gives the cubic
            ground-state equation −Δq + q − q³ = 0 when omega = 1.
    """
    omega: float
    quintic: bool = True

    def force(self, u):
        g = self.omega * u - u ** 3
        if self.quintic:
            g = g + u ** 5
        return g

    def force_prime(self, u):
        dg = self.omega - 3.0 * u ** 2
        if self.quintic:
            dg = dg + 5.0 * u ** 4
        return dg

    def primitive(self, u):
        """G(u) = ∫₀ᵘ g."""
        G = 0.5 * self.omega * u ** 2 - 0.25 * u ** 4
        if self.quintic:
            G = G + u ** 6 / 6.0
        return G

    @property
    def decay(self):
        return float(np.sqrt(self.omega))


def energy_threshold(omega):
    """Smallest a with G(a) ≤ 0, the lowest admissible center value."""
    return float(np.sqrt((3.0 - np.sqrt(9.0 - 48.0 * omega)) / 4.0))


def force_roots(omega):
    """Center values where ωa − a³ + a⁵ changes sign, as (a₋, a₊)."""
    disc = np.sqrt(1.0 - 4.0 * omega)
    return float(np.sqrt((1.0 - disc) / 2.0)), float(np.sqrt((1.0 + disc) / 2.0))


def front_radius(omega):
    """
    Estimated plateau radius of P_ω.

    Balances the potential drop at the plateau value against the front
    action, R ≈ σ / V(a₊); grows like (3/16 − ω)⁻¹.
    """
    _, a_plus = force_roots(omega)
    drop = -Nonlinearity(omega).primitive(a_plus)
    return float(FRONT_ACTION / drop)


def shooting_bracket(nl, dim=2):
    """
    Initial bracket (too small, too large) on the center value.

    Between the two ends the force g(a) is negative, so the shot starts
    moving toward zero.
    """
    if not nl.quintic:
        return float(np.sqrt(2.0 * nl.omega)), 6.0 * nl.decay
    a_minus, a_plus = force_roots(nl.omega)
    zeta = energy_threshold(nl.omega)
    if dim == 1:
        # in 1D the ground state sits exactly on the energy threshold
        return 0.5 * (a_minus + zeta), a_plus
    return zeta, a_plus


def default_r_max(nl, dim=2):
    """Truncation radius leaving 40 e-foldings of decay after the plateau."""
    r_max = 40.0 / nl.decay
    if nl.quintic:
        r_max += 2.0 * front_radius(nl.omega)
    return r_max


def closed_form_1d(omega, x):
    """
    Exact even ground state of −φ'' + ωφ − φ³ + φ⁵ = 0 on the line.

    Args:
        omega (float): Frequency in (0, 3/16).
        x (array_like): Points.

    Returns:
        ndarray | float: φ(x) = 2√(ω / (1 + √(1 − 16ω/3)·cosh(2√ω x))).

    Raises:
        FrequencyOutOfWindow: If ω is outside (0, 3/16).
    """
    check_window(omega)
    x = np.asarray(x, dtype=float)
    arg = np.minimum(2.0 * np.sqrt(omega) * np.abs(x), 700.0)
    value = 2.0 * np.sqrt(omega / (1.0 + np.sqrt(1.0 - 16.0 * omega / 3.0) * np.cosh(arg)))
    return float(value) if value.ndim == 0 else value
