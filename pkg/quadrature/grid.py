"""
Radial grids, area-weighted quadrature and finite differences.

Every integral over the plane of a radial integrand is reduced here to
a composite-Simpson sum of f(r)·2πr on a uniform grid starting at r = 0.
"""
import logging
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate, interpolate, sparse, special

from core.exceptions import StructuralError, NumericError

logger = logging.getLogger(__name__)

# 4th-order stencils, scaled by 1/(12h) and 1/(12h^2)
FIRST_CENTRAL = np.array([1.0, -8.0, 0.0, 8.0, -1.0]) / 12.0
SECOND_CENTRAL = np.array([-1.0, 16.0, -30.0, 16.0, -1.0]) / 12.0
FIRST_EDGE = (
    np.array([-25.0, 48.0, -36.0, 16.0, -3.0]) / 12.0,
    np.array([-3.0, -10.0, 18.0, -6.0, 1.0]) / 12.0,
)


@dataclass(frozen=True)
class RadialGrid:
    """
    Uniform grid on [0, r_max].

    Attributes:
        r_max (float): Truncation radius.
        n (int): Number of nodes, odd and at least 9.
    """
    r_max: float
    n: int
    nodes: np.ndarray = field(init=False, repr=False, compare=False, hash=False)

    def __post_init__(self):
        if self.n < 9 or self.n % 2 == 0:
            raise StructuralError(
                "Radial grid needs an odd node count of at least 9",
                n=self.n,
            )
        if not np.isfinite(self.r_max) or self.r_max <= 0:
            raise StructuralError("Radial grid needs a positive r_max", r_max=self.r_max)
        nodes = np.linspace(0.0, float(self.r_max), int(self.n))
        nodes.setflags(write=False)
        object.__setattr__(self, 'nodes', nodes)

    @property
    def spacing(self):
        return self.r_max / (self.n - 1)

    def scaled(self, factor):
        """Grid with the same node count and r_max divided by ``factor``."""
        return RadialGrid(self.r_max / factor, self.n)


@dataclass(eq=False)
class RadialProfile:
    """
    Samples of a radial function u(r) on a RadialGrid.

    Attributes:
        grid (RadialGrid): Sampling grid.
        values (ndarray): u(r_i), finite at every node.
        decay_rate (float): Fitted exponential decay rate, 0 if unfitted.
        dim (int): 2 for planar profiles, 1 for profiles on the half line.
        tail_amplitude (float): Amplitude A of the far field A·K(κ r), 0 if none.
        tail_rate (float): κ used by the far field.
        prefactor_exponent (float): Fitted p in u ~ r^(-p) e^(-κ r), None if unfitted.
    """
    grid: RadialGrid
    values: np.ndarray
    decay_rate: float = 0.0
    dim: int = 2
    tail_amplitude: float = 0.0
    tail_rate: float = 0.0
    prefactor_exponent: float = None

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.shape != self.grid.nodes.shape:
            raise StructuralError(
                "Profile samples do not match the grid",
                samples=len(self.values), nodes=self.grid.n,
            )
        if not np.all(np.isfinite(self.values)):
            raise NumericError("Profile contains non-finite samples")

    @property
    def nodes(self):
        return self.grid.nodes

    def with_values(self, values, **changes):
        """Copy of the profile carrying new samples."""
        attrs = {
            'decay_rate': self.decay_rate,
            'dim': self.dim,
            'tail_amplitude': self.tail_amplitude,
            'tail_rate': self.tail_rate,
            'prefactor_exponent': self.prefactor_exponent,
        }
        attrs.update(changes)
        return RadialProfile(self.grid, values, **attrs)

    def far_field(self, r):
        """Evaluate the fitted far field A·K(κ r) at radii r."""
        r = np.asarray(r, dtype=float)
        if self.tail_amplitude == 0.0 or self.tail_rate == 0.0:
            return np.zeros_like(r)
        return self.tail_amplitude * decay_kernel(self.tail_rate * r, self.dim)

    def evaluate(self, r):
        """
        Evaluate the profile at arbitrary radii.

        Inside [0, r_max] a cubic spline with u'(0) = 0 is used; beyond r_max
        the fitted far field is returned (0 when no tail has been fitted).

        Args:
            r (array_like): Radii, negative values are reflected.

        Returns:
            ndarray: Interpolated samples with the shape of ``r``.
        """
        r = np.abs(np.asarray(r, dtype=float))
        spline = interpolate.CubicSpline(
            self.grid.nodes, self.values, bc_type=((1, 0.0), 'not-a-knot')
        )
        inside = r <= self.grid.r_max
        out = np.empty_like(r)
        out[inside] = spline(r[inside])
        out[~inside] = self.far_field(r[~inside])
        return out


def decay_kernel(x, dim=2):
    """
    Decaying solution of the linearized radial equation, K0 in 2D.

    Args:
        x (array_like): κ·r, positive.
        dim (int): 2 for K0(x), 1 for e^(-x).
    """
    x = np.asarray(x, dtype=float)
    if dim == 1:
        return np.exp(-x)
    return special.k0e(x) * np.exp(-x)


def kernel_ratio(x_from, x_to, dim=2):
    """K(x_to)/K(x_from) without underflow."""
    if dim == 1:
        return np.exp(-(x_to - x_from))
    return special.k0e(x_to) / special.k0e(x_from) * np.exp(-(x_to - x_from))


def _check_samples(f, grid):
    f = np.asarray(f)
    if f.shape != grid.nodes.shape:
        raise StructuralError(
            "Sample count does not match the grid",
            samples=f.shape[0] if f.ndim else 0, nodes=grid.n,
        )
    if not np.all(np.isfinite(f)):
        raise NumericError("Integrand contains non-finite samples")
    return f


def integrate_radial(f, grid):
    """
    Integrate a radial function over the disk of radius r_max.

    Args:
        f (array_like): Samples f(r_i).
        grid (RadialGrid): Sampling grid.

    Returns:
        float: Composite-Simpson approximation of ∫ f(r)·2πr dr.

    Raises:
        StructuralError: If the sample count differs from the node count.
        NumericError: If a sample is not finite.
    """
    f = _check_samples(f, grid)
    return float(integrate.simpson(f * 2.0 * np.pi * grid.nodes, dx=grid.spacing))


def integrate_line(f, grid):
    """Composite-Simpson approximation of ∫ f(r) dr on [0, r_max]."""
    f = _check_samples(f, grid)
    return float(integrate.simpson(f, dx=grid.spacing))


def integrate_profile(f, grid, dim=2):
    """Area integral for dim 2, the integral over the whole line for an even 1D profile."""
    if dim == 1:
        return 2.0 * integrate_line(f, grid)
    return integrate_radial(f, grid)


def first_derivative(values, h):
    """
    4th-order first derivative of uniformly spaced samples.

    Central differences in the interior, one-sided stencils at both ends.
    """
    u = np.asarray(values, dtype=float)
    n = u.shape[0]
    if n < 5:
        raise StructuralError("Need at least 5 samples to differentiate", n=n)
    du = np.empty_like(u)
    du[2:-2] = (FIRST_CENTRAL[0] * u[:-4] + FIRST_CENTRAL[1] * u[1:-3]
                + FIRST_CENTRAL[3] * u[3:-1] + FIRST_CENTRAL[4] * u[4:])
    du[0] = FIRST_EDGE[0] @ u[:5]
    du[1] = FIRST_EDGE[1] @ u[:5]
    du[-1] = -(FIRST_EDGE[0] @ u[::-1][:5])
    du[-2] = -(FIRST_EDGE[1] @ u[::-1][:5])
    return du / h


def differentiate(u, pin_origin=True):
    """
    Radial derivative du/dr of a profile.

    Args:
        u (RadialProfile): Profile to differentiate.
        pin_origin (bool): Return exactly 0 at r = 0, as radial symmetry requires.

    Returns:
        ndarray: Derivative samples on the profile grid.

    Raises:
        StructuralError: If the grid has fewer than 5 nodes.
    """
    du = first_derivative(u.values, u.grid.spacing)
    if pin_origin:
        du[0] = 0.0
    return du


def radial_laplacian_matrix(grid, dim=2, far_ratios=(0.0, 0.0)):
    """
    Sparse 4th-order matrix of u'' + (dim-1)u'/r on the grid.

    Values beyond the origin are mirrored (even profiles). The two nodes
    past r_max are written as ``far_ratios[k]·u[n-1]``; zeros give a
    homogeneous far boundary.

    Args:
        grid (RadialGrid): Sampling grid.
        dim (int): 1 or 2.
        far_ratios (tuple): Ghost values at r_max+h and r_max+2h relative to u[n-1].

    Returns:
        scipy.sparse.csc_matrix: n×n operator.
    """
    n, h = grid.n, grid.spacing
    r = grid.nodes
    rows = np.repeat(np.arange(n), 5)
    offsets = np.tile(np.arange(-2, 3), n)
    cols = rows + offsets

    second = np.tile(SECOND_CENTRAL, n) / h ** 2
    first = np.tile(FIRST_CENTRAL, n) / h
    coef = second.copy()
    if dim == 2:
        inv_r = np.zeros(n)
        inv_r[1:] = 1.0 / r[1:]
        coef += first * np.repeat(inv_r, 5)
        # u'/r -> u''(0) at the origin
        coef[:5] = 2.0 * second[:5]

    cols = np.abs(cols)
    past = cols >= n
    ghost = cols[past] - n
    coef[past] = coef[past] * np.asarray(far_ratios, dtype=float)[ghost]
    cols[past] = n - 1
    return sparse.coo_matrix((coef, (rows, cols)), shape=(n, n)).tocsc()


def radial_laplacian(values, grid, dim=2, far_ratios=(0.0, 0.0)):
    """Apply :func:`radial_laplacian_matrix` to samples."""
    return radial_laplacian_matrix(grid, dim, far_ratios) @ np.asarray(values, dtype=float)


def half_max_radius(profile):
    """Radius where the profile first drops below half its peak."""
    values = np.abs(profile.values)
    peak = values.max()
    if peak == 0.0:
        return 0.0
    below = np.nonzero(values < 0.5 * peak)[0]
    if below.size == 0:
        return profile.grid.r_max
    i = below[0]
    if i == 0:
        return 0.0
    r = profile.grid.nodes
    # linear interpolation between the bracketing nodes
    v0, v1 = values[i - 1], values[i]
    return float(r[i - 1] + (v0 - 0.5 * peak) / (v0 - v1) * (r[i] - r[i - 1]))
