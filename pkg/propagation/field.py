"""
Complex fields on a periodic N×N box and the soliton embedding.
"""
import json
import logging
from dataclasses import dataclass
from functools import lru_cache
from pathlib import Path

import numpy as np
from scipy import fft, optimize

from core.exceptions import DomainError, NumericError, StructuralError
from functionals.engine import report
from quadrature.grid import decay_kernel, half_max_radius

logger = logging.getLogger(__name__)

MIN_POINTS = 64
BOUNDARY_RATIO = 1e-8
MIN_BOX_LENGTH = 64.0


@lru_cache(maxsize=16)
def periodic_axes(n, box_length):
    """Coordinate and wavenumber meshes of an n×n box, cached per geometry."""
    dx = box_length / n
    x = -0.5 * box_length + dx * np.arange(n)
    k = 2.0 * np.pi * fft.fftfreq(n, d=dx)
    X, Y = np.meshgrid(x, x, indexing='ij')
    KX, KY = np.meshgrid(k, k, indexing='ij')
    for array in (X, Y, KX, KY):
        array.setflags(write=False)
    return X, Y, KX, KY


@dataclass(eq=False)
class CartesianField:
    """
    Samples φ(x, y) on a periodic square [−L/2, L/2)².

    Attributes:
        n (int): Points per axis, a power of two, at least 64.
        box_length (float): Period L.
        values (ndarray): n×n complex samples, first index along x.
        time (float): Simulation time of the samples.
    """
    n: int
    box_length: float
    values: np.ndarray
    time: float = 0.0

    def __post_init__(self):
        if self.n < MIN_POINTS or self.n & (self.n - 1):
            raise StructuralError("Field size must be a power of two of at least 64", n=self.n)
        if self.box_length <= 0:
            raise StructuralError("Box length must be positive", box_length=self.box_length)
        self.values = np.asarray(self.values, dtype=complex)
        if self.values.shape != (self.n, self.n):
            raise StructuralError(
                "Field samples do not match the grid", shape=list(self.values.shape), n=self.n,
            )
        if not np.all(np.isfinite(self.values)):
            raise NumericError("Field contains non-finite samples", time=self.time)

    @property
    def spacing(self):
        return self.box_length / self.n

    @property
    def coordinates(self):
        """(X, Y) meshes, indexed [x, y]."""
        X, Y, _, _ = periodic_axes(self.n, self.box_length)
        return X, Y

    @property
    def wavenumbers(self):
        """(KX, KY) meshes in FFT order."""
        _, _, KX, KY = periodic_axes(self.n, self.box_length)
        return KX, KY

    def with_values(self, values, time=None):
        return CartesianField(self.n, self.box_length, values, self.time if time is None else time)

    def spectrum(self):
        return fft.fft2(self.values)


def minimum_image(X, Y, center, box_length):
    """Displacements from ``center`` wrapped into [−L/2, L/2)."""
    dx = np.mod(X - center[0] + 0.5 * box_length, box_length) - 0.5 * box_length
    dy = np.mod(Y - center[1] + 0.5 * box_length, box_length) - 0.5 * box_length
    return dx, dy


def boundary_ratio(field):
    """Largest |φ| on the box edges relative to max |φ|."""
    amplitude = np.abs(field.values)
    peak = amplitude.max()
    if peak == 0.0:
        return 0.0
    edge = max(amplitude[0, :].max(), amplitude[:, 0].max(),
               amplitude[-1, :].max(), amplitude[:, -1].max())
    return float(edge / peak)


def minimum_box_length(rec, limit=BOUNDARY_RATIO, multiple=32.0):
    """
    Smallest box, a multiple of ``multiple`` and at least 64, on which the
    centered soliton stays below ``limit`` of its peak at the edges.

    The edge amplitude is read from the fitted far field A·K0(κr) with a
    factor two of margin.
    """
    profile = rec.profile
    kappa, amplitude = profile.tail_rate, profile.tail_amplitude
    if kappa <= 0.0 or amplitude <= 0.0:
        return MIN_BOX_LENGTH
    target = np.log(0.5 * limit * float(np.max(np.abs(profile.values))) / amplitude)

    def excess(r):
        return float(np.log(decay_kernel(kappa * r, profile.dim))) - target

    low = max(half_max_radius(profile), profile.grid.spacing)
    if excess(low) <= 0.0:
        radius = low
    else:
        high = 2.0 * low
        while excess(high) > 0.0:
            high *= 2.0
        radius = optimize.brentq(excess, low, high, xtol=1e-6)
    return float(max(MIN_BOX_LENGTH, multiple * np.ceil(2.0 * radius / multiple)))


def sample_soliton(rec, x0=(0.0, 0.0), v0=(0.0, 0.0), theta0=0.0, n=512, box_length=128.0):
    """Traveling-soliton samples e^{i(θ₀ + ½v₀·(x − x₀))}P_ω(|x − x₀|) without geometry checks."""
    X, Y, _, _ = periodic_axes(n, float(box_length))
    dx, dy = minimum_image(X, Y, x0, box_length)
    amplitude = rec.profile.evaluate(np.hypot(dx, dy))
    phase = theta0 + 0.5 * (v0[0] * dx + v0[1] * dy)
    return CartesianField(n, float(box_length), amplitude * np.exp(1j * phase))


def embed_soliton(rec, x0=(0.0, 0.0), v0=(0.0, 0.0), theta0=0.0, n=512, box_length=None):
    """
    Sample a traveling soliton at t = 0 on a periodic box.

    The radial profile is interpolated in r (far field beyond r_max) at the
    minimum-image distance from ``x0`` and multiplied by
    e^{i(θ₀ + ½v₀·(x − x₀))}.

    Args:
        rec (GroundStateRecord): Converged ground state.
        x0 (tuple): Center.
        v0 (tuple): Velocity.
        theta0 (float): Phase at the center.
        n (int): Points per axis.
        box_length (float): Period, None for :func:`minimum_box_length`.

    Returns:
        CartesianField: Field at time 0.

    Raises:
        DomainError: If the soliton is wider than a quarter of the box, or its
            amplitude on the box edges exceeds 1e-8 of the peak.
    """
    if box_length is None:
        box_length = minimum_box_length(rec)
    width = 2.0 * half_max_radius(rec.profile)
    if width > 0.25 * box_length:
        raise DomainError(
            "Soliton is wider than a quarter of the box",
            full_width=width, box_length=box_length,
        )
    field = sample_soliton(rec, x0, v0, theta0, n, box_length)
    ratio = boundary_ratio(field)
    if ratio > BOUNDARY_RATIO:
        raise DomainError(
            "Soliton reaches the box edge, enlarge the box",
            omega=rec.omega, boundary_ratio=ratio, limit=BOUNDARY_RATIO,
            box_length=field.box_length, minimum_box_length=minimum_box_length(rec),
        )
    logger.debug("Embedded omega=%.6g on L=%.4g with edge ratio %.2e", rec.omega, field.box_length, ratio)
    return field


def conserved_report(field):
    """
    Mass, energy and momentum of a field.

    Returns:
        tuple: (mass, energy, (px, py)).
    """
    rep = report(field)
    return rep.mass, rep.energy, rep.momentum


def boost(field, v):
    """Multiply by e^{½i v·x}; exact on the periodic box when ½v·L is a multiple of 2π."""
    X, Y = field.coordinates
    return field.with_values(field.values * np.exp(0.5j * (v[0] * X + v[1] * Y)))


def translate(field, y):
    """Shift the field by ``y`` with a spectral phase ramp."""
    KX, KY = field.wavenumbers
    shifted = fft.ifft2(field.spectrum() * np.exp(-1j * (KX * y[0] + KY * y[1])))
    return field.with_values(shifted)


def center_of_mass(field):
    """∫x|φ|²dx / M on the box coordinates."""
    X, Y = field.coordinates
    density = np.abs(field.values) ** 2
    total = density.sum()
    return float((X * density).sum() / total), float((Y * density).sum() / total)


def variance(field):
    """∫|x|²|φ|²dx on the box coordinates."""
    X, Y = field.coordinates
    return float(field.spacing ** 2 * np.sum((X ** 2 + Y ** 2) * np.abs(field.values) ** 2))


def write_snapshot(field, path, schema_version=1):
    """
    Write the samples as little-endian complex128, row-major, with a JSON sidecar.

    Returns:
        tuple: (binary path, sidecar path).
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    field.values.astype('<c16').tofile(path)
    sidecar = path.with_suffix('.json')
    sidecar.write_text(json.dumps({
        'n': field.n,
        'L': field.box_length,
        'time': field.time,
        'schema_version': schema_version,
    }, sort_keys=True, indent=2))
    return path, sidecar


def load_snapshot(path):
    """Read a field written by :func:`write_snapshot`."""
    path = Path(path)
    meta = json.loads(path.with_suffix('.json').read_text())
    n = int(meta['n'])
    values = np.fromfile(path, dtype='<c16')
    if values.size != n * n:
        raise StructuralError("Snapshot size does not match its sidecar", samples=int(values.size), n=n)
    return CartesianField(n, float(meta['L']), values.reshape(n, n), float(meta['time']))
