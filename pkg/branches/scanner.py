"""
The ground-state branch ω ↦ (M, E, α, C_α) and the properties it must have.
"""
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, asdict
from itertools import repeat

import numpy as np
from django.conf import settings
from scipy import optimize

from core.exceptions import (
    ConvergenceError, DomainError, LabError, MassBelowThreshold, NumericError, StructuralError,
)
from functionals.engine import c_alpha, f_alpha
from groundstates.physics import OMEGA_MAX, SCAN_MAX, SCAN_MIN
from groundstates.solver import ShootingConfig, solve_scalar_field, townes_mass
from quadrature.grid import RadialProfile, half_max_radius

logger = logging.getLogger(__name__)

CSV_COLUMNS = ('omega', 'mass', 'energy', 'alpha', 'c_alpha', 'pohozaev_residual')
MIN_POINTS = 10
HAMILTONIAN_FLOOR = 1e-14


@dataclass(frozen=True)
class BranchRow:
    omega: float
    mass: float
    energy: float
    alpha: float
    c_alpha: float
    pohozaev_residual: float
    grad_norm_sq: float

    @classmethod
    def from_record(cls, record):
        norms = record.norms
        return cls(
            omega=record.omega,
            mass=norms.mass,
            energy=norms.energy,
            alpha=record.alpha,
            c_alpha=c_alpha(norms, record.alpha),
            pohozaev_residual=norms.pohozaev_residual,
            grad_norm_sq=norms.grad_norm_sq,
        )

    def csv_values(self):
        return [getattr(self, name) for name in CSV_COLUMNS]


@dataclass
class BranchTable:
    """
    Sampled ground-state branch.

    Attributes:
        rows (list[BranchRow]): One row per frequency, sorted by omega.
        omega_grid (ndarray): The scanned frequencies.
        townes_mass (float): Mass of the cubic ground state.
        records (list): Solved records, empty when the table was built from data.
    """
    rows: list
    omega_grid: np.ndarray
    townes_mass: float
    records: list = field(default_factory=list, repr=False)

    def column(self, name):
        return np.array([getattr(row, name) for row in self.rows], dtype=float)

    @property
    def mass_strictly_increasing(self):
        return bool(np.all(np.diff(self.column('mass')) > 0.0))

    @classmethod
    def from_dict(cls, data):
        """Rebuild a table written by :meth:`as_dict`; solved records are not restored."""
        rows = [BranchRow(**row) for row in data['rows']]
        return cls(
            rows=rows,
            omega_grid=np.array([row.omega for row in rows]),
            townes_mass=float(data['townes_mass']),
        )

    def as_dict(self):
        return {
            'townes_mass': self.townes_mass,
            'omega_grid': [float(w) for w in self.omega_grid],
            'mass_strictly_increasing': self.mass_strictly_increasing,
            'rows': [asdict(row) for row in self.rows],
        }


@dataclass
class AlphaMonotonicityReport:
    """
    Pairwise check of the norm inequalities along the α-sorted branch.

    Margins are ratio/bound − 1; positive means the inequality holds.
    """
    worst_margin: float
    worst_gradient_margin: float
    worst_mass_margin: float
    pairs_checked: int
    pairs_skipped: int
    alpha_increasing_in_omega: bool
    violations: list = field(default_factory=list)

    @property
    def holds(self):
        return self.worst_margin > 0.0

    def as_dict(self):
        data = asdict(self)
        data['holds'] = self.holds
        return data


def default_omega_grid(points=30, lower=SCAN_MIN, upper=SCAN_MAX, spacing='log'):
    """Frequencies for a scan, log-spaced by default."""
    if spacing == 'log':
        return np.geomspace(lower, upper, points)
    return np.linspace(lower, upper, points)


def validate_omega_grid(omega_grid):
    omegas = np.asarray(omega_grid, dtype=float)
    if omegas.ndim != 1 or omegas.size < MIN_POINTS:
        raise StructuralError(
            f"A branch scan needs at least {MIN_POINTS} frequencies", points=int(omegas.size)
        )
    if np.any(np.diff(omegas) <= 0.0):
        raise StructuralError("Frequencies must be strictly increasing")
    tol = 1e-12
    if omegas[0] < SCAN_MIN - tol or omegas[-1] > SCAN_MAX + tol:
        raise DomainError(
            "Scan frequencies must lie in [0.005, 0.18]",
            lowest=float(omegas[0]), highest=float(omegas[-1]),
        )
    return omegas


def _solve_row(omega, cfg):
    try:
        return solve_scalar_field(float(omega), cfg)
    except LabError as exc:
        exc.context.setdefault('failing_omega', float(omega))
        raise


def scan_branch(omega_grid, cfg=None, workers=None, townes=None):
    """
    Solve one ground state per frequency and tabulate the branch.

    Args:
        omega_grid (array_like): Strictly increasing frequencies in [0.005, 0.18].
        cfg (ShootingConfig): Solver settings.
        workers (int): Process count, defaults to settings.LAB_SCAN_WORKERS.
        townes (float): Townes mass, computed when omitted.

    Returns:
        BranchTable: Rows in frequency order.

    Raises:
        StructuralError: For fewer than 10 or unsorted frequencies.
        DomainError: For frequencies outside the scan range.
        LabError: The first failing solve, with ``failing_omega`` in its context.
    """
    omegas = validate_omega_grid(omega_grid)
    cfg = cfg or ShootingConfig()
    workers = workers or getattr(settings, 'LAB_SCAN_WORKERS', 1)
    logger.info("Scanning %d frequencies with %d worker(s)", omegas.size, workers)

    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            records = list(pool.map(_solve_row, omegas, repeat(cfg)))
    else:
        records = [_solve_row(omega, cfg) for omega in omegas]

    table = BranchTable(
        rows=[BranchRow.from_record(record) for record in records],
        omega_grid=omegas,
        townes_mass=townes if townes is not None else townes_mass(),
        records=records,
    )
    if not table.mass_strictly_increasing:
        logger.warning("Mass column is not strictly increasing on the scanned grid")
    return table


def hamiltonian_residuals(table):
    """
    Relative residual of dE/dω + (ω/2)dM/dω at the interior rows.

    Derivatives are second-order differences on the (possibly non-uniform)
    frequency grid.

    Returns:
        tuple: (interior frequencies, residuals).
    """
    if len(table.rows) < 3:
        raise StructuralError("The Hamiltonian relation needs at least 3 rows", rows=len(table.rows))
    omegas = table.column('omega')
    dE = np.gradient(table.column('energy'), omegas)
    dM = np.gradient(table.column('mass'), omegas)
    half = 0.5 * omegas * dM
    residual = np.abs(dE + half) / (np.abs(dE) + np.abs(half) + HAMILTONIAN_FLOOR)
    return omegas[1:-1], residual[1:-1]


def check_hamiltonian_relation(table):
    """
    Largest relative residual of dE/dω = −(ω/2)dM/dω over the interior rows.
    """
    _, residual = hamiltonian_residuals(table)
    return float(residual.max())


def check_alpha_monotonicity(table):
    """
    Check the gradient-norm and mass inequalities for adjacent α pairs.

    For ν < α: ‖∇Q_α‖²/‖∇Q_ν‖² > α(1+ν)/(ν(1+α)) and ‖Q_α‖²/‖Q_ν‖² > (1+α)/(1+ν).
    A non-increasing ω ↦ α is reported, not raised.

    Returns:
        AlphaMonotonicityReport: Worst margins and the violating pairs.
    """
    alphas = table.column('alpha')
    alpha_increasing = bool(np.all(np.diff(alphas) > 0.0))
    if not alpha_increasing:
        logger.warning("alpha is not increasing along the frequency grid")

    order = np.argsort(alphas, kind='stable')
    alphas = alphas[order]
    grads = table.column('grad_norm_sq')[order]
    masses = table.column('mass')[order]
    omegas = table.column('omega')[order]

    worst_grad = worst_mass = np.inf
    checked = skipped = 0
    violations = []
    for i in range(len(alphas) - 1):
        nu, alpha = alphas[i], alphas[i + 1]
        if alpha - nu <= 1e-14 * abs(alpha):
            skipped += 1
            continue
        checked += 1
        grad_margin = (grads[i + 1] / grads[i]) / (alpha * (1.0 + nu) / (nu * (1.0 + alpha))) - 1.0
        mass_margin = (masses[i + 1] / masses[i]) / ((1.0 + alpha) / (1.0 + nu)) - 1.0
        worst_grad = min(worst_grad, grad_margin)
        worst_mass = min(worst_mass, mass_margin)
        if grad_margin <= 0.0 or mass_margin <= 0.0:
            violations.append({
                'omega_pair': [float(omegas[i]), float(omegas[i + 1])],
                'alpha_pair': [float(nu), float(alpha)],
                'gradient_margin': float(grad_margin),
                'mass_margin': float(mass_margin),
            })
    if checked == 0:
        worst_grad = worst_mass = 0.0
    return AlphaMonotonicityReport(
        worst_margin=float(min(worst_grad, worst_mass)),
        worst_gradient_margin=float(worst_grad),
        worst_mass_margin=float(worst_mass),
        pairs_checked=checked,
        pairs_skipped=skipped,
        alpha_increasing_in_omega=alpha_increasing,
        violations=violations,
    )


def mass_gap_check(table):
    """Smallest M(P_ω) − townes_mass over the table; positive on a valid branch."""
    return float(np.min(table.column('mass') - table.townes_mass))


def _require_monotone_mass(table):
    if not table.mass_strictly_increasing:
        raise NumericError(
            "Mass is not strictly increasing along the table, refusing to invert",
            kind='non_monotone_branch',
            masses=[float(m) for m in table.column('mass')],
        )


def invert_mass_to_ground_state(m, table, cfg=None, tolerance=1e-9, max_extensions=8):
    """
    Find the ground state whose mass is ``m``.

    The table supplies the initial frequency bracket; masses beyond the
    table extend the bracket toward 3/16 (or toward 0) a bounded number of
    times. Brent's method then runs on fresh solves.

    Args:
        m (float): Target mass, above the Townes mass.
        table (BranchTable): Branch with strictly increasing masses.
        cfg (ShootingConfig): Solver settings.
        tolerance (float): Relative mass tolerance.
        max_extensions (int): Bracket extensions allowed.

    Returns:
        GroundStateRecord: Record with |M − m| ≤ tolerance·m.

    Raises:
        MassBelowThreshold: If m ≤ townes_mass, where no normalized solution exists.
        NumericError: If the table mass is not strictly increasing.
        DomainError: If the bracket cannot be extended far enough.
        ConvergenceError: If the final mass misses the tolerance.
    """
    if m <= table.townes_mass:
        raise MassBelowThreshold(
            "No ground state has mass at or below the Townes mass",
            mass=m, townes_mass=table.townes_mass,
        )
    _require_monotone_mass(table)
    cfg = cfg or ShootingConfig()
    omegas = table.column('omega')
    masses = table.column('mass')
    solves = {}

    def mass_gap(omega):
        if omega not in solves:
            solves[omega] = solve_scalar_field(float(omega), cfg)
        return solves[omega].mass - m

    idx = int(np.searchsorted(masses, m))
    if 0 < idx < len(masses):
        lower, upper = float(omegas[idx - 1]), float(omegas[idx])
    elif idx == 0:
        upper, lower = float(omegas[0]), float(omegas[0])
        for _ in range(max_extensions):
            lower *= 0.5
            if mass_gap(lower) < 0.0:
                break
        else:
            raise DomainError("Mass lies below the reach of the extended bracket", mass=m, lowest=lower)
    else:
        lower, upper = float(omegas[-1]), float(omegas[-1])
        for _ in range(max_extensions):
            upper += 0.5 * (OMEGA_MAX - upper)
            if mass_gap(upper) > 0.0:
                break
        else:
            raise DomainError("Mass lies beyond the reach of the extended bracket", mass=m, highest=upper)

    omega = optimize.brentq(
        mass_gap, lower, upper, xtol=1e-15, rtol=4.0 * np.finfo(float).eps, maxiter=200
    )
    record = solves.get(omega) or solve_scalar_field(float(omega), cfg)
    if abs(record.mass - m) > tolerance * m:
        raise ConvergenceError(
            "Mass inversion missed the tolerance",
            mass=m, reached=record.mass, omega=omega,
        )
    logger.info("Mass %.10g maps to omega=%.12g after %d solves", m, omega, len(solves))
    return record


def invert_mass_to_frequency(m, table, cfg=None, tolerance=1e-9):
    """
    The unique ω in (0, 3/16) with M(P_ω) = m.

    See :func:`invert_mass_to_ground_state` for arguments and errors.
    """
    return invert_mass_to_ground_state(m, table, cfg, tolerance).omega


def frequency_for_alpha(alpha, table, cfg=None, tolerance=1e-9):
    """
    Ground state whose ⅔β equals ``alpha``.

    Args:
        alpha (float): Target α within the table's α range.
        table (BranchTable): Branch with α increasing in ω.
        cfg (ShootingConfig): Solver settings.
        tolerance (float): Relative tolerance on α.

    Returns:
        GroundStateRecord: The identified Q_α = P_ω.

    Raises:
        DomainError: If α lies outside the table's α range or α is not monotone.
    """
    alphas = table.column('alpha')
    omegas = table.column('omega')
    if not np.all(np.diff(alphas) > 0.0):
        raise DomainError("alpha is not increasing along the table")
    if not (alphas[0] <= alpha <= alphas[-1]):
        raise DomainError(
            "alpha lies outside the tabulated range",
            alpha=alpha, range=[float(alphas[0]), float(alphas[-1])],
        )
    cfg = cfg or ShootingConfig()
    solves = {}

    def alpha_gap(omega):
        if omega not in solves:
            solves[omega] = solve_scalar_field(float(omega), cfg)
        return solves[omega].alpha - alpha

    idx = int(np.searchsorted(alphas, alpha))
    lower = float(omegas[max(idx - 1, 0)])
    upper = float(omegas[min(idx, len(omegas) - 1)])
    if lower == upper:
        omega = lower
    else:
        omega = optimize.brentq(alpha_gap, lower, upper, xtol=1e-15, rtol=4.0 * np.finfo(float).eps)
    record = solves.get(omega) or solve_scalar_field(float(omega), cfg)
    if abs(record.alpha - alpha) > tolerance * alpha:
        raise ConvergenceError("alpha inversion missed the tolerance", alpha=alpha, reached=record.alpha)
    return record


def trial_profiles(record, count, seed=0):
    """
    Random positive radial trial functions on the record's grid.

    Each trial is a sum of two Gaussians with random widths and weights.
    """
    rng = np.random.default_rng(seed)
    grid = record.profile.grid
    r = grid.nodes
    scale = max(half_max_radius(record.profile), 4.0 * grid.spacing)
    for _ in range(count):
        widths = scale * rng.uniform(0.4, 3.0, size=2)
        weights = rng.uniform(0.2, 1.0, size=2)
        values = sum(w * np.exp(-(r / s) ** 2) for w, s in zip(weights, widths))
        yield RadialProfile(grid, values)


def minimality_margin(record, trials=100, seed=0):
    """
    Smallest relative excess F_α(v)/F_α(Q_α) − 1 over random trial functions.

    Positive when the ground state beats every trial.
    """
    reference = f_alpha(record.norms, record.alpha)
    worst = np.inf
    for trial in trial_profiles(record, trials, seed):
        worst = min(worst, f_alpha(trial, record.alpha) / reference - 1.0)
    return float(worst)
