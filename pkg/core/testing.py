"""
Solves shared between test cases.

Ground states and branch tables are expensive; each is computed once per
test process.
"""
from functools import lru_cache

from branches.scanner import default_omega_grid, scan_branch
from groundstates.solver import ShootingConfig, solve_cubic_ground_state, solve_ground_state, townes_mass


@lru_cache(maxsize=None)
def ground_state(omega, dim=2, n=8193):
    return solve_ground_state(omega, ShootingConfig(n=n), dim=dim)


@lru_cache(maxsize=None)
def cubic_mass(n=8193):
    return townes_mass(ShootingConfig(n=n))


@lru_cache(maxsize=None)
def branch(points=10, lower=0.005, upper=0.18, spacing='log'):
    return scan_branch(
        default_omega_grid(points, lower, upper, spacing), ShootingConfig(), workers=1,
        townes=cubic_mass(),
    )


@lru_cache(maxsize=None)
def cubic_ground_state(n=8193):
    return solve_cubic_ground_state(ShootingConfig(n=n))
