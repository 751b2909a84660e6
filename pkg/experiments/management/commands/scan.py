from branches.scanner import (
    CSV_COLUMNS, check_alpha_monotonicity, check_hamiltonian_relation, default_omega_grid,
    mass_gap_check, scan_branch,
)
from experiments.commands import LabCommand, shooting_config
from experiments.output import write_csv, write_json


class Command(LabCommand):
    help = 'Scan the ground-state branch and write the mass/energy/alpha table'
    name = 'scan'
    option_keys = ('points', 'omega_min', 'omega_max', 'spacing', 'workers')

    def add_command_arguments(self, parser):
        parser.add_argument('--points', type=int, help='Number of frequencies, at least 10')
        parser.add_argument('--omega-min', dest='omega_min', type=float)
        parser.add_argument('--omega-max', dest='omega_max', type=float)
        parser.add_argument('--spacing', choices=['log', 'linear'])
        parser.add_argument('--workers', type=int, help='Process pool size')

    def run(self, config, out_dir):
        grid = default_omega_grid(config['points'], config['omega_min'], config['omega_max'],
                                  config['spacing'])
        table = scan_branch(grid, shooting_config(config), workers=config['workers'])
        checks = {
            'hamiltonian_residual': check_hamiltonian_relation(table),
            'alpha_monotonicity': check_alpha_monotonicity(table).as_dict(),
            'mass_gap': mass_gap_check(table),
            'mass_strictly_increasing': table.mass_strictly_increasing,
        }
        write_csv(out_dir / 'branch.csv', CSV_COLUMNS, (row.csv_values() for row in table.rows), config)
        write_json(out_dir / 'branch.json', table.as_dict() | {'checks': checks}, config)
        self.stdout.write(
            f"{len(table.rows)} rows, townes mass {table.townes_mass:.10g}, "
            f"mass increasing: {table.mass_strictly_increasing}"
        )
        return {
            'points': len(table.rows),
            'townes_mass': table.townes_mass,
            'mass_strictly_increasing': table.mass_strictly_increasing,
            'hamiltonian_residual': checks['hamiltonian_residual'],
        }
