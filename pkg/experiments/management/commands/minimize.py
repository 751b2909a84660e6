from branches.scanner import default_omega_grid, scan_branch
from groundstates.solver import townes_mass
from minimizer.flow import FlowConfig, compare_to_branch, minimize_energy_at_mass
from quadrature.grid import RadialGrid
from experiments.commands import LabCommand, shooting_config
from experiments.output import write_csv, write_json


class Command(LabCommand):
    help = 'Minimize the energy at fixed mass by normalized gradient flow'
    name = 'minimize'
    option_keys = ('mass', 'mass_factor', 'time_step', 'max_steps', 'stationarity_tolerance',
                   'seed_width', 'compare', 'points', 'workers')

    def add_command_arguments(self, parser):
        parser.add_argument('--mass', type=float, help='Target mass')
        parser.add_argument('--mass-factor', dest='mass_factor', type=float,
                            help='Target mass as a multiple of the Townes mass')
        parser.add_argument('--time-step', dest='time_step', type=float)
        parser.add_argument('--max-steps', dest='max_steps', type=int)
        parser.add_argument('--stationarity-tolerance', dest='stationarity_tolerance', type=float)
        parser.add_argument('--seed-width', dest='seed_width', type=float)
        parser.add_argument('--compare', action='store_const', const=True,
                            help='Compare with the shooting ground state of the same mass')
        parser.add_argument('--points', type=int, help='Points of the branch used by --compare')
        parser.add_argument('--workers', type=int)

    def run(self, config, out_dir):
        cfg = shooting_config(config)
        townes = townes_mass(cfg)
        mass = config['mass'] if config['mass'] is not None else config['mass_factor'] * townes
        flow = FlowConfig(
            time_step=config['time_step'],
            max_steps=config['max_steps'],
            stationarity_tolerance=config['stationarity_tolerance'],
            grid=RadialGrid(config['flow_r_max'], config['flow_n']),
        )
        result = minimize_energy_at_mass(mass, flow, config['seed_width'], townes=townes)
        payload = result.as_dict(include_profile=False) | {'townes_mass': townes}
        if config['compare']:
            grid = default_omega_grid(config['points'], config['omega_min'], config['omega_max'],
                                      config['spacing'])
            table = scan_branch(grid, cfg, workers=config['workers'], townes=townes)
            payload['branch_match'] = compare_to_branch(result, table, cfg).as_dict()
        write_json(out_dir / 'minimizer.json', payload, config)
        write_csv(out_dir / 'minimizer_profile.csv', ('r', 'u'),
                  zip(result.profile.nodes, result.profile.values), config)
        self.stdout.write(
            f"m={mass:.10g} E={result.energy:.12g} omega={result.multiplier:.10g} steps={result.steps}"
        )
        return payload
