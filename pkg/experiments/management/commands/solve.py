import numpy as np

from groundstates.physics import closed_form_1d
from groundstates.solver import solve_ground_state
from experiments.commands import LabCommand, shooting_config
from experiments.output import write_csv, write_json


class Command(LabCommand):
    help = 'Solve the ground state P_omega and write its record and profile'
    name = 'solve'
    option_keys = ('omega', 'one_d')

    def add_command_arguments(self, parser):
        parser.add_argument('--omega', type=float, help='Frequency in (0, 3/16)')
        parser.add_argument('--one-d', dest='one_d', action='store_const', const=True,
                            help='Solve on the line and compare with the closed form')

    def run(self, config, out_dir):
        dim = 1 if config['one_d'] else 2
        record = solve_ground_state(config['omega'], shooting_config(config), dim=dim)
        payload = {
            'omega': record.omega,
            'dim': dim,
            'kind': record.kind,
            'center_value': record.center_value,
            'alpha': record.alpha,
            'norms': record.norms.as_dict(),
            'pohozaev_residual': record.norms.pohozaev_residual,
            'solver_iters': record.solver_iters,
            'bracket_width': record.bracket_width,
            'diagnostics': record.diagnostics,
        }
        if dim == 1:
            exact = closed_form_1d(record.omega, record.profile.nodes)
            payload['closed_form_sup_error'] = float(np.max(np.abs(record.profile.values - exact)))
        write_json(out_dir / 'record.json', payload, config)
        write_csv(out_dir / 'profile.csv', ('r', 'u'),
                  zip(record.profile.nodes, record.profile.values), config)
        self.stdout.write(
            f"omega={record.omega:.6g} u(0)={record.center_value:.15g} "
            f"mass={record.mass:.12g} pohozaev={record.norms.pohozaev_residual:.2e}"
        )
        return {key: payload[key] for key in ('omega', 'center_value', 'alpha', 'pohozaev_residual')
                } | {'mass': record.mass, 'energy': record.energy}
