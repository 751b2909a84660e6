import json
from pathlib import Path

from branches.scanner import BranchTable, default_omega_grid, invert_mass_to_ground_state, scan_branch
from core.exceptions import StructuralError
from experiments.commands import LabCommand, shooting_config
from experiments.output import write_json


class Command(LabCommand):
    help = 'Find the frequency whose ground state has the given mass'
    name = 'invert'
    option_keys = ('mass', 'tolerance', 'table', 'points', 'workers')

    def add_command_arguments(self, parser):
        parser.add_argument('--mass', type=float, help='Target mass, above the Townes mass')
        parser.add_argument('--tolerance', type=float, help='Relative mass tolerance')
        parser.add_argument('--table', help='branch.json written by scan; scans afresh when omitted')
        parser.add_argument('--points', type=int, help='Points of the fresh scan')
        parser.add_argument('--workers', type=int)

    def load_table(self, config, cfg):
        if config['table']:
            path = Path(config['table'])
            if not path.is_file():
                raise StructuralError("Branch table not found", path=str(path))
            return BranchTable.from_dict(json.loads(path.read_text())['result'])
        grid = default_omega_grid(config['points'], config['omega_min'], config['omega_max'],
                                  config['spacing'])
        return scan_branch(grid, cfg, workers=config['workers'])

    def run(self, config, out_dir):
        cfg = shooting_config(config)
        table = self.load_table(config, cfg)
        record = invert_mass_to_ground_state(config['mass'], table, cfg, config['tolerance'])
        payload = {
            'mass': config['mass'],
            'omega': record.omega,
            'reached_mass': record.mass,
            'round_trip_residual': abs(record.mass - config['mass']) / config['mass'],
            'townes_mass': table.townes_mass,
            'center_value': record.center_value,
            'energy': record.energy,
            'alpha': record.alpha,
        }
        write_json(out_dir / 'inversion.json', payload, config)
        self.stdout.write(f"mass {config['mass']:.10g} -> omega {record.omega:.14g}")
        return payload
