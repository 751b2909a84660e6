from propagation.experiments import TRACE_COLUMNS, run_scattering_experiment, run_stability_experiment
from experiments.commands import LabCommand, shooting_config
from experiments.output import write_csv, write_json
from django.conf import settings


class Command(LabCommand):
    help = 'Run a stability or scattering simulation of the cubic-quintic NLS'
    name = 'simulate'
    option_keys = ('experiment', 'omega', 'delta', 'fraction', 'sigma', 'T', 'dt', 'grid_points',
                   'box_length', 'v0x', 'v0y', 'seed', 'record_every', 'snapshot_every')

    def add_command_arguments(self, parser):
        parser.add_argument('--experiment', choices=['stability', 'scattering'])
        parser.add_argument('--omega', type=float)
        parser.add_argument('--delta', type=float, help='Relative H1 size of the perturbation')
        parser.add_argument('--fraction', type=float, help='Scattering mass as a fraction of Townes')
        parser.add_argument('--sigma', type=float, help='Width of the scattering Gaussian')
        parser.add_argument('--T', dest='T', type=float, help='Horizon')
        parser.add_argument('--dt', type=float)
        parser.add_argument('--grid-points', dest='grid_points', type=int, help='Points per axis')
        parser.add_argument('--box-length', dest='box_length', type=float,
                            help='Period, sized from the decay rate when omitted')
        parser.add_argument('--v0x', type=float)
        parser.add_argument('--v0y', type=float)
        parser.add_argument('--seed', type=int)
        parser.add_argument('--record-every', dest='record_every', type=int)
        parser.add_argument('--snapshot-every', dest='snapshot_every', type=int)

    def run(self, config, out_dir):
        options = {
            'record_every': config['record_every'],
            'snapshot_every': config['snapshot_every'],
            'snapshot_dir': out_dir / 'snapshots',
            'schema_version': settings.LAB_SCHEMA_VERSION,
        }
        if config['experiment'] == 'stability':
            trace = run_stability_experiment(
                config['omega'], config['delta'], config['T'], config['dt'], config['grid_points'],
                config['box_length'], (config['v0x'], config['v0y']), config['seed'],
                cfg=shooting_config(config), **options,
            )
        else:
            trace = run_scattering_experiment(
                config['fraction'], config['T'], config['dt'], config['sigma'],
                config['grid_points'], config['box_length'], **options,
            )
        write_csv(out_dir / 'trace.csv', TRACE_COLUMNS, trace.csv_rows(), config)
        write_json(out_dir / 'trace.json', trace.as_dict(), config)
        summary = {
            'experiment': config['experiment'],
            'horizon': trace.horizon,
            'aborted': trace.aborted,
            'max_mass_drift': max(trace.mass_drift),
            'max_energy_drift': max(trace.energy_drift),
        }
        if trace.orbital_distance:
            summary['initial_orbital_distance'] = trace.orbital_distance[0]
            summary['max_orbital_distance'] = max(trace.orbital_distance)
        self.stdout.write(f"{config['experiment']} run reached t={trace.horizon:.6g}")
        return summary
