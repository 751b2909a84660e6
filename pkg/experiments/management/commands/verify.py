from core.exceptions import LabError
from experiments.commands import LabCommand, shooting_config
from experiments.output import write_csv, write_json
from experiments.verification import CHECK_COLUMNS, run_verification


class Command(LabCommand):
    help = 'Run the cross-module identity suite and write a pass/fail table'
    name = 'verify'
    option_keys = ('quick', 'seed', 'hamiltonian_tolerance')

    def add_command_arguments(self, parser):
        parser.add_argument('--quick', action='store_const', const=True,
                            help='10-point branch and small grids')
        parser.add_argument('--seed', type=int)
        parser.add_argument('--hamiltonian-tolerance', dest='hamiltonian_tolerance', type=float)

    def run(self, config, out_dir):
        report = run_verification(
            quick=config['quick'], cfg=shooting_config(config), seed=config['seed'],
            hamiltonian_tolerance=config['hamiltonian_tolerance'],
        )
        write_csv(out_dir / 'verification.csv', CHECK_COLUMNS,
                  (check.row() for check in report.checks), config)
        write_json(out_dir / 'verification.json', report.as_dict(), config)
        for check in report.checks:
            style = self.style.SUCCESS if check.passed else self.style.ERROR
            self.stdout.write(style(
                f"{check.name:<32} {check.value:>12.3e} {check.tolerance:>10.1e} "
                f"{'pass' if check.passed else 'FAIL'} ({check.severity})"
            ))
        if not report.passed:
            raise LabError(
                "Verification failed",
                kind='verification_failed',
                aborted_at=report.aborted_at,
                failed=[check.name for check in report.checks if not check.passed],
            )
        return {'mode': report.mode, 'checks': len(report.checks), 'passed': report.passed}
