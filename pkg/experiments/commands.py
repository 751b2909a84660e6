"""
Shared behaviour of the lab management commands.

A command resolves its config, runs, writes its result files and records an
ExperimentRun. Lab errors are written to stderr as JSON and end the process
with the error's exit code.
"""
import json
import logging

from django.conf import settings
from django.core.management.base import BaseCommand
from django.utils import timezone

from core.exceptions import LabError
from groundstates.solver import ShootingConfig

from .config import resolve_config
from .models import ExperimentRun
from .output import output_directory, plain

logger = logging.getLogger(__name__)

SHOOTING_KEYS = ('ode_tolerance', 'bisection_tolerance', 'r_max', 'n', 'max_bisections', 'newton_max_iter')


def shooting_config(config):
    return ShootingConfig(**{key: config[key] for key in SHOOTING_KEYS})


class LabCommand(BaseCommand):
    """
    Base class for solve, scan, invert, minimize, simulate and verify.

    Subclasses set ``name``, declare flags in ``add_command_arguments`` and
    implement ``run(config, out_dir)`` returning a summary dict.
    """
    name = None
    option_keys = ()

    def add_arguments(self, parser):
        parser.add_argument('--config', help='key=value or JSON config file')
        parser.add_argument('--output-dir', dest='output_dir', help='Directory for result files')
        parser.add_argument('--n', type=int, help='Radial grid node count (odd)')
        parser.add_argument('--r-max', dest='r_max', type=float, help='Radial truncation radius')
        parser.add_argument('--ode-tolerance', dest='ode_tolerance', type=float)
        parser.add_argument('--bisection-tolerance', dest='bisection_tolerance', type=float)
        self.add_command_arguments(parser)

    def add_command_arguments(self, parser):
        pass

    def overrides(self, options):
        keys = ('output_dir', 'n', 'r_max', 'ode_tolerance', 'bisection_tolerance') + tuple(self.option_keys)
        return {key: options.get(key) for key in keys}

    def handle(self, *args, **options):
        run = ExperimentRun(command=self.name, status='failed', schema_version=settings.LAB_SCHEMA_VERSION)
        try:
            config = resolve_config(self.name, options.get('config'), self.overrides(options))
            run.config = plain(config)
            out_dir = output_directory(self.name, config.get('output_dir'))
            run.output_dir = str(out_dir)
            summary = self.run(config, out_dir)
        except LabError as exc:
            self.fail(run, exc)
        except Exception as exc:
            logger.exception("%s crashed", self.name)
            self.fail(run, LabError(str(exc) or exc.__class__.__name__, type=exc.__class__.__name__))
        run.status = 'succeeded'
        run.exit_code = 0
        run.summary = plain(summary)
        run.finished_at = timezone.now()
        run.save()
        self.stdout.write(self.style.SUCCESS(f'{self.name} finished, results in {run.output_dir}'))

    def fail(self, run, exc):
        """Record the failed run, write the error JSON to stderr and exit."""
        run.exit_code = exc.exit_code
        run.error_kind = exc.kind
        run.error_message = exc.message
        run.finished_at = timezone.now()
        run.save()
        self.stderr.write(json.dumps(plain(exc.as_dict()), sort_keys=True))
        raise SystemExit(exc.exit_code)

    def run(self, config, out_dir):
        raise NotImplementedError
