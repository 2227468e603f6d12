from django.conf import settings
from django.core.management.base import CommandError

from cli.base import EXIT_VALIDATION, VbeBaseCommand
from governance.exceptions import ParameterError
from pipeline.reports import render_json, validate_payload
from theory_lab.verification import THEOREMS, verify_theorem


class Command(VbeBaseCommand):
    help = f"Run seeded randomized checks of one theorem ({', '.join(THEOREMS)})"

    def add_arguments(self, parser):
        parser.add_argument('theorem', help='Theorem name')
        parser.add_argument('--trials', type=int, default=100, help='Number of random instances (default 100)')
        parser.add_argument('--seed', type=int, help='Base seed (default 42)')
        parser.add_argument('--out', help='Write the report here instead of standard output')
        parser.add_argument('--format', choices=('json',), help='Report format (json only)')
        parser.add_argument('--config', help='Optional key=value file with default option values')

    def run(self, config, *args, **options):
        if config.fmt != 'json':
            raise ParameterError("verify only writes json")
        seed = config.overrides.get('seed', settings.VBE_PIPELINE_DEFAULTS['seed'])
        report = verify_theorem(options['theorem'], options['trials'], seed=int(seed))
        payload = report.to_dict()
        validate_payload(payload, 'verification')
        self.emit(render_json(payload), config, f"{report.theorem}: {report.passes}/{report.trials} passed")
        if not report.ok:
            raise CommandError(
                f"{len(report.counterexamples)} of {report.trials} {report.theorem} trial(s) failed",
                returncode=EXIT_VALIDATION,
            )
