"""
Shared base for the toolkit's management commands: common flags,
verbosity-to-logging mapping and exit codes.

Exit codes:
    0   success
    1   validation failure (bad input files, empty series, failed trials)
    2   degenerate data (zero total balance, nothing to cluster)
    64  usage error (bad flag, unknown option or theorem)
"""
import argparse
import logging
import sys

from django.core.management.base import BaseCommand, CommandError

from governance.dialects import ONCHAIN_TALLY_STYLE, OFFCHAIN_SNAPSHOT_STYLE, combine_exports
from governance.exceptions import (
    DegenerateDistributionError,
    EmptySeriesError,
    ParameterError,
    ValidationFailure,
    VbeError,
)
from governance.ingestion import load_dataset
from pipeline.reports import write_bytes

from .config import CliConfig

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_DEGENERATE = 2
EXIT_USAGE = 64

APP_LOGGERS = ('governance', 'metrics', 'clustering', 'pipeline', 'theory_lab', 'cli')
VERBOSITY_LEVELS = {0: logging.ERROR, 1: logging.WARNING, 2: logging.INFO, 3: logging.DEBUG}


def exit_code_for(error: VbeError) -> int:
    # EmptyInputError is both a validation failure and degenerate; validation wins
    if isinstance(error, ValidationFailure):
        return EXIT_VALIDATION
    if isinstance(error, DegenerateDistributionError):
        return EXIT_DEGENERATE
    if isinstance(error, EmptySeriesError):
        return EXIT_VALIDATION
    if isinstance(error, ParameterError):
        return EXIT_USAGE
    return EXIT_VALIDATION


def add_dataset_arguments(parser) -> None:
    parser.add_argument('--votes', help='Votes CSV (proposal_id, voter, choice[, voting_power, timestamp])')
    parser.add_argument('--balances', help='Balances CSV (address, balance)')
    parser.add_argument(
        '--proposals', help='Proposals CSV (proposal_id, ordinal[, title, round_tag, arity, allocation])',
    )
    parser.add_argument('--offchain-export', help='Snapshot-style JSON export (replaces --votes/--proposals)')
    parser.add_argument('--onchain-export', help='Tally-style JSON export (replaces --votes/--proposals)')


def add_pipeline_arguments(parser) -> None:
    parser.add_argument('--window', type=int, help='Elections per window (default 10)')
    parser.add_argument('--stride', type=int, help='Elections between window starts (default 10)')
    parser.add_argument('--k', type=int, help='Number of k-means clusters (default 3)')
    parser.add_argument('--seed', type=int, help='Random seed (default 42)')
    parser.add_argument('--measures', help="Comma-separated entropy measures, e.g. 'min_entropy,shannon,renyi:2'")
    parser.add_argument('--distance', help='Distance function: euclidean or cosine')
    parser.add_argument(
        '--include-inactive', action=argparse.BooleanOptionalAction, default=None,
        help='Count non-voting holders as one inactive bloc (default on)',
    )
    parser.add_argument('--weight-source', help='static_balances or ballot_voting_power')
    parser.add_argument(
        '--normalize', action=argparse.BooleanOptionalAction, default=None,
        help='Divide entropies by log2 of the bloc count',
    )
    parser.add_argument(
        '--lenient', action=argparse.BooleanOptionalAction, default=None,
        help='Zero-fill voters missing from balances instead of failing',
    )
    parser.add_argument('--workers', type=int, help='Threads used to evaluate windows (default 1)')


def add_output_arguments(parser) -> None:
    parser.add_argument('--out', help='Write the report here instead of standard output')
    parser.add_argument('--format', choices=('json', 'csv'), help='Report format (default json)')
    parser.add_argument('--config', help='Optional key=value file with default option values')


def load_input_dataset(config: CliConfig):
    """
    Load the dataset named by the flags: the three CSV files, or platform
    exports (off-chain first, then on-chain) plus --balances.

    Returns:
        (Dataset, ValidationReport)
    """
    sources = ((config.offchain_export, OFFCHAIN_SNAPSHOT_STYLE), (config.onchain_export, ONCHAIN_TALLY_STYLE))
    exports = [(path, dialect) for path, dialect in sources if path is not None]
    if not exports:
        config.require('votes', 'balances', 'proposals')
        return load_dataset(config.votes, config.balances, config.proposals, lenient=config.lenient)
    if config.votes is not None or config.proposals is not None:
        raise ParameterError("Use either --votes/--proposals or platform exports, not both")
    config.require('balances')
    return combine_exports(exports, config.balances, lenient=config.lenient)


class VbeBaseCommand(BaseCommand):
    """
    Subclasses implement ``run(config, **options)`` and let toolkit
    errors propagate; they are turned into CommandError with the
    matching exit code.
    """

    def create_parser(self, prog_name, subcommand, **kwargs):
        parser = super().create_parser(prog_name, subcommand, **kwargs)

        def usage_error(message):
            if parser.called_from_command_line:
                parser.print_usage(sys.stderr)
                parser.exit(EXIT_USAGE, f"{parser.prog}: error: {message}\n")
            raise CommandError(f"Error: {message}", returncode=EXIT_USAGE)

        parser.error = usage_error
        return parser

    def configure_logging(self, verbosity: int) -> None:
        level = VERBOSITY_LEVELS.get(verbosity, logging.DEBUG)
        for name in APP_LOGGERS:
            logging.getLogger(name).setLevel(level)

    def handle(self, *args, **options):
        self.configure_logging(options['verbosity'])
        try:
            config = CliConfig.resolve(self.command_name(), options)
            # the --config path is already folded into config
            rest = {key: value for key, value in options.items() if key != 'config'}
            self.run(config, *args, **rest)
        except VbeError as e:
            logger.debug("%s failed", self.command_name(), exc_info=True)
            raise CommandError(str(e), returncode=exit_code_for(e)) from e

    def command_name(self) -> str:
        return self.__module__.rsplit('.', 1)[-1]

    def run(self, config: CliConfig, *args, **options):
        raise NotImplementedError('subclasses of VbeBaseCommand must provide a run() method')

    def emit(self, data: bytes, config: CliConfig, summary: str) -> None:
        """Write report bytes to --out (and a summary line) or to standard output."""
        if config.out is None:
            self.stdout.write(data.decode('utf-8'), ending='')
            return
        write_bytes(config.out, data)
        self.stdout.write(self.style.SUCCESS(summary))
