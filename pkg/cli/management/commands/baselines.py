from cli.base import VbeBaseCommand, add_output_arguments
from governance.exceptions import ParameterError
from governance.ingestion import load_balances_csv
from pipeline.baselines import baselines
from pipeline.config import parse_measures
from pipeline.reports import render_json


class Command(VbeBaseCommand):
    help = 'Report Gini, Nakamoto coefficient and trivial-clustering VBE for a balances file'

    def add_arguments(self, parser):
        parser.add_argument('--balances', help='Balances CSV (address, balance)')
        parser.add_argument('--measures', help="Comma-separated entropy measures (default 'min_entropy,shannon')")
        parser.add_argument('--threshold', type=float, default=0.5, help='Nakamoto share threshold (default 0.5)')
        add_output_arguments(parser)

    def run(self, config, *args, **options):
        config.require('balances')
        if config.fmt != 'json':
            raise ParameterError("baselines only writes json")
        tokens = load_balances_csv(config.balances)
        measures = parse_measures(config.overrides.get('measures', 'min_entropy,shannon'))
        report = baselines(tokens, measures, threshold=options['threshold'])
        payload = {'threshold': options['threshold'], **report.to_dict()}
        self.emit(render_json(payload), config, f"Wrote baselines for {report.accounts} account(s) to {config.out}")
