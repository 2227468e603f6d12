from cli.base import VbeBaseCommand, add_output_arguments
from clustering.ballots import cluster_ballots
from governance.core import TokenMap
from governance.exceptions import ParameterError
from governance.ingestion import load_ballots_csv
from metrics.entropy import vbe
from pipeline.reports import render_json


class Command(VbeBaseCommand):
    help = 'Cluster allocation ballots and report VBE with one unit of weight per ballot'

    def add_arguments(self, parser):
        parser.add_argument('--ballots', help='Ballots CSV (voter, project, amount)')
        parser.add_argument('--k', type=int, help='Number of clusters (default 3)')
        parser.add_argument('--seed', type=int, help='Random seed (default 42)')
        parser.add_argument('--distance', help='Distance function: euclidean or cosine')
        parser.add_argument('--measures', help="Comma-separated entropy measures (default 'min_entropy,shannon')")
        add_output_arguments(parser)

    def run(self, config, *args, **options):
        config.require('ballots')
        if config.fmt != 'json':
            raise ParameterError("cluster_ballots only writes json")
        pipeline = config.pipeline_config()
        measures = pipeline.measures

        ballots = load_ballots_csv(config.ballots)
        outcome = cluster_ballots(ballots, pipeline.clustering, pipeline.distance)
        weights = TokenMap({voter: 1.0 for voter in ballots.voters})
        reports = {m.column: vbe(outcome.partition, weights, m) for m in measures}

        payload = {
            'config': {
                'k': pipeline.clustering.k,
                'seed': pipeline.clustering.seed,
                'distance': str(pipeline.distance.value),
                'measures': [str(m) for m in measures],
            },
            'ballots': len(ballots.voters),
            'projects': list(ballots.projects),
            'effective_k': outcome.effective_k,
            'inertia': float(outcome.inertia),
            'cluster_sizes': list(outcome.cluster_sizes),
            'vbe': {column: report.vbe_value for column, report in reports.items()},
            'largest_bloc_share': max(report.largest_bloc_share for report in reports.values()),
        }
        self.emit(render_json(payload), config, f"Clustered {len(ballots.voters)} ballot(s) into {config.out}")
