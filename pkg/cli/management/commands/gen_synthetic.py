from django.conf import settings

from cli.base import VbeBaseCommand
from governance.ingestion import write_dataset_csv
from theory_lab.collapse import consensus_collapse_dataset, gen_consensus_collapse_pair


class Command(VbeBaseCommand):
    help = 'Write a synthetic factional dataset (votes, balances, proposals CSV) for the pipeline'

    def add_arguments(self, parser):
        parser.add_argument('--out', help='Directory for votes.csv, balances.csv and proposals.csv')
        parser.add_argument('--seed', type=int, help='Random seed (default 42)')
        parser.add_argument('--players', type=int, default=90, help='Number of voters (default 90)')
        parser.add_argument('--elections', type=int, default=20, help='Elections per round (default 20)')
        parser.add_argument('--factions', type=int, default=3, help='Equal factions in round one (default 3)')
        parser.add_argument('--loyalty', type=float, default=0.9,
                            help='Probability a voter follows its faction (default 0.9)')
        parser.add_argument('--balance', type=float, default=100.0, help='Balance of every voter (default 100)')
        parser.add_argument(
            '--collapse-strength', type=float,
            help='Also write an on-chain round where dissent falls in line with this probability',
        )
        parser.add_argument('--config', help='Optional key=value file with default option values')

    def run(self, config, *args, **options):
        config.require('out')
        seed = int(config.overrides.get('seed', settings.VBE_PIPELINE_DEFAULTS['seed']))
        shape = {
            'n_players': options['players'],
            'm_elections': options['elections'],
            'factions': options['factions'],
            'loyalty': options['loyalty'],
            'balance': options['balance'],
        }
        strength = options['collapse_strength']
        if strength is None:
            dataset, _ = gen_consensus_collapse_pair(seed, collapse_strength=0.0, **shape)
        else:
            dataset = consensus_collapse_dataset(seed, collapse_strength=strength, **shape)

        write_dataset_csv(dataset, config.out)
        self.stdout.write(self.style.SUCCESS(
            f"Wrote {len(dataset.proposals)} proposal(s) and {len(dataset.votes)} vote(s) to {config.out}"
        ))
