import logging

from cli.base import (
    VbeBaseCommand,
    add_dataset_arguments,
    add_output_arguments,
    add_pipeline_arguments,
    load_input_dataset,
)
from governance.choices import RoundTag
from governance.exceptions import ParameterError, ValidationFailure
from governance.ingestion import round_tags
from pipeline.reports import render_json, report_payload, validate_payload
from pipeline.rounds import compare_rounds
from pipeline.windows import window_series

logger = logging.getLogger(__name__)

ROUNDS = (('a', RoundTag.OFFCHAIN), ('b', RoundTag.ONCHAIN))


class Command(VbeBaseCommand):
    help = 'Compare oVBE of off-chain (round a) and on-chain (round b) proposals'

    def add_arguments(self, parser):
        add_dataset_arguments(parser)
        add_pipeline_arguments(parser)
        add_output_arguments(parser)

    def run(self, config, *args, **options):
        if config.fmt != 'json':
            raise ParameterError("compare_rounds only writes json")
        pipeline = config.pipeline_config()
        dataset, _ = load_input_dataset(config)

        present = round_tags(dataset)
        series = {}
        for name, tag in ROUNDS:
            if tag not in present:
                found = ', '.join(str(t) for t in present)
                raise ValidationFailure(f"No {tag} proposals in the dataset (round tags found: {found})")
            elections = dataset.elections_for_round(tag)
            logger.info("Round %s: %d %s proposal(s)", name, len(elections), tag)
            series[name] = window_series(dataset.votes_for(elections), dataset.balances, elections, pipeline)

        comparison = compare_rounds(series['a'], series['b'])
        payload = {
            'config': pipeline.to_dict(),
            'comparison': comparison.to_dict(),
            'rounds': {name: report_payload(s) for name, s in series.items()},
        }
        validate_payload(payload, 'compare')
        self.emit(render_json(payload), config, f"Verdict {comparison.verdict}; wrote {config.out}")
