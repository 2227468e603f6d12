import logging

from cli.base import (
    VbeBaseCommand,
    add_dataset_arguments,
    add_output_arguments,
    add_pipeline_arguments,
    load_input_dataset,
)
from pipeline.baselines import baselines
from pipeline.reports import emit_report
from pipeline.windows import window_series

logger = logging.getLogger(__name__)


class Command(VbeBaseCommand):
    help = 'Compute windowed observable voting-bloc entropy for a governance dataset'

    def add_arguments(self, parser):
        add_dataset_arguments(parser)
        add_pipeline_arguments(parser)
        add_output_arguments(parser)

    def run(self, config, *args, **options):
        pipeline = config.pipeline_config()
        dataset, report = load_input_dataset(config)
        for warning in report.warnings:
            logger.warning("%s", warning)

        series = window_series(dataset.votes, dataset.balances, dataset.proposals, pipeline)
        summary = baselines(dataset.balances, pipeline.measures) if config.fmt == 'json' else None
        data = emit_report(series, summary, fmt=config.fmt)
        self.emit(data, config, f"Wrote {len(series)} window(s) to {config.out}")
