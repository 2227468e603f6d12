import io
import json
import tempfile
from pathlib import Path

import pandas as pd
from django.test import SimpleTestCase

from governance.exceptions import ParameterError, ReportWriteError, SchemaError
from governance.ingestion import load_dataset
from pipeline.baselines import baselines
from pipeline.config import PipelineConfig
from pipeline.reports import emit_report, report_schema, series_from_report, validate_payload
from pipeline.windows import window_series

TESTDATA = Path(__file__).resolve().parents[2] / 'governance' / 'testdata'


class EmitReportTests(SimpleTestCase):
    """JSON and CSV report output"""

    def setUp(self):
        self.dataset, _ = load_dataset(TESTDATA / 'votes.csv', TESTDATA / 'balances.csv', TESTDATA / 'proposals.csv')
        self.config = PipelineConfig.from_settings(window=2, stride=1, measures='min_entropy,shannon,renyi:2')

    def run_series(self, config=None):
        return window_series(self.dataset.votes, self.dataset.balances, self.dataset.proposals, config or self.config)

    def test_json_matches_schema(self):
        series = self.run_series()
        data = emit_report(series, baselines(self.dataset.balances, self.config.measures))
        payload = json.loads(data)
        validate_payload(payload)
        self.assertEqual(len(payload['windows']), 5)
        self.assertEqual(payload['config']['measures'], ['min_entropy', 'shannon', 'renyi:2'])
        self.assertIn('renyi_2', payload['aggregates'])
        self.assertEqual(payload['baselines']['accounts'], 8)

    def test_empty_series_is_valid(self):
        config = PipelineConfig.from_settings(window=20)
        with self.assertLogs('pipeline', level='WARNING'):
            series = self.run_series(config)
        payload = json.loads(emit_report(series))
        self.assertEqual(payload['windows'], [])
        self.assertEqual(payload['aggregates'], {})
        self.assertIsNone(payload['baselines'])

    def test_output_is_byte_identical(self):
        first = emit_report(self.run_series())
        second = emit_report(self.run_series())
        self.assertEqual(first, second)
        self.assertTrue(first.endswith(b'\n'))

    def test_round_trip(self):
        series = self.run_series()
        self.assertEqual(series_from_report(emit_report(series)), series)

    def test_csv_rows(self):
        series = self.run_series()
        text = emit_report(series, fmt='csv').decode('utf-8')
        lines = text.strip().split('\n')
        self.assertEqual(len(lines), len(series) + 1)
        self.assertEqual(
            lines[0],
            'window_index,first_ordinal,last_ordinal,min_entropy,shannon,renyi_2,participation,largest_bloc_share',
        )

    def test_aggregates_recomputable_from_csv(self):
        series = self.run_series()
        frame = pd.read_csv(io.BytesIO(emit_report(series, fmt='csv')))
        payload = json.loads(emit_report(series))
        for column in series.measures:
            self.assertAlmostEqual(frame[column].mean(), payload['aggregates'][column]['avg'], delta=1e-9)
            self.assertAlmostEqual(frame[column].std(ddof=0), payload['aggregates'][column]['std'], delta=1e-9)
            self.assertAlmostEqual(frame[column].iloc[-1], payload['aggregates'][column]['current'], delta=1e-9)

    def test_writes_destination(self):
        with tempfile.TemporaryDirectory() as tmp:
            target = Path(tmp) / 'report.json'
            data = emit_report(self.run_series(), destination=target)
            self.assertEqual(target.read_bytes(), data)

    def test_unwritable_destination(self):
        with tempfile.TemporaryDirectory() as tmp:
            with self.assertRaises(ReportWriteError):
                emit_report(self.run_series(), destination=Path(tmp) / 'missing' / 'report.json')

    def test_unknown_format(self):
        with self.assertRaises(ParameterError):
            emit_report(self.run_series(), fmt='xml')


class SchemaTests(SimpleTestCase):

    def test_schema_declares_top_level_fields(self):
        self.assertEqual(report_schema()['required'], ['config', 'windows', 'aggregates', 'baselines'])

    def test_rejects_malformed_document(self):
        with self.assertRaises(SchemaError):
            validate_payload({'config': {}, 'windows': [{}], 'aggregates': {}})
