from pathlib import Path

from django.test import SimpleTestCase

from governance.choices import RoundTag
from governance.exceptions import EmptySeriesError, ParameterError
from governance.ingestion import load_balances_csv, load_dataset
from pipeline.baselines import baselines
from pipeline.config import PipelineConfig
from pipeline.rounds import A_MORE_DECENTRALIZED, B_MORE_DECENTRALIZED, MIXED, TIE, compare_rounds
from pipeline.windows import WindowResult, WindowSeries, window_series

TESTDATA = Path(__file__).resolve().parents[2] / 'governance' / 'testdata'


def series_of(**columns):
    measures = tuple(columns)
    length = len(next(iter(columns.values())))
    results = tuple(
        WindowResult(
            window_index=i, election_ids=(f"e{i}",), first_ordinal=i, last_ordinal=i,
            values={m: columns[m][i] for m in measures}, participation=1.0, largest_bloc_share=0.5,
            cluster_sizes=(1, 1), cluster_masses=(1.0, 1.0), effective_k=2,
        )
        for i in range(length)
    )
    return WindowSeries(results=results, measures=measures)


class CompareRoundsTests(SimpleTestCase):
    """Off-chain versus on-chain round comparison"""

    def test_higher_average_is_more_decentralized(self):
        comparison = compare_rounds(series_of(min_entropy=[0.7804]), series_of(min_entropy=[0.6601]))
        self.assertEqual(comparison.verdict, A_MORE_DECENTRALIZED)
        row = comparison.by_measure()['min_entropy']
        self.assertAlmostEqual(row.difference, 0.1203, places=12)

    def test_reverse_order(self):
        comparison = compare_rounds(series_of(min_entropy=[0.6601]), series_of(min_entropy=[0.7804]))
        self.assertEqual(comparison.verdict, B_MORE_DECENTRALIZED)

    def test_identical_series_tie(self):
        series = series_of(min_entropy=[0.5, 0.7], shannon=[1.0, 1.2])
        comparison = compare_rounds(series, series)
        self.assertEqual(comparison.verdict, TIE)
        self.assertEqual(comparison.to_dict()['measures']['shannon']['difference'], 0.0)

    def test_measures_can_disagree(self):
        a = series_of(min_entropy=[0.8], shannon=[1.0])
        b = series_of(min_entropy=[0.6], shannon=[1.5])
        self.assertEqual(compare_rounds(a, b).verdict, MIXED)

    def test_measure_mismatch(self):
        with self.assertRaises(ParameterError):
            compare_rounds(series_of(min_entropy=[0.5]), series_of(shannon=[0.5]))

    def test_empty_round(self):
        with self.assertRaises(EmptySeriesError):
            compare_rounds(series_of(min_entropy=[0.5]), series_of(min_entropy=[]))

    def test_identical_voting_in_both_rounds(self):
        dataset, _ = load_dataset(TESTDATA / 'votes_identical_rounds.csv', TESTDATA / 'balances.csv',
                                  TESTDATA / 'proposals_identical_rounds.csv')
        config = PipelineConfig.from_settings(window=4, stride=4)
        series = []
        for tag in (RoundTag.OFFCHAIN, RoundTag.ONCHAIN):
            elections = dataset.elections_for_round(tag)
            series.append(window_series(dataset.votes_for(elections), dataset.balances, elections, config))
        comparison = compare_rounds(*series)
        self.assertEqual(comparison.verdict, TIE)
        self.assertEqual((comparison.windows_a, comparison.windows_b), (1, 1))


class BaselineTests(SimpleTestCase):

    def test_uniform_holders(self):
        report = baselines(load_balances_csv(TESTDATA / 'balances_uniform10.csv'))
        self.assertAlmostEqual(report.gini, 0.0, places=12)
        self.assertEqual(report.nakamoto, 6)
        self.assertEqual(report.accounts, 10)

    def test_single_holder(self):
        report = baselines(load_balances_csv(TESTDATA / 'balances_single_holder.csv'))
        self.assertAlmostEqual(report.gini, 0.75, places=12)
        self.assertEqual(report.nakamoto, 1)
        self.assertEqual(report.trivial_vbe['min_entropy'], 0.0)
        self.assertEqual(report.trivial_vbe['shannon'], 0.0)
