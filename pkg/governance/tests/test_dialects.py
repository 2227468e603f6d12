import json
import tempfile
from pathlib import Path

import pandas as pd
from django.test import SimpleTestCase

from governance.choices import Choice, RoundTag
from governance.core import build_vote_matrix
from governance.dialects import ONCHAIN_TALLY_STYLE, OFFCHAIN_SNAPSHOT_STYLE, combine_exports, load_platform_export
from governance.exceptions import ParameterError, RowValidationError, SchemaError

TESTDATA = Path(__file__).resolve().parent.parent / 'testdata'


class OffchainExportTests(SimpleTestCase):

    def setUp(self):
        self.dataset = load_platform_export(TESTDATA / 'offchain_export.json', OFFCHAIN_SNAPSHOT_STYLE)
        self.votes = {(v.election, v.voter): v for v in self.dataset.votes}

    def test_proposals_ordered_by_start_and_tagged_offchain(self):
        self.assertEqual([p.id for p in self.dataset.proposals], ['0xprop-a', '0xprop-b', '0xprop-c', '0xprop-d'])
        self.assertEqual([p.ordinal for p in self.dataset.proposals], [0, 1, 2, 3])
        self.assertTrue(all(p.round_tag == RoundTag.OFFCHAIN for p in self.dataset.proposals))

    def test_one_based_choice_index(self):
        self.assertEqual(self.votes[('0xprop-b', '0xabc1')].choice, Choice.FOR)
        self.assertEqual(self.votes[('0xprop-b', '0xdef2')].choice, Choice.AGAINST)
        self.assertEqual(self.votes[('0xprop-b', '0x3333')].choice, Choice.ABSTAIN)
        self.assertEqual(self.votes[('0xprop-a', '0xabc1')].choice, Choice.AGAINST)

    def test_multi_choice_proposal_keeps_indices(self):
        logo = self.dataset.proposals[2]
        self.assertEqual(logo.arity, 3)
        self.assertEqual(self.votes[('0xprop-c', '0xdef2')].choice, 2)
        self.assertEqual(len(self.dataset.rejected), 1)
        self.assertIn('outside', self.dataset.rejected[0].reason)

    def test_proposal_without_votes_is_a_zero_column(self):
        voters = self.dataset.voters
        matrix = build_vote_matrix(self.dataset.votes, self.dataset.proposals, voters)
        self.assertEqual(matrix.shape, (3, 4))
        self.assertFalse(matrix.entries[:, 3].any())

    def test_voting_power_is_kept(self):
        self.assertEqual(self.votes[('0xprop-b', '0xabc1')].voting_power, 120.5)
        self.assertIsNone(self.dataset.balances)


class OnchainExportTests(SimpleTestCase):

    def setUp(self):
        self.dataset = load_platform_export(TESTDATA / 'onchain_export.json', ONCHAIN_TALLY_STYLE)

    def test_support_mapping_matches_hand_labels(self):
        expected = pd.read_csv(TESTDATA / 'onchain_expected.csv', dtype=str)
        got = {(v.election, v.voter): v.choice.value for v in self.dataset.votes}
        want = {(r.proposal_id, r.voter): r.choice for r in expected.itertuples()}
        self.assertEqual(got, want)

    def test_weights_are_scaled_by_decimals(self):
        weights = {(v.election, v.voter): v.voting_power for v in self.dataset.votes}
        self.assertEqual(weights[('100', '0xabc1')], 2500.0)
        self.assertEqual(weights[('100', '0x3333')], 0.5)

    def test_unknown_support_value_is_rejected(self):
        self.assertEqual(len(self.dataset.rejected), 1)
        self.assertEqual(self.dataset.rejected[0].row, 5)

    def test_ordinals_follow_start_block(self):
        self.assertEqual([p.id for p in self.dataset.proposals], ['100', '101'])
        self.assertTrue(all(p.round_tag == RoundTag.ONCHAIN for p in self.dataset.proposals))


class ExportLayoutTests(SimpleTestCase):

    def test_missing_fields(self):
        with self.assertRaises(SchemaError):
            load_platform_export(TESTDATA / 'export_missing_proposals.json', ONCHAIN_TALLY_STYLE)

    def test_unknown_dialect(self):
        with self.assertRaises(ParameterError):
            load_platform_export(TESTDATA / 'onchain_export.json', 'mystery')


class ExportTimestampTests(SimpleTestCase):

    def setUp(self):
        tmp = tempfile.TemporaryDirectory()
        self.addCleanup(tmp.cleanup)
        self.path = Path(tmp.name) / 'export.json'

    def load(self, *created):
        self.path.write_text(json.dumps({
            'proposals': [{'id': 'p', 'choices': ['For', 'Against'], 'start': 1}],
            'votes': [
                {'proposal': 'p', 'voter': f"0x{i}", 'choice': 1, 'created': value}
                for i, value in enumerate(created)
            ],
        }))
        return load_platform_export(self.path, OFFCHAIN_SNAPSHOT_STYLE)

    def test_digit_strings_and_integral_floats_are_coerced(self):
        dataset = self.load('1700000000', 1700000001.0, 1700000002, None)
        self.assertEqual([v.timestamp for v in dataset.votes], [1700000000, 1700000001, 1700000002, None])
        self.assertEqual(dataset.rejected, ())

    def test_unusable_timestamps_reject_the_vote(self):
        dataset = self.load('yesterday', 1.5, True, 1700000000)
        self.assertEqual(len(dataset.votes), 1)
        self.assertEqual([e.row for e in dataset.rejected], [1, 2, 3])
        self.assertIn('timestamp', dataset.rejected[0].reason)


class CombineExportsTests(SimpleTestCase):

    exports = [
        (TESTDATA / 'offchain_export.json', OFFCHAIN_SNAPSHOT_STYLE),
        (TESTDATA / 'onchain_export.json', ONCHAIN_TALLY_STYLE),
    ]

    def test_exports_are_stacked_in_order(self):
        dataset, report = combine_exports(self.exports, TESTDATA / 'balances_export.csv', lenient=True)
        self.assertEqual([p.id for p in dataset.proposals],
                         ['0xprop-a', '0xprop-b', '0xprop-c', '0xprop-d', '100', '101'])
        self.assertEqual([p.ordinal for p in dataset.proposals], [0, 1, 2, 3, 4, 5])
        self.assertEqual(len(dataset.votes), 9)
        self.assertEqual(dataset.balances.total, 100.0)
        self.assertEqual(len(report.warnings), 2)

    def test_rejected_votes_fail_strict_mode(self):
        with self.assertRaisesMessage(RowValidationError, '2 malformed vote(s)'):
            combine_exports(self.exports, TESTDATA / 'balances_export.csv')

    def test_needs_an_export(self):
        with self.assertRaises(ParameterError):
            combine_exports([], TESTDATA / 'balances_export.csv')
