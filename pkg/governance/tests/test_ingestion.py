import tempfile
from pathlib import Path

from django.test import SimpleTestCase
from hypothesis import given, strategies as st

from governance.choices import CHOICE_ALIASES, Choice, RoundTag, parse_choice
from governance.core import ALLOCATION_MODE, build_allocation_matrix, build_vote_matrix
from governance.exceptions import (
    ArityError,
    DegenerateDistributionError,
    EmptyInputError,
    MissingBalanceError,
    ReferentialIntegrityError,
    RowValidationError,
    SchemaError,
    UnknownChoiceError,
    ValidationFailure,
)
from governance.ingestion import (
    load_balances_csv,
    load_ballots_csv,
    load_dataset,
    load_proposals_csv,
    load_votes_csv,
    validate_dataset,
    write_dataset_csv,
)

TESTDATA = Path(__file__).resolve().parent.parent / 'testdata'


class LoadVotesTests(SimpleTestCase):
    """Vote file parsing and row-level loss accounting"""

    def test_header_only_file(self):
        result = load_votes_csv(TESTDATA / 'votes_header_only.csv')
        self.assertEqual(list(result), [])
        self.assertEqual(result.rows_in, 0)

    def test_aliases_are_case_insensitive(self):
        result = load_votes_csv(TESTDATA / 'votes.csv')
        first = result[0]
        self.assertEqual(first.choice, Choice.FOR)
        self.assertEqual(first.voter, '0xalice')
        dave = [r for r in result if r.voter == '0xdave']
        self.assertTrue(all(r.choice == Choice.AGAINST for r in dave))

    def test_malformed_rows_are_reported_not_dropped(self):
        result = load_votes_csv(TESTDATA / 'votes_malformed.csv')
        self.assertEqual(result.rows_in, 5)
        self.assertEqual(result.rows_accepted, 2)
        self.assertEqual(result.rows_rejected, 3)
        self.assertEqual(result.rows_in, result.rows_accepted + result.rows_rejected)
        self.assertEqual([e.row for e in result.errors], [3, 4, 5])
        self.assertIn('maybe', result.errors[0].reason)
        self.assertIn('voting_power', result.errors[1].reason)
        self.assertIn('not a number', result.errors[2].reason)
        self.assertTrue(all(e.reason for e in result.errors))

    def test_missing_required_column(self):
        with self.assertRaises(SchemaError):
            load_votes_csv(TESTDATA / 'votes_missing_column.csv')


class LoadBalancesTests(SimpleTestCase):

    def test_duplicates_are_summed_and_scientific_notation_parsed(self):
        tokens = load_balances_csv(TESTDATA / 'balances_duplicates.csv')
        self.assertEqual(tokens.get('0xa'), 6.0)
        self.assertEqual(tokens.get('0xb'), 1000.0)

    def test_empty_file_is_degenerate(self):
        with self.assertRaises(DegenerateDistributionError):
            load_balances_csv(TESTDATA / 'balances_empty.csv')
        with self.assertRaises(EmptyInputError):
            load_balances_csv(TESTDATA / 'balances_empty.csv')

    def test_negative_balance_rejected(self):
        with self.assertRaises(RowValidationError) as ctx:
            load_balances_csv(TESTDATA / 'balances_negative.csv')
        self.assertEqual(ctx.exception.row, 3)


class LoadProposalsTests(SimpleTestCase):

    def test_round_tags(self):
        proposals = load_proposals_csv(TESTDATA / 'proposals.csv')
        self.assertEqual([p.id for p in proposals], ['p01', 'p02', 'p03', 'p04', 'p05', 'p06'])
        self.assertEqual(proposals[0].round_tag, RoundTag.OFFCHAIN)
        self.assertEqual(proposals[-1].round_tag, RoundTag.ONCHAIN)

    def test_missing_round_tag_column(self):
        proposals = load_proposals_csv(TESTDATA / 'proposals_no_round.csv')
        self.assertTrue(all(p.round_tag == RoundTag.UNSPECIFIED for p in proposals))


class DatasetTests(SimpleTestCase):

    def test_clean_dataset(self):
        dataset, report = load_dataset(
            TESTDATA / 'votes.csv', TESTDATA / 'balances.csv', TESTDATA / 'proposals.csv'
        )
        self.assertTrue(report.ok)
        self.assertEqual(report.zero_filled, [])
        self.assertEqual(len(dataset.proposals), 6)
        self.assertEqual(len(dataset.votes), 37)
        self.assertEqual(dataset.display_names['0xalice'], '0xAlice')

        matrix = build_vote_matrix(dataset.votes, dataset.proposals, dataset.balances.accounts)
        # the late duplicate row for bob on p02 carries an older timestamp
        self.assertEqual(matrix.row('0xbob').tolist(), [1.0] * 6)
        self.assertEqual(matrix.row('0xfrank').tolist(), [1.0, 0.0, 1.0, 0.0, 1.0, 0.0])
        self.assertFalse(matrix.row('0xgrace').any())

    def test_canonicalization_is_idempotent(self):
        dataset, _ = load_dataset(TESTDATA / 'votes.csv', TESTDATA / 'balances.csv', TESTDATA / 'proposals.csv')
        again, report = validate_dataset(dataset)
        self.assertEqual(again, dataset)
        self.assertTrue(report.ok)

    def test_dangling_proposal_is_fatal_even_when_lenient(self):
        with self.assertRaises(ReferentialIntegrityError):
            load_dataset(TESTDATA / 'votes_dangling.csv', TESTDATA / 'balances.csv',
                         TESTDATA / 'proposals.csv', lenient=True)

    def test_missing_balances_strict_and_lenient(self):
        with self.assertRaises(MissingBalanceError):
            load_dataset(TESTDATA / 'votes.csv', TESTDATA / 'balances_partial.csv', TESTDATA / 'proposals.csv')

        dataset, report = load_dataset(
            TESTDATA / 'votes.csv', TESTDATA / 'balances_partial.csv', TESTDATA / 'proposals.csv', lenient=True
        )
        self.assertEqual(sorted(report.zero_filled), ['0xerin', '0xfrank'])
        self.assertEqual(dataset.balances.get('0xerin'), 0.0)
        self.assertTrue(report.warnings)

    def test_malformed_votes_fail_strict_load(self):
        with self.assertRaises(ValidationFailure):
            load_dataset(TESTDATA / 'votes_malformed.csv', TESTDATA / 'balances.csv', TESTDATA / 'proposals.csv')


class AllocationProposalTests(SimpleTestCase):
    """Proposals whose votes split weight across the choices"""

    def setUp(self):
        tmp = tempfile.TemporaryDirectory()
        self.addCleanup(tmp.cleanup)
        self.dir = Path(tmp.name)

    def write_proposals(self, text):
        path = self.dir / 'proposals.csv'
        path.write_text(text)
        return path

    def test_allocation_column(self):
        proposals = load_proposals_csv(TESTDATA / 'proposals_allocation.csv')
        self.assertEqual([(p.id, p.arity, p.allocation) for p in proposals],
                         [('g1', 3, True), ('g2', 3, True), ('p3', 2, False)])

    def test_allocation_needs_arity(self):
        path = self.write_proposals("proposal_id,ordinal,allocation\ng1,1,true\n")
        with self.assertRaisesMessage(RowValidationError, 'need an arity'):
            load_proposals_csv(path)

    def test_bad_allocation_flag(self):
        path = self.write_proposals("proposal_id,ordinal,arity,allocation\ng1,1,3,perhaps\n")
        with self.assertRaises(RowValidationError):
            load_proposals_csv(path)

    def test_allocation_vote_on_unmarked_proposal_is_rejected(self):
        path = self.write_proposals("proposal_id,ordinal,arity\ng1,1,3\ng2,2,3\np3,3,2\n")
        with self.assertRaises(ArityError) as ctx:
            load_dataset(TESTDATA / 'votes_allocation.csv', TESTDATA / 'balances_allocation.csv', path,
                         lenient=True)
        self.assertIn('g1', str(ctx.exception))
        self.assertIn('0xa', str(ctx.exception))

    def test_allocation_width_must_match_arity(self):
        path = self.write_proposals("proposal_id,ordinal,arity,allocation\ng1,1,2,true\ng2,2,3,true\np3,3,2,false\n")
        with self.assertRaisesMessage(ArityError, 'allocates over 3 choice(s); the proposal has 2'):
            load_dataset(TESTDATA / 'votes_allocation.csv', TESTDATA / 'balances_allocation.csv', path)

    def test_allocation_dataset_builds_allocation_matrix(self):
        dataset, report = load_dataset(TESTDATA / 'votes_allocation.csv', TESTDATA / 'balances_allocation.csv',
                                       TESTDATA / 'proposals_allocation.csv')
        self.assertTrue(report.ok)
        self.assertEqual(dataset.votes[0].choice, (6.0, 4.0, 0.0))
        matrix = build_allocation_matrix(dataset.votes, dataset.proposals, dataset.balances.accounts)
        self.assertEqual(matrix.mode, ALLOCATION_MODE)
        self.assertEqual(matrix.shape, (4, 8))
        self.assertEqual(matrix.row('0xc').tolist(), [0.0, 0.0, 10.0, 0.0, 5.0, 5.0, 0.0, 1.0])

    def test_written_dataset_keeps_allocation_flags(self):
        dataset, _ = load_dataset(TESTDATA / 'votes_allocation.csv', TESTDATA / 'balances_allocation.csv',
                                  TESTDATA / 'proposals_allocation.csv')
        votes, balances, proposals = write_dataset_csv(dataset, self.dir / 'out')
        self.assertEqual(proposals.read_text().splitlines()[1], 'g1,1,Grants round 1,offchain,3,true')
        again, _ = load_dataset(votes, balances, proposals)
        self.assertEqual(again.proposals, dataset.proposals)


class BallotTests(SimpleTestCase):

    def test_ballot_matrix(self):
        ballots = load_ballots_csv(TESTDATA / 'ballots.csv')
        self.assertEqual(len(ballots.voters), 6)
        self.assertEqual(ballots.projects, ('alpha', 'beta', 'delta', 'gamma'))
        self.assertEqual(ballots.amounts[0].tolist(), [50.0, 30.0, 0.0, 0.0])


class ChoiceAliasTests(SimpleTestCase):

    def test_alias_table_is_total(self):
        for label, choice in CHOICE_ALIASES.items():
            self.assertEqual(parse_choice(label.upper()), choice)

    @given(st.text(max_size=12))
    def test_fuzzed_labels_map_or_raise(self, label):
        try:
            choice = parse_choice(label)
        except UnknownChoiceError:
            self.assertNotIn(' '.join(label.strip().lower().split()), CHOICE_ALIASES)
        else:
            self.assertIsInstance(choice, Choice)
