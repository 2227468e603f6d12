import numpy as np
from django.test import SimpleTestCase
from hypothesis import given, settings, strategies as st

from governance.core import TokenMap
from governance.exceptions import ParameterError, ValidationFailure
from theory_lab.dao import SyntheticDao, UtilityMatrix, gen_random_dao, parse_token_dist


def _top_share(balances, fraction=0.2):
    ordered = np.sort(np.asarray(balances))[::-1]
    top = int(len(ordered) * fraction)
    return ordered[:top].sum() / ordered.sum()


class UtilityMatrixTests(SimpleTestCase):

    def setUp(self):
        self.matrix = UtilityMatrix(('a', 'b'), ('e0', 'e1'), [[1.5, -2.0], [0.0, 3.0]])

    def test_false_outcome_is_the_negation(self):
        self.assertEqual(self.matrix.util('a', 'e1'), -2.0)
        self.assertEqual(self.matrix.util('a', 'e1', outcome=False), 2.0)

    def test_values_are_read_only(self):
        with self.assertRaises(ValueError):
            self.matrix.values[0, 0] = 9.0

    def test_input_is_copied(self):
        source = np.array([[1.0], [2.0]])
        matrix = UtilityMatrix(('a', 'b'), ('e0',), source)
        source[0, 0] = 7.0
        self.assertEqual(matrix.util('a', 'e0'), 1.0)

    def test_rejects_non_finite(self):
        with self.assertRaises(ParameterError):
            UtilityMatrix(('a',), ('e0',), [[np.inf]])

    def test_rejects_duplicate_ids(self):
        with self.assertRaises(ParameterError):
            UtilityMatrix(('a', 'a'), ('e0',), [[1.0], [2.0]])

    def test_unknown_ids(self):
        with self.assertRaises(ParameterError):
            self.matrix.util('zed', 'e0')
        with self.assertRaises(ParameterError):
            self.matrix.column('e9')

    def test_equality(self):
        self.assertEqual(self.matrix, UtilityMatrix(('a', 'b'), ('e0', 'e1'), [[1.5, -2.0], [0.0, 3.0]]))
        self.assertNotEqual(self.matrix, self.matrix.with_values(np.zeros((2, 2))))


class SyntheticDaoTests(SimpleTestCase):

    def dao(self, **kwargs):
        players = ('a', 'b', 'c')
        options = {
            'players': players,
            'tokens': TokenMap({'a': 60.0, 'b': 30.0, 'c': 10.0}),
            'utilities': UtilityMatrix(players, ('e0',), [[2.0], [-2.0], [0.0]]),
        }
        options.update(kwargs)
        return SyntheticDao(**options)

    def test_blocs_and_vbe(self):
        dao = self.dao()
        self.assertEqual(len(dao.partition()), 3)
        self.assertEqual(dao.largest_bloc_mass(), 60.0)
        self.assertAlmostEqual(dao.vbe(), -np.log2(0.6))
        self.assertEqual(dao.apathetic_set(), frozenset({'c'}))

    def test_quorum_must_be_a_fraction(self):
        for quorum in (0.0, 1.0):
            with self.assertRaises(ParameterError):
                self.dao(quorum=quorum)

    def test_negative_epsilon(self):
        with self.assertRaises(ParameterError):
            self.dao(epsilon=-0.1)

    def test_every_player_needs_a_balance(self):
        with self.assertRaises(ParameterError):
            self.dao(tokens=TokenMap({'a': 60.0, 'b': 40.0}))

    def test_negative_balance(self):
        with self.assertRaises(ValidationFailure):
            self.dao(tokens=TokenMap({'a': 60.0, 'b': -30.0, 'c': 10.0}))

    def test_with_player(self):
        dao = self.dao().with_player('whale', [0.0], 500.0)
        self.assertEqual(dao.players[-1], 'whale')
        self.assertEqual(dao.total, 600.0)
        self.assertEqual(dao.largest_bloc_mass(), 510.0)
        with self.assertRaises(ParameterError):
            dao.with_player('a', [1.0], 1.0)


class GenRandomDaoTests(SimpleTestCase):

    def test_same_seed_same_dao(self):
        first = gen_random_dao(7, 12, 4, token_dist='pareto')
        second = gen_random_dao(7, 12, 4, token_dist='pareto')
        self.assertEqual(first, second)
        self.assertNotEqual(first, gen_random_dao(8, 12, 4, token_dist='pareto'))

    def test_ids_and_shape(self):
        dao = gen_random_dao(1, 12, 3)
        self.assertEqual(dao.players[0], 'p00')
        self.assertEqual(dao.players[-1], 'p11')
        self.assertEqual(dao.elections, ('e0', 'e1', 'e2'))
        self.assertEqual(dao.utilities.values.shape, (12, 3))

    def test_uniform_balances_are_whole_units(self):
        balances = np.array(list(gen_random_dao(3, 200, 2).tokens.balances.values()))
        self.assertTrue(np.all(balances == np.floor(balances)))
        self.assertTrue(np.all((balances >= 1) & (balances <= 100)))

    def test_all_apathetic(self):
        dao = gen_random_dao(5, 10, 3, apathetic_fraction=1.0)
        self.assertEqual(dao.apathetic_set(), frozenset(dao.players))
        self.assertEqual(dao.vbe(), 0.0)

    def test_engaged_players_are_not_apathetic(self):
        dao = gen_random_dao(5, 50, 2)
        self.assertEqual(dao.apathetic_set(), frozenset())

    def test_requested_apathetic_fraction(self):
        dao = gen_random_dao(11, 20, 4, apathetic_fraction=0.25)
        self.assertEqual(len(dao.apathetic_set()), 5)

    def test_planted_blocs(self):
        dao = gen_random_dao(2, 40, 5, planted_blocs=3, apathetic_fraction=0.1)
        self.assertLessEqual(len(dao.partition()), 4)
        rows = {tuple(row) for row in dao.utilities.values}
        self.assertLessEqual(len(rows), 4)

    def test_pareto_concentrates_tokens(self):
        concentrated = sum(
            _top_share(list(gen_random_dao(seed, 1000, 1, token_dist=('pareto', 1.16)).tokens.balances.values())) >= 0.6
            for seed in range(40)
        )
        self.assertGreaterEqual(concentrated, 30)

    def test_bad_parameters(self):
        with self.assertRaises(ParameterError):
            gen_random_dao(1, 0, 3)
        with self.assertRaises(ParameterError):
            gen_random_dao(1, 5, 3, apathetic_fraction=1.5)
        with self.assertRaises(ParameterError):
            gen_random_dao(1, 5, 3, token_dist='lognormal')
        with self.assertRaises(ParameterError):
            gen_random_dao(1, 5, 1, planted_blocs=3)

    @settings(max_examples=30, deadline=None)
    @given(st.integers(min_value=0, max_value=2 ** 32), st.integers(1, 15), st.integers(1, 5))
    def test_deterministic_for_any_seed(self, seed, n, m):
        self.assertEqual(gen_random_dao(seed, n, m), gen_random_dao(seed, n, m))


class ParseTokenDistTests(SimpleTestCase):

    def test_accepted_forms(self):
        self.assertEqual(parse_token_dist('uniform'), ('uniform', None))
        self.assertEqual(parse_token_dist('pareto'), ('pareto', 1.16))
        self.assertEqual(parse_token_dist('Pareto:2.5'), ('pareto', 2.5))
        self.assertEqual(parse_token_dist(('pareto', 3)), ('pareto', 3.0))

    def test_rejected_forms(self):
        for value in ('pareto:0', 'pareto:-1', 'pareto:abc', 'uniform:2', 'zipf'):
            with self.assertRaises(ParameterError):
                parse_token_dist(value)
