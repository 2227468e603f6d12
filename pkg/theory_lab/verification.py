"""
Randomized verification of the VBE theorems.

Each trial draws its own random stream from (seed, trial index), builds
a DAO that meets the theorem's precondition by construction, applies the
transformation and checks the conclusion. Every TransformOutcome produced
along the way is also run through check_master. Failures are recorded as
counterexamples, never raised.
"""
import logging
import math
from dataclasses import dataclass, field
from typing import Callable, Dict, List

import numpy as np

from clustering.kmeans import SEED_MASK
from governance.core import TokenMap
from governance.exceptions import ParameterError, UnknownTheoremError, VbeError

from .bribery import (
    INFEASIBLE,
    bribe_cost,
    controlled_fraction,
    min_bribe_players_external,
    min_bribe_tokens_internal,
    optimal_bribe_set,
    qv_benefit,
)
from .dao import SyntheticDao, UtilityMatrix, gen_random_dao
from .transforms import (
    TransformOutcome,
    check_master,
    t_apath,
    t_bribe,
    t_deleg,
    t_herd,
    t_mult,
    t_quad,
    t_slates,
)

logger = logging.getLogger(__name__)

SYBIL_TOLERANCE = 1e-12
WHALE = 'inactivity-whale'
ELECTION = 'e0'


@dataclass(frozen=True)
class Counterexample:
    trial: int
    reason: str
    details: Dict = field(default_factory=dict)


@dataclass
class TrialResult:
    passed: bool
    reason: str = ''
    details: Dict = field(default_factory=dict)
    outcomes: List[TransformOutcome] = field(default_factory=list)


@dataclass
class VerificationReport:
    theorem: str
    trials: int
    seed: int
    passes: int = 0
    counterexamples: List[Counterexample] = field(default_factory=list)
    master_checks: int = 0
    master_failures: int = 0

    @property
    def ok(self) -> bool:
        return self.passes == self.trials and self.master_failures == 0

    def to_dict(self) -> dict:
        return {
            'theorem': self.theorem,
            'trials': self.trials,
            'passes': self.passes,
            'seed': self.seed,
            'master_checks': self.master_checks,
            'master_failures': self.master_failures,
            'counterexamples': [
                {'trial': c.trial, 'reason': c.reason, 'details': dict(c.details)}
                for c in self.counterexamples
            ],
        }


def _pick(rng: np.random.Generator, items, size=None):
    """Choose from a Python sequence without turning ids into numpy strings."""
    items = list(items)
    if size is None:
        return items[int(rng.integers(len(items)))]
    return [items[i] for i in rng.choice(len(items), size=size, replace=False)]


def _finite(value):
    return None if math.isinf(value) else value


def _random_dao(rng: np.random.Generator, **overrides) -> SyntheticDao:
    options = {
        'seed': int(rng.integers(2 ** 32)),
        'n_players': int(rng.integers(4, 25)),
        'm_elections': int(rng.integers(2, 7)),
        'token_dist': 'uniform' if rng.random() < 0.5 else ('pareto', 1.16),
        'apathetic_fraction': float(rng.uniform(0.0, 0.4)),
    }
    options.update(overrides)
    return gen_random_dao(**options)


def _inject_whale(rng: np.random.Generator, dao: SyntheticDao) -> SyntheticDao:
    """Add an apathetic whale so the apathetic bloc outweighs every other bloc."""
    balance = float(dao.bloc_masses().max()) + float(rng.integers(0, 50))
    return dao.with_player(WHALE, np.zeros(len(dao.elections)), balance)


def _bloc_mass(dao: SyntheticDao, player) -> float:
    partition = dao.partition()
    return float(dao.bloc_masses()[partition.bloc_of(player)])


def _sybil(rng: np.random.Generator) -> TrialResult:
    dao = _random_dao(rng)
    player = _pick(rng, dao.players)
    accounts = int(rng.integers(1, 7))
    split = rng.multinomial(int(dao.balance(player)), [1.0 / accounts] * accounts).astype(float)
    outcome = t_mult(dao, player, accounts, split)
    passed = outcome.vbe_after == outcome.vbe_before and abs(outcome.delta) <= SYBIL_TOLERANCE
    return TrialResult(passed, 'vbe changed under a sybil split', outcome.summary(), [outcome])


def _apathy(rng: np.random.Generator) -> TrialResult:
    dao = _inject_whale(rng, _random_dao(rng))
    share = float(rng.uniform(0.1, 0.6))
    subset = [p for p in dao.players if rng.random() < share]
    inactive = _bloc_mass(dao, WHALE)
    if any(_bloc_mass(dao, p) > inactive for p in subset):
        return TrialResult(False, 'precondition not met by construction', {'apathetic_mass': inactive})
    outcome = t_apath(dao, subset)
    return TrialResult(outcome.vbe_after <= outcome.vbe_before, 'apathy increased vbe', outcome.summary(), [outcome])


def _delegation(rng: np.random.Generator) -> TrialResult:
    dao = _inject_whale(rng, _random_dao(rng, apathetic_fraction=float(rng.uniform(0.2, 0.6))))
    apathetic = sorted(dao.apathetic_set())
    engaged = [p for p in dao.players if p not in dao.apathetic_set()]
    pool = _pick(rng, engaged, size=min(len(engaged), int(rng.integers(1, 4))))

    partition = dao.partition()
    masses = dao.bloc_masses()
    inactive = float(masses[partition.bloc_of(WHALE)])
    load = {partition.bloc_of(d): float(masses[partition.bloc_of(d)]) for d in pool}
    allocation = {}
    for member in _pick(rng, apathetic, size=len(apathetic)):
        delegate = _pick(rng, pool)
        bloc = partition.bloc_of(delegate)
        if load[bloc] + dao.balance(member) <= inactive:
            allocation[member] = delegate
            load[bloc] = math.fsum([load[bloc], dao.balance(member)])

    delegates = sorted(set(allocation.values()))
    outcome = t_deleg(dao, sorted(allocation), delegates, allocation)
    return TrialResult(outcome.vbe_after >= outcome.vbe_before, 'delegation decreased vbe', outcome.summary(), [outcome])


def _whole_blocs(rng: np.random.Generator, dao: SyntheticDao) -> List[str]:
    chosen = [bloc for bloc in dao.partition().blocs if rng.random() < 0.5]
    return sorted(set().union(*chosen)) if chosen else []


def _herding(rng: np.random.Generator) -> TrialResult:
    dao = _random_dao(rng)
    subset = _whole_blocs(rng, dao)
    outcome = t_herd(dao, subset, direction=bool(rng.random() < 0.5))
    return TrialResult(outcome.vbe_after <= outcome.vbe_before, 'herding increased vbe', outcome.summary(), [outcome])


def _slates(rng: np.random.Generator) -> TrialResult:
    m = int(rng.integers(3, 9))
    dao = _random_dao(rng, m_elections=m, planted_blocs=int(rng.integers(1, 6)))
    order = _pick(rng, dao.elections, size=m)
    cuts = sorted(int(c) for c in rng.choice(np.arange(1, m), size=int(rng.integers(0, m)), replace=False))
    bounds = [0, *cuts, m]
    slates = [order[a:b] for a, b in zip(bounds, bounds[1:])]
    outcome = t_slates(dao, slates)
    return TrialResult(outcome.vbe_after <= outcome.vbe_before, 'slates increased vbe', outcome.summary(), [outcome])


def _bribery(rng: np.random.Generator) -> TrialResult:
    dao = _random_dao(rng)
    subset = _whole_blocs(rng, dao)
    outcome = t_bribe(dao, subset, direction=bool(rng.random() < 0.5))
    strict = outcome.vbe_after < outcome.vbe_before
    grew = outcome.largest_bloc_after > outcome.largest_bloc_before
    passed = outcome.vbe_after <= outcome.vbe_before and strict == grew
    return TrialResult(passed, 'bribery broke monotonicity', outcome.summary(), [outcome])


def _single_election_dao(rng: np.random.Generator, epsilon: float = 0.1) -> SyntheticDao:
    """
    One election, player 0 supporting ``true``; the supporting bloc is
    strictly the heaviest.
    """
    n = int(rng.integers(3, 13))
    balances = rng.integers(1, 51, size=n).astype(float)
    signs = np.concatenate([[1], rng.choice([1, -1, 0], size=n - 1, p=[0.3, 0.45, 0.25])])
    mass = {s: math.fsum(balances[signs == s]) for s in (1, -1, 0)}
    heaviest_other = max(mass[-1], mass[0])
    if mass[1] <= heaviest_other:
        balances[0] += heaviest_other - mass[1] + 1 + int(rng.integers(0, 10))

    magnitudes = rng.uniform(1.0, 10.0, size=n)
    values = np.where(signs == 0, rng.uniform(-epsilon, epsilon, size=n), signs * magnitudes)
    width = len(str(n - 1))
    players = tuple(f"p{i:0{width}d}" for i in range(n))
    return SyntheticDao(
        players=players,
        tokens=TokenMap(dict(zip(players, balances))),
        utilities=UtilityMatrix(players, (ELECTION,), values.reshape(n, 1)),
        epsilon=epsilon,
    )


def _bribery_biconditional(rng: np.random.Generator, internal: bool) -> TrialResult:
    dao = _single_election_dao(rng)
    briber = dao.players[0] if internal else None
    objective = 'tokens' if internal else 'players'

    def needed(state: SyntheticDao):
        if internal:
            return min_bribe_tokens_internal(state, ELECTION, briber=briber)
        return min_bribe_players_external(state, ELECTION)

    n1 = needed(dao)
    if 0 < n1 < INFEASIBLE and rng.random() < 0.5:
        best = optimal_bribe_set(dao, ELECTION, objective, briber=briber)
        herded = _pick(rng, best, size=int(rng.integers(1, len(best) + 1)))
        outcome = t_herd(dao, herded, direction=True)
        kind = 'increase'
    else:
        backing = [p for p in dao.players[1:] if dao.utilities.util(p, ELECTION) > dao.epsilon]
        masses = dao.bloc_masses()
        partition = dao.partition()
        support = float(masses[partition.bloc_of(dao.players[0])])
        others = [float(m) for i, m in enumerate(masses) if i != partition.bloc_of(dao.players[0])]
        slack = support - max(others, default=0.0)
        defectors, moved = [], 0.0
        for player in _pick(rng, backing, size=len(backing)):
            if moved + dao.balance(player) < slack:
                defectors.append(player)
                moved += dao.balance(player)
        outcome = t_herd(dao, defectors, direction=False)
        kind = 'decrease'

    n2 = needed(outcome.after)
    passed = (n1 > n2) == (outcome.vbe_after < outcome.vbe_before)
    details = {**outcome.summary(), 'kind': kind, 'n1': _finite(n1), 'n2': _finite(n2)}
    return TrialResult(passed, 'bribery requirement disagrees with vbe ordering', details, [outcome])


def _internal_bribery(rng: np.random.Generator) -> TrialResult:
    return _bribery_biconditional(rng, internal=True)


def _external_bribery(rng: np.random.Generator) -> TrialResult:
    return _bribery_biconditional(rng, internal=False)


def _quadratic(rng: np.random.Generator, epsilon: float = 0.1) -> TrialResult:
    """
    Equal whales too expensive to bribe plus equal small holders of whom
    exactly one is affordable at the budget before quadratic voting.
    """
    whales, small = int(rng.integers(1, 3)), int(rng.integers(2, 7))
    whale_balance, small_balance = float(rng.integers(100, 201)), float(rng.integers(1, 5))
    opposition = float(rng.uniform(1.0, 5.0))
    price = 2 * opposition + epsilon
    players = tuple(f"w{i}" for i in range(whales)) + tuple(f"s{i}" for i in range(small))
    balances = [whale_balance] * whales + [small_balance] * small
    values = np.array([-1000.0 * price] * whales + [-opposition] * small).reshape(-1, 1)
    dao = SyntheticDao(
        players=players,
        tokens=TokenMap(dict(zip(players, balances))),
        utilities=UtilityMatrix(players, (ELECTION,), values),
        epsilon=epsilon,
    )
    budget = bribe_cost(dao, players[-1], ELECTION)
    invested = [p for p in players if rng.random() < 0.5]

    linear = controlled_fraction(dao, ELECTION, budget, quadratic=False)
    quadratic = controlled_fraction(t_quad(dao, invested), ELECTION, budget, quadratic=True)
    expected = any(p not in invested and qv_benefit(p, dao.tokens) for p in players)
    details = {'f': linear, 'f_quadratic': quadratic, 'invested': invested, 'budget': budget}
    return TrialResult((linear < quadratic) == expected, 'quadratic voting biconditional failed', details)


TRIALS: Dict[str, Callable[[np.random.Generator], TrialResult]] = {
    'sybil': _sybil,
    'apathy': _apathy,
    'delegation': _delegation,
    'herding': _herding,
    'slates': _slates,
    'bribery': _bribery,
    'internal_bribery': _internal_bribery,
    'external_bribery': _external_bribery,
    'quadratic': _quadratic,
}
THEOREMS = tuple(TRIALS)


def verify_theorem(name: str, trials: int, seed: int = 42) -> VerificationReport:
    """
    Run ``trials`` seeded random instances of one theorem.

    Args:
        name: One of THEOREMS
        trials: Number of trials, >= 1
        seed: Base seed; trial i uses the stream (seed, i)

    Returns:
        VerificationReport with pass count and counterexamples
    """
    if name not in TRIALS:
        raise UnknownTheoremError(f"Unknown theorem {name!r}; expected one of {', '.join(THEOREMS)}")
    if trials < 1:
        raise ParameterError(f"trials must be >= 1, got {trials}")

    report = VerificationReport(theorem=name, trials=trials, seed=seed)
    for trial in range(trials):
        rng = np.random.default_rng([int(seed) & SEED_MASK, trial])
        try:
            result = TRIALS[name](rng)
        except VbeError as e:
            result = TrialResult(False, f"{type(e).__name__}: {e}")

        master_ok = True
        for outcome in result.outcomes:
            report.master_checks += 1
            if not check_master(outcome):
                report.master_failures += 1
                master_ok = False

        if result.passed and master_ok:
            report.passes += 1
        else:
            reason = result.reason if not result.passed else 'master biconditional failed'
            report.counterexamples.append(Counterexample(trial, reason, result.details))
            logger.warning("%s trial %d failed: %s", name, trial, reason)

    logger.info("%s: %d/%d trials passed", name, report.passes, trials)
    return report
