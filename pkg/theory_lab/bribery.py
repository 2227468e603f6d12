"""
Bribery and quadratic-voting analytics with brute-force oracles.

An outcome is guaranteed when the tokens voting for it strictly exceed
``quorum * total``. A player votes for an outcome when its utility
toward that outcome is beyond the deadzone. Brute-force modes enumerate
every subset and refuse instances larger than
``settings.VBE_BRUTE_FORCE_LIMIT`` candidates.
"""
import logging
import math
from itertools import combinations
from typing import List, Optional, Tuple

import numpy as np
from django.conf import settings

from governance.core import AccountId, ElectionId, TokenMap
from governance.exceptions import DegenerateDistributionError, ParameterError

from .dao import SyntheticDao

logger = logging.getLogger(__name__)

BRUTE_FORCE = 'brute_force'
GREEDY = 'greedy'
MODES = (BRUTE_FORCE, GREEDY)

INFEASIBLE = math.inf

QV_TOLERANCE = 1e-12


def _sign(direction: bool) -> float:
    return 1.0 if direction else -1.0


def _check_mode(mode: str) -> str:
    if mode not in MODES:
        raise ParameterError(f"Unknown mode {mode!r}; expected brute_force or greedy")
    return mode


def _check_size(count: int, what: str) -> None:
    limit = settings.VBE_BRUTE_FORCE_LIMIT
    if count > limit:
        raise ParameterError(f"Brute force is limited to {limit} {what}, got {count}")


def bribe_cost(dao: SyntheticDao, player: AccountId, election: ElectionId, direction: bool = True) -> float:
    """Cost to make ``player`` vote for ``direction``: max(2 * opposing utility + epsilon, 0)."""
    opposing = -_sign(direction) * dao.utilities.util(player, election)
    return max(2.0 * opposing + dao.epsilon, 0.0)


def supporters(dao: SyntheticDao, election: ElectionId, direction: bool = True) -> List[AccountId]:
    column = dao.utilities.values[:, dao.utilities.column(election)]
    sign = _sign(direction)
    return [p for p, u in zip(dao.players, column) if sign * u > dao.epsilon]


def _split(dao: SyntheticDao, election: ElectionId, direction: bool,
           exclude: Tuple[AccountId, ...] = ()) -> Tuple[float, List[AccountId], float]:
    backing = set(supporters(dao, election, direction))
    support = math.fsum(dao.balance(p) for p in backing)
    candidates = [p for p in dao.players if p not in backing and p not in exclude and dao.balance(p) > 0]
    return support, candidates, dao.quorum * dao.total


def _subset_sums(values: np.ndarray) -> np.ndarray:
    """Sum of every subset; bit i of the index selects values[i]."""
    sums = np.zeros(1)
    for value in values:
        sums = np.concatenate([sums, sums + value])
    return sums


def min_bribe_tokens_internal(dao: SyntheticDao, election: ElectionId, briber: Optional[AccountId] = None,
                              mode: str = BRUTE_FORCE, direction: bool = True) -> float:
    """
    Smallest token mass a player inside the DAO must bribe to guarantee
    its preferred outcome.

    Args:
        dao: The DAO
        election: Election to win
        briber: Bribing player; its own preference sets the direction
        mode: 'brute_force' (exact) or 'greedy' (descending balances, an upper bound)
        direction: Target outcome when no briber is named

    Returns:
        Bribed token mass, 0 when already decided, INFEASIBLE when unreachable
    """
    _check_mode(mode)
    exclude: Tuple[AccountId, ...] = ()
    if briber is not None:
        utility = dao.utilities.util(briber, election)
        if abs(utility) <= dao.epsilon:
            raise ParameterError(f"Briber {briber} has no preference in {election}")
        direction = utility > 0
        exclude = (briber,)
    support, candidates, bound = _split(dao, election, direction, exclude)
    if support > bound:
        return 0.0
    masses = np.array([dao.balance(p) for p in candidates])
    if support + math.fsum(masses) <= bound:
        return INFEASIBLE

    if mode == GREEDY:
        running = []
        for mass in sorted(masses, reverse=True):
            running.append(mass)
            if support + math.fsum(running) > bound:
                return math.fsum(running)
        return INFEASIBLE

    _check_size(len(candidates), 'bribe candidates')
    sums = _subset_sums(masses)
    feasible = sums[support + sums > bound]
    return float(feasible.min())


def min_bribe_players_external(dao: SyntheticDao, election: ElectionId, mode: str = BRUTE_FORCE,
                               direction: bool = True) -> float:
    """
    Fewest players an outside entity must corrupt to guarantee ``direction``.

    Greedy takes the largest balances first. Brute force tries every
    subset in order of size.

    Returns:
        Player count, 0 when already decided, INFEASIBLE when unreachable
    """
    _check_mode(mode)
    support, candidates, bound = _split(dao, election, direction)
    if support > bound:
        return 0
    masses = [dao.balance(p) for p in candidates]
    if support + math.fsum(masses) <= bound:
        return INFEASIBLE

    if mode == GREEDY:
        running = []
        for mass in sorted(masses, reverse=True):
            running.append(mass)
            if support + math.fsum(running) > bound:
                return len(running)
        return INFEASIBLE

    _check_size(len(candidates), 'bribe candidates')
    for size in range(1, len(masses) + 1):
        for chosen in combinations(masses, size):
            if support + math.fsum(chosen) > bound:
                return size
    return INFEASIBLE


def optimal_bribe_set(dao: SyntheticDao, election: ElectionId, objective: str = 'tokens',
                      briber: Optional[AccountId] = None, direction: bool = True) -> Optional[List[AccountId]]:
    """
    A brute-force optimal set of players to bribe.

    Args:
        objective: 'tokens' minimizes bribed mass, 'players' the head count

    Returns:
        Players to bribe (empty when already decided), or None when unreachable
    """
    exclude: Tuple[AccountId, ...] = ()
    if briber is not None:
        direction = dao.utilities.util(briber, election) > 0
        exclude = (briber,)
    support, candidates, bound = _split(dao, election, direction, exclude)
    if support > bound:
        return []
    _check_size(len(candidates), 'bribe candidates')
    masses = np.array([dao.balance(p) for p in candidates])

    if objective == 'tokens':
        sums = _subset_sums(masses)
        sums[support + sums <= bound] = math.inf
        best = int(np.argmin(sums))
        if math.isinf(sums[best]):
            return None
        return [p for i, p in enumerate(candidates) if best >> i & 1]
    if objective != 'players':
        raise ParameterError(f"Unknown objective {objective!r}; expected tokens or players")
    for size in range(1, len(candidates) + 1):
        for chosen in combinations(range(len(candidates)), size):
            if support + math.fsum(masses[list(chosen)]) > bound:
                return [candidates[i] for i in chosen]
    return None


def qv_benefit(player: AccountId, tokens: TokenMap) -> bool:
    """True when the player's quadratic share exceeds its linear share."""
    total = tokens.total
    if total <= 0:
        raise DegenerateDistributionError("Token balances sum to zero")
    amount = tokens.balances[player]
    linear = amount / total
    quadratic = math.sqrt(amount) / math.fsum(math.sqrt(b) for b in tokens.balances.values())
    return quadratic - linear > QV_TOLERANCE * quadratic


def controlled_fraction(dao: SyntheticDao, election: ElectionId, budget: float, quadratic: bool = False,
                        mode: str = BRUTE_FORCE, direction: bool = True) -> float:
    """
    Largest share of voting weight a briber controls with ``budget``.

    Weight is tokens, or their square root under quadratic voting.
    Players already voting for ``direction`` count for free.

    Returns:
        Fraction in [0, 1]
    """
    _check_mode(mode)
    if budget < 0:
        raise ParameterError(f"budget must be >= 0, got {budget}")
    weight = {p: (math.sqrt(b) if quadratic else b) for p, b in dao.tokens.balances.items()}
    total = math.fsum(weight.values())
    if total <= 0:
        raise DegenerateDistributionError("Voting weight sums to zero")

    backing = set(supporters(dao, election, direction))
    free = math.fsum(weight[p] for p in backing)
    candidates = [p for p in dao.players if p not in backing]
    costs = np.array([bribe_cost(dao, p, election, direction) for p in candidates])
    weights = np.array([weight[p] for p in candidates])

    if mode == GREEDY:
        order = sorted(range(len(candidates)),
                       key=lambda i: (-(weights[i] / costs[i]) if costs[i] > 0 else -math.inf, i))
        spent, bought = [], []
        for i in order:
            if math.fsum(spent) + costs[i] <= budget:
                spent.append(costs[i])
                bought.append(weights[i])
        return (free + math.fsum(bought)) / total

    _check_size(len(dao.players), 'players')
    cost_sums = _subset_sums(costs)
    weight_sums = _subset_sums(weights)
    best = float(weight_sums[cost_sums <= budget].max())
    return min((free + best) / total, 1.0)
