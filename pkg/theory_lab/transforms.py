"""
Transformations of a synthetic DAO and the master check tying
largest-bloc mass to min-entropy VBE.

Every transformation returns a TransformOutcome holding both states and
their min-entropy VBE over signature clustering. Token totals must be
preserved; an outcome that breaks conservation raises
PreconditionViolation.
"""
import logging
import math
from dataclasses import dataclass, replace
from typing import Iterable, Mapping, Optional, Sequence

import numpy as np

from governance.core import AccountId, ElectionId, TokenMap
from governance.exceptions import ParameterError, PreconditionViolation

from .dao import SyntheticDao, UtilityMatrix

logger = logging.getLogger(__name__)

CONSERVATION_TOLERANCE = 1e-9

MULT = 'mult'
APATH = 'apath'
DELEG = 'deleg'
HERD = 'herd'
SLATES = 'slates'
BRIBE = 'bribe'


@dataclass(frozen=True)
class TransformOutcome:
    before: SyntheticDao
    after: SyntheticDao
    transform_name: str
    vbe_before: float
    vbe_after: float
    largest_bloc_before: float
    largest_bloc_after: float

    @property
    def delta(self) -> float:
        return self.vbe_after - self.vbe_before

    def summary(self) -> dict:
        return {
            'transform': self.transform_name,
            'vbe_before': self.vbe_before,
            'vbe_after': self.vbe_after,
            'largest_bloc_before': self.largest_bloc_before,
            'largest_bloc_after': self.largest_bloc_after,
            'total_before': self.before.total,
            'total_after': self.after.total,
        }


def _conserved(before: SyntheticDao, after: SyntheticDao) -> bool:
    total = before.total
    return abs(after.total - total) <= CONSERVATION_TOLERANCE * max(1.0, abs(total))


def transform_outcome(name: str, before: SyntheticDao, after: SyntheticDao) -> TransformOutcome:
    if not _conserved(before, after):
        raise PreconditionViolation(
            f"{name} changed the token total from {before.total} to {after.total}"
        )
    return TransformOutcome(
        before=before,
        after=after,
        transform_name=name,
        vbe_before=before.vbe(),
        vbe_after=after.vbe(),
        largest_bloc_before=before.largest_bloc_mass(),
        largest_bloc_after=after.largest_bloc_mass(),
    )


def check_master(outcome: TransformOutcome) -> bool:
    """
    With equal token totals, the largest bloc grows (or stays) exactly
    when min-entropy VBE falls (or stays).

    Raises:
        PreconditionViolation: the token totals differ
    """
    if not _conserved(outcome.before, outcome.after):
        raise PreconditionViolation(
            f"Token totals differ: {outcome.before.total} vs {outcome.after.total}"
        )
    grew = outcome.largest_bloc_after >= outcome.largest_bloc_before
    fell = outcome.vbe_after <= outcome.vbe_before
    return grew == fell


def _members(dao: SyntheticDao, subset: Iterable[AccountId]) -> list:
    members = list(dict.fromkeys(subset))
    unknown = [p for p in members if p not in dao.tokens]
    if unknown:
        raise ParameterError(f"Unknown player(s): {', '.join(map(str, unknown))}")
    return members


def _with_rows(dao: SyntheticDao, rows: Mapping[AccountId, np.ndarray]) -> SyntheticDao:
    values = np.array(dao.utilities.values, copy=True)
    for player, row in rows.items():
        values[dao.utilities.index(player)] = row
    return replace(dao, utilities=dao.utilities.with_values(values))


def t_mult(dao: SyntheticDao, player: AccountId, num_accounts: int,
           split: Optional[Sequence[float]] = None) -> TransformOutcome:
    """
    Sybil split: move a player's balance into ``num_accounts`` new
    accounts that copy its utility row.

    Args:
        dao: DAO before the split
        player: Player whose tokens move
        num_accounts: Number of new accounts (1 leaves the DAO unchanged)
        split: Mass per new account; an even split when omitted

    Returns:
        TransformOutcome
    """
    _members(dao, [player])
    if num_accounts < 1:
        raise ParameterError(f"num_accounts must be >= 1, got {num_accounts}")
    balance = dao.balance(player)
    if split is None:
        split = [balance / num_accounts] * num_accounts
    split = [float(s) for s in split]
    if len(split) != num_accounts or any(s < 0 for s in split):
        raise ParameterError(f"Split needs {num_accounts} non-negative amounts")
    if abs(math.fsum(split) - balance) > CONSERVATION_TOLERANCE * max(1.0, balance):
        raise ParameterError(f"Split sums to {math.fsum(split)}, expected {balance}")
    if num_accounts == 1:
        return transform_outcome(MULT, dao, dao)

    row = dao.utilities.row(player)
    after = replace(dao, tokens=dao.tokens.with_balances({player: 0.0}))
    for i, amount in enumerate(split, start=1):
        after = after.with_player(f"{player}#{i}", row, amount)
    return transform_outcome(MULT, dao, after)


def t_apath(dao: SyntheticDao, subset: Iterable[AccountId]) -> TransformOutcome:
    """Make every player in ``subset`` fully apathetic (utility exactly 0)."""
    members = _members(dao, subset)
    zeros = np.zeros(len(dao.elections))
    return transform_outcome(APATH, dao, _with_rows(dao, {p: zeros for p in members}))


def t_deleg(dao: SyntheticDao, apathetic_subset: Iterable[AccountId], delegates: Sequence[AccountId],
            allocation: Optional[Mapping[AccountId, AccountId]] = None) -> TransformOutcome:
    """
    Apathetic players hand their whole balance to delegates.

    Args:
        dao: DAO before delegation
        apathetic_subset: Delegating players; all must be apathetic
        delegates: Receiving players, none of them delegating
        allocation: Member -> delegate; round-robin over ``delegates`` when omitted

    Returns:
        TransformOutcome
    """
    members = _members(dao, apathetic_subset)
    delegates = _members(dao, delegates)
    inside = set(members) & set(delegates)
    if inside:
        raise ParameterError(f"Delegates cannot delegate: {', '.join(sorted(inside))}")
    not_apathetic = set(members) - dao.apathetic_set()
    if not_apathetic:
        raise ParameterError(f"Only apathetic players delegate; not apathetic: {', '.join(sorted(not_apathetic))}")
    if members and not delegates:
        raise ParameterError("Delegation needs at least one delegate")

    if allocation is None:
        allocation = {m: delegates[i % len(delegates)] for i, m in enumerate(members)}
    received = {d: [dao.balance(d)] for d in delegates}
    for member in members:
        target = allocation.get(member)
        if target not in received:
            raise ParameterError(f"{member} is not allocated to a delegate")
        received[target].append(dao.balance(member))

    updates = {m: 0.0 for m in members}
    updates.update({d: math.fsum(amounts) for d, amounts in received.items()})
    after = replace(dao, tokens=dao.tokens.with_balances(updates))
    return transform_outcome(DELEG, dao, after)


def flip_toward(values: np.ndarray, direction: bool, epsilon: float) -> np.ndarray:
    """
    Push every entry not strictly beyond the deadzone toward ``direction``
    to ``direction * (|u| + epsilon)``; an entry of 0 lands just past epsilon.
    """
    sign = 1.0 if direction else -1.0
    values = np.asarray(values, dtype=float)
    aligned = sign * values > epsilon
    flipped = np.abs(values) + epsilon
    flipped = np.where(flipped > epsilon, flipped, np.nextafter(epsilon, math.inf))
    return np.where(aligned, values, sign * flipped)


def _align(name: str, dao: SyntheticDao, subset: Iterable[AccountId], direction: bool,
           elections: Optional[Iterable[ElectionId]]) -> TransformOutcome:
    members = _members(dao, subset)
    columns = (
        list(range(len(dao.elections))) if elections is None
        else [dao.utilities.column(e) for e in elections]
    )
    values = np.array(dao.utilities.values, copy=True)
    rows = [dao.utilities.index(p) for p in members]
    if rows and columns:
        block = values[np.ix_(rows, columns)]
        values[np.ix_(rows, columns)] = flip_toward(block, direction, dao.epsilon)
    after = replace(dao, utilities=dao.utilities.with_values(values))
    return transform_outcome(name, dao, after)


def t_herd(dao: SyntheticDao, subset: Iterable[AccountId], direction: bool = True,
           elections: Optional[Iterable[ElectionId]] = None) -> TransformOutcome:
    """Herding: ``subset`` aligns with ``direction`` in every (or the given) election."""
    return _align(HERD, dao, subset, direction, elections)


def t_bribe(dao: SyntheticDao, subset: Iterable[AccountId], direction: bool = True,
            elections: Optional[Iterable[ElectionId]] = None) -> TransformOutcome:
    """Successful bribery of ``subset``; utilities flip the same way herding does."""
    return _align(BRIBE, dao, subset, direction, elections)


def t_slates(dao: SyntheticDao, slate_partition: Sequence[Sequence[ElectionId]]) -> TransformOutcome:
    """
    Bundle elections into slates; a slate's utility is the sum of its
    members' utilities.

    Raises:
        ParameterError: the slates do not cover every election exactly once
    """
    slates = [list(slate) for slate in slate_partition]
    covered = [e for slate in slates for e in slate]
    if any(not slate for slate in slates) or sorted(covered) != sorted(dao.elections):
        raise ParameterError("Slates must cover every election exactly once")

    values = dao.utilities.values
    columns = [[dao.utilities.column(e) for e in slate] for slate in slates]
    summed = np.column_stack([values[:, cols].sum(axis=1) for cols in columns])
    names = ['+'.join(slate) for slate in slates]
    utilities = UtilityMatrix(dao.players, names, summed)
    return transform_outcome(SLATES, dao, replace(dao, utilities=utilities))


def pivotality(tokens: TokenMap) -> dict:
    """Quadratic share over linear share for every holder with tokens."""
    total = tokens.total
    roots = {a: math.sqrt(b) for a, b in tokens.balances.items()}
    root_total = math.fsum(roots.values())
    return {
        a: (roots[a] / root_total) / (b / total)
        for a, b in tokens.balances.items() if b > 0
    }


def t_quad(dao: SyntheticDao, invested: Iterable[AccountId]) -> SyntheticDao:
    """
    Switch to quadratic voting. Invested players' utilities scale with
    their pivotality; everyone else keeps their utilities.
    """
    members = _members(dao, invested)
    ratios = pivotality(dao.tokens)
    rows = {p: dao.utilities.row(p) * ratios.get(p, 1.0) for p in members}
    return _with_rows(dao, rows)
