"""
DAO governance data model: accounts, token balances, elections, votes,
the vote-history matrix and token-weighted partitions.

Every type here is immutable after construction, so the functions in
this module are safe to call from concurrent window evaluations.
"""
import logging
import math
from dataclasses import dataclass
from types import MappingProxyType
from typing import Dict, FrozenSet, Iterable, List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np

from .choices import Choice, RoundTag
from .exceptions import (
    ArityError,
    MissingBalanceError,
    ParameterError,
    ReferentialIntegrityError,
    ValidationFailure,
)

logger = logging.getLogger(__name__)

AccountId = str
ElectionId = str
ChoiceValue = Union[Choice, int, Tuple[float, ...], None]

BINARY_MODE = 'binary'
ALLOCATION_MODE = 'allocation'


def canonical_address(raw) -> AccountId:
    """Trim and lowercase an address so hex addresses compare case-insensitively."""
    account = str(raw).strip().lower()
    if not account:
        raise ValidationFailure("Account id must be a non-empty string")
    return account


@dataclass(frozen=True, eq=False)
class TokenMap:
    """
    Non-negative token balance per account.

    The mapping is copied and frozen on construction. ``total`` is summed
    with ``math.fsum`` so integer-valued balances add up exactly.
    """
    balances: Mapping[AccountId, float]

    def __post_init__(self):
        frozen = {}
        for account, amount in self.balances.items():
            if not account:
                raise ValidationFailure("Account id must be a non-empty string")
            value = float(amount)
            if not math.isfinite(value) or value < 0:
                raise ValidationFailure(f"Balance for {account} must be finite and >= 0, got {amount!r}")
            frozen[account] = value
        object.__setattr__(self, 'balances', MappingProxyType(frozen))

    @property
    def total(self) -> float:
        return math.fsum(self.balances.values())

    @property
    def accounts(self) -> Tuple[AccountId, ...]:
        return tuple(self.balances)

    def get(self, account: AccountId, default: Optional[float] = None) -> Optional[float]:
        return self.balances.get(account, default)

    def __contains__(self, account) -> bool:
        return account in self.balances

    def __len__(self) -> int:
        return len(self.balances)

    def __eq__(self, other) -> bool:
        if not isinstance(other, TokenMap):
            return NotImplemented
        return dict(self.balances) == dict(other.balances)

    def scaled(self, factor: float) -> 'TokenMap':
        return TokenMap({a: b * factor for a, b in self.balances.items()})

    def with_balances(self, updates: Mapping[AccountId, float]) -> 'TokenMap':
        merged = dict(self.balances)
        merged.update(updates)
        return TokenMap(merged)


@dataclass(frozen=True)
class Election:
    """One proposal/election column in chronological order."""
    id: ElectionId
    ordinal: int
    round_tag: RoundTag = RoundTag.UNSPECIFIED
    arity: int = 2
    allocation: bool = False
    title: str = ''

    def __post_init__(self):
        if not self.id:
            raise ValidationFailure("Election id must be non-empty")
        if self.arity < 2:
            raise ArityError(f"Election {self.id} has arity {self.arity}; at least 2 required")


@dataclass(frozen=True)
class VoteRecord:
    election: ElectionId
    voter: AccountId
    choice: ChoiceValue
    voting_power: Optional[float] = None
    timestamp: Optional[int] = None

    def __post_init__(self):
        if self.voting_power is not None and (not math.isfinite(self.voting_power) or self.voting_power < 0):
            raise ValidationFailure(f"voting_power must be finite and >= 0, got {self.voting_power!r}")
        if isinstance(self.choice, tuple) and any(x < 0 for x in self.choice):
            raise ValidationFailure("Allocation vectors must not contain negative entries")
        if isinstance(self.choice, int) and not isinstance(self.choice, Choice) and self.choice < 0:
            raise ArityError(f"Choice index must be >= 0, got {self.choice}")
        if self.timestamp is not None and (isinstance(self.timestamp, bool) or not isinstance(self.timestamp, int)):
            raise ValidationFailure(f"timestamp must be an integer, got {self.timestamp!r}")


@dataclass(frozen=True, eq=False)
class VoteMatrix:
    """
    Accounts x elections vote-history matrix.

    In binary mode entries are -1, 0 or +1 and there is one column per
    election. In allocation mode each election expands into one column per
    choice and ``column_labels`` names them.
    """
    accounts: Tuple[AccountId, ...]
    elections: Tuple[ElectionId, ...]
    entries: np.ndarray
    mode: str = BINARY_MODE
    column_labels: Tuple[str, ...] = ()

    def __post_init__(self):
        entries = np.array(self.entries, dtype=float, copy=True)
        if entries.ndim != 2:
            entries = entries.reshape(len(self.accounts), -1)
        entries.setflags(write=False)
        object.__setattr__(self, 'entries', entries)
        if not self.column_labels:
            object.__setattr__(self, 'column_labels', tuple(self.elections))
        if entries.shape[0] != len(self.accounts):
            raise ParameterError("Row count must equal the number of accounts")
        if entries.shape[1] != len(self.column_labels):
            raise ParameterError("Column count must equal the number of columns")
        if self.mode == BINARY_MODE and entries.size and not np.isin(entries, (-1.0, 0.0, 1.0)).all():
            raise ParameterError("Binary vote matrices hold only -1, 0 and +1")

    @property
    def shape(self) -> Tuple[int, int]:
        return self.entries.shape

    def row(self, account: AccountId) -> np.ndarray:
        return self.entries[self.accounts.index(account)]

    def active_accounts(self) -> FrozenSet[AccountId]:
        """Accounts with at least one nonzero entry."""
        mask = np.any(self.entries != 0, axis=1)
        return frozenset(a for a, active in zip(self.accounts, mask) if active)

    def participation_rate(self) -> float:
        if not self.accounts:
            return 0.0
        return len(self.active_accounts()) / len(self.accounts)

    def __eq__(self, other) -> bool:
        if not isinstance(other, VoteMatrix):
            return NotImplemented
        return (
            self.accounts == other.accounts
            and self.column_labels == other.column_labels
            and self.mode == other.mode
            and np.array_equal(self.entries, other.entries)
        )


@dataclass(frozen=True)
class Partition:
    """
    Disjoint, non-empty blocs of accounts.

    Built by any clustering function and consumed by every entropy
    measure. ``labels`` optionally names the blocs.
    """
    blocs: Tuple[FrozenSet[AccountId], ...]
    labels: Optional[Tuple[str, ...]] = None

    def __post_init__(self):
        blocs = tuple(frozenset(b) for b in self.blocs)
        seen = set()
        for bloc in blocs:
            if not bloc:
                raise ParameterError("Partitions cannot contain an empty bloc")
            if seen & bloc:
                raise ParameterError(f"Blocs overlap on {sorted(seen & bloc)}")
            seen |= bloc
        object.__setattr__(self, 'blocs', blocs)
        if self.labels is not None:
            labels = tuple(self.labels)
            if len(labels) != len(blocs):
                raise ParameterError("One label per bloc is required")
            object.__setattr__(self, 'labels', labels)

    @classmethod
    def from_labels(cls, accounts: Sequence[AccountId], labels: Sequence) -> 'Partition':
        """Group accounts sharing a label; blocs are ordered by first appearance."""
        if len(accounts) != len(labels):
            raise ParameterError("accounts and labels must have equal length")
        groups: Dict = {}
        for account, label in zip(accounts, labels):
            groups.setdefault(label, []).append(account)
        return cls(
            blocs=tuple(frozenset(members) for members in groups.values()),
            labels=tuple(str(label) for label in groups),
        )

    @classmethod
    def singletons(cls, accounts: Iterable[AccountId]) -> 'Partition':
        return cls(blocs=tuple(frozenset([a]) for a in accounts))

    @property
    def universe(self) -> FrozenSet[AccountId]:
        return frozenset().union(*self.blocs)

    def validate_cover(self, universe: Iterable[AccountId]) -> None:
        expected = frozenset(universe)
        if self.universe != expected:
            missing = sorted(expected - self.universe)
            extra = sorted(self.universe - expected)
            raise ParameterError(f"Partition does not cover its universe (missing={missing}, extra={extra})")

    def bloc_of(self, account: AccountId) -> int:
        for index, bloc in enumerate(self.blocs):
            if account in bloc:
                return index
        raise KeyError(account)

    def __len__(self) -> int:
        return len(self.blocs)


@dataclass(frozen=True)
class WindowSpec:
    length: int = 10
    stride: int = 10
    drop_partial_tail: bool = True

    def __post_init__(self):
        if self.length < 1:
            raise ParameterError(f"Window length must be >= 1, got {self.length}")
        if self.stride < 1:
            raise ParameterError(f"Window stride must be >= 1, got {self.stride}")

    def bounds(self, n_elections: int) -> List[Tuple[int, int]]:
        """
        Half-open [start, stop) index ranges of every window.

        Full windows start at 0, stride, 2*stride, ... When the tail is
        kept and full windows stop short of the end, one shorter window
        starts at the next stride position if that is still inside the series.
        """
        spans = [(start, start + self.length) for start in range(0, n_elections - self.length + 1, self.stride)]
        covered = spans[-1][1] if spans else 0
        if not self.drop_partial_tail and covered < n_elections:
            start = spans[-1][0] + self.stride if spans else 0
            if start < n_elections:
                spans.append((start, min(start + self.length, n_elections)))
        return spans


def encode_choice(choice: ChoiceValue, arity: int = 2) -> int:
    """
    Encode a vote as its ternary ordinal utility.

    For -> +1, Against -> -1, Abstain or no record -> 0. Choice indices
    on multi-choice elections map 0 -> +1, 1 -> -1 and anything else to 0.

    Args:
        choice: Canonical choice, choice index, or None for no record
        arity: Number of choices in the election

    Returns:
        -1, 0 or +1
    """
    if choice is None:
        return 0
    if isinstance(choice, Choice):
        return {Choice.FOR: 1, Choice.AGAINST: -1, Choice.ABSTAIN: 0}[choice]
    if isinstance(choice, tuple):
        raise ArityError("Allocation ballots can only be encoded in allocation mode")
    index = int(choice)
    if index < 0 or index >= arity:
        raise ArityError(f"Choice index {index} is out of range for arity {arity}")
    if arity == 2 and index >= 2:
        raise ArityError(f"Choice index {index} on a binary election")
    return {0: 1, 1: -1}.get(index, 0)


def latest_votes(records: Iterable[VoteRecord]) -> Dict[Tuple[AccountId, ElectionId], VoteRecord]:
    """One record per (voter, election): greatest timestamp, ties to the later record."""
    latest: Dict[Tuple[AccountId, ElectionId], VoteRecord] = {}
    for record in records:
        key = (record.voter, record.election)
        previous = latest.get(key)
        if previous is None or _ts(record) >= _ts(previous):
            latest[key] = record
    return latest


def _ts(record: VoteRecord) -> float:
    return -math.inf if record.timestamp is None else record.timestamp


def _index_elections(elections: Sequence) -> Tuple[Tuple[ElectionId, ...], Dict[ElectionId, int]]:
    ids = tuple(e.id if isinstance(e, Election) else e for e in elections)
    arity = {e.id: e.arity for e in elections if isinstance(e, Election)}
    return ids, arity


def build_vote_matrix(records: Iterable[VoteRecord], elections: Sequence, accounts: Sequence[AccountId]) -> VoteMatrix:
    """
    Build the ternary vote-history matrix.

    Args:
        records: Vote records; duplicates resolved by latest timestamp
        elections: Ordered Election objects (or bare ids for binary elections)
        accounts: Ordered account universe, one row each

    Returns:
        VoteMatrix in binary mode
    """
    election_ids, arity = _index_elections(elections)
    col = {eid: j for j, eid in enumerate(election_ids)}
    row = {a: i for i, a in enumerate(accounts)}
    entries = np.zeros((len(row), len(col)), dtype=float)

    for (voter, election), record in latest_votes(records).items():
        if election not in col:
            raise ReferentialIntegrityError(f"Vote by {voter} references unknown election {election}")
        if voter not in row:
            raise ReferentialIntegrityError(f"Voter {voter} is not part of the account universe")
        entries[row[voter], col[election]] = encode_choice(record.choice, arity.get(election, 2))

    return VoteMatrix(accounts=tuple(accounts), elections=election_ids, entries=entries)


def build_allocation_matrix(records: Iterable[VoteRecord], elections: Sequence[Election],
                            accounts: Sequence[AccountId]) -> VoteMatrix:
    """
    Build the allocation-mode matrix: each election expands into ``arity``
    columns holding one-hot choices or copied allocation vectors. Abstain
    on an election without a third column leaves the row empty.
    """
    offsets = {}
    labels: List[str] = []
    for election in elections:
        offsets[election.id] = len(labels)
        labels.extend(f"{election.id}:{j}" for j in range(election.arity))
    arity = {e.id: e.arity for e in elections}
    row = {a: i for i, a in enumerate(accounts)}
    entries = np.zeros((len(row), len(labels)), dtype=float)
    choice_slot = {Choice.FOR: 0, Choice.AGAINST: 1, Choice.ABSTAIN: 2}

    for (voter, election), record in latest_votes(records).items():
        if election not in offsets:
            raise ReferentialIntegrityError(f"Vote by {voter} references unknown election {election}")
        if voter not in row:
            raise ReferentialIntegrityError(f"Voter {voter} is not part of the account universe")
        start, width = offsets[election], arity[election]
        choice = record.choice
        if choice is None:
            continue
        if isinstance(choice, tuple):
            if len(choice) != width:
                raise ArityError(f"Allocation of length {len(choice)} on election {election} with arity {width}")
            entries[row[voter], start:start + width] = choice
            continue
        slot = choice_slot[choice] if isinstance(choice, Choice) else int(choice)
        if choice is Choice.ABSTAIN and slot >= width:
            continue
        if slot >= width:
            raise ArityError(f"Choice {choice} does not fit election {election} with arity {width}")
        entries[row[voter], start + slot] = 1.0

    return VoteMatrix(
        accounts=tuple(accounts),
        elections=tuple(e.id for e in elections),
        entries=entries,
        mode=ALLOCATION_MODE,
        column_labels=tuple(labels),
    )


def bloc_tokens(partition: Partition, tokens: TokenMap, lenient: bool = False) -> np.ndarray:
    """
    Total balance held by each bloc, in bloc order.

    Args:
        partition: Blocs over a subset of the token holders
        tokens: Balances
        lenient: Treat accounts without a balance as holding zero

    Returns:
        Float vector of bloc masses
    """
    masses = []
    for bloc in partition.blocs:
        amounts = []
        for account in bloc:
            amount = tokens.get(account)
            if amount is None:
                if not lenient:
                    raise MissingBalanceError(f"Account {account} has no recorded balance")
                logger.warning("Zero-filling missing balance for %s", account)
                amount = 0.0
            amounts.append(amount)
        masses.append(math.fsum(amounts))
    return np.array(masses, dtype=float)


def unpartitioned_mass(partition: Partition, tokens: TokenMap) -> float:
    """Mass held by token holders outside the partition (the inactive pool)."""
    covered = partition.universe
    return math.fsum(b for a, b in tokens.balances.items() if a not in covered)
