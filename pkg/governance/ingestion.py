"""
Load, validate and canonicalize governance datasets from CSV files.

Canonical headers:
    votes.csv      proposal_id,voter,choice,voting_power,timestamp
    balances.csv   address,balance
    proposals.csv  proposal_id,ordinal,title,round_tag,arity,allocation
    ballots.csv    voter,project,amount

All files are UTF-8. Malformed vote rows are collected as RowError
entries rather than dropped.
"""
import logging
import math
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from .choices import ALIAS_TABLE_VERSION, Choice, RoundTag, parse_choice, parse_round_tag
from .core import AccountId, Election, TokenMap, VoteRecord, canonical_address
from .exceptions import (
    ArityError,
    EmptyInputError,
    MissingBalanceError,
    ReferentialIntegrityError,
    ReportWriteError,
    RowValidationError,
    SchemaError,
    ValidationFailure,
    VbeError,
)

logger = logging.getLogger(__name__)

VOTE_COLUMNS = ('proposal_id', 'voter', 'choice', 'voting_power', 'timestamp')
REQUIRED_VOTE_COLUMNS = ('proposal_id', 'voter', 'choice')
BALANCE_COLUMNS = ('address', 'balance')
PROPOSAL_COLUMNS = ('proposal_id', 'ordinal', 'title', 'round_tag', 'arity', 'allocation')
REQUIRED_PROPOSAL_COLUMNS = ('proposal_id', 'ordinal')
BALLOT_COLUMNS = ('voter', 'project', 'amount')


@dataclass(frozen=True)
class RowError:
    """A rejected input row. ``row`` is the 1-based line number in the file."""
    row: int
    reason: str
    source: str = ''

    def __str__(self):
        prefix = f"{self.source}:" if self.source else 'line '
        return f"{prefix}{self.row}: {self.reason}"


@dataclass
class VoteLoadResult:
    """Accepted records plus the rows that were rejected, with reasons."""
    records: List[VoteRecord]
    errors: List[RowError]
    rows_in: int
    display_names: Dict[AccountId, str] = field(default_factory=dict)

    @property
    def rows_accepted(self) -> int:
        return len(self.records)

    @property
    def rows_rejected(self) -> int:
        return len(self.errors)

    def __iter__(self):
        return iter(self.records)

    def __len__(self):
        return len(self.records)

    def __getitem__(self, index):
        return self.records[index]


@dataclass(frozen=True)
class Dataset:
    """
    A governance dataset: proposals in ordinal order, votes, balances.

    ``balances`` is None for partial datasets loaded from platform
    exports. ``display_names`` maps canonical addresses back to the
    spelling found in the input.
    """
    proposals: Tuple[Election, ...]
    votes: Tuple[VoteRecord, ...]
    balances: Optional[TokenMap] = None
    provenance: Tuple[str, ...] = ()
    display_names: Mapping[AccountId, str] = field(default_factory=dict)
    rejected: Tuple[RowError, ...] = ()

    def elections_for_round(self, round_tag) -> Tuple[Election, ...]:
        return tuple(p for p in self.proposals if p.round_tag == round_tag)

    def votes_for(self, elections: Sequence[Election]) -> Tuple[VoteRecord, ...]:
        ids = {e.id for e in elections}
        return tuple(v for v in self.votes if v.election in ids)

    @property
    def voters(self) -> Tuple[AccountId, ...]:
        return tuple(dict.fromkeys(v.voter for v in self.votes))


@dataclass
class ValidationReport:
    errors: List[str] = field(default_factory=list)
    warnings: List[str] = field(default_factory=list)
    zero_filled: List[AccountId] = field(default_factory=list)
    alias_table_version: str = ALIAS_TABLE_VERSION

    @property
    def ok(self) -> bool:
        return not self.errors

    def to_dict(self) -> dict:
        return {
            'errors': list(self.errors),
            'warnings': list(self.warnings),
            'zero_filled': list(self.zero_filled),
            'alias_table_version': self.alias_table_version,
        }


@dataclass(frozen=True)
class BallotMatrix:
    """Voters x projects allocation amounts (RetroPGF-style ballots)."""
    voters: Tuple[AccountId, ...]
    projects: Tuple[str, ...]
    amounts: np.ndarray


def _read_csv(path, columns: Sequence[str], required: Sequence[str]) -> pd.DataFrame:
    path = Path(path)
    try:
        frame = pd.read_csv(path, dtype=str, keep_default_na=False, encoding='utf-8', skipinitialspace=True)
    except pd.errors.EmptyDataError:
        raise EmptyInputError(f"{path.name} is empty") from None
    except (pd.errors.ParserError, UnicodeDecodeError) as e:
        raise SchemaError(f"{path.name} could not be parsed: {e}") from e

    frame.columns = [str(c).strip().lower() for c in frame.columns]
    missing = [c for c in required if c not in frame.columns]
    if missing:
        raise SchemaError(f"{path.name} is missing required column(s): {', '.join(missing)}")
    unknown = [c for c in frame.columns if c not in columns]
    if unknown:
        logger.info("Ignoring extra columns in %s: %s", path.name, unknown)
    return frame


def _parse_float(text: str, what: str) -> float:
    try:
        value = float(text)
    except ValueError:
        raise RowValidationError(f"{what} {text!r} is not a number") from None
    if not math.isfinite(value):
        raise RowValidationError(f"{what} {text!r} is not finite")
    return value


_FLAG_VALUES = {'': False, 'false': False, '0': False, 'no': False, 'true': True, '1': True, 'yes': True}


def _parse_flag(text: str, what: str) -> bool:
    key = text.strip().lower()
    if key not in _FLAG_VALUES:
        raise RowValidationError(f"{what} {text!r} is not true or false")
    return _FLAG_VALUES[key]


def _parse_choice_cell(text: str):
    text = text.strip()
    if ';' in text:
        parts = tuple(_parse_float(p, 'allocation entry') for p in text.split(';'))
        if any(p < 0 for p in parts):
            raise RowValidationError("allocation entries must be >= 0")
        return parts
    if text.isdigit():
        return int(text)
    return parse_choice(text)


def load_votes_csv(path) -> VoteLoadResult:
    """
    Parse a votes file.

    Choice cells accept alias-table labels (case-insensitive), 0-based
    choice indices for multi-choice elections, or ``;``-separated
    allocation vectors.

    Args:
        path: Path to votes.csv

    Returns:
        VoteLoadResult with accepted records and per-row errors
    """
    frame = _read_csv(path, VOTE_COLUMNS, REQUIRED_VOTE_COLUMNS)
    source = Path(path).name
    records: List[VoteRecord] = []
    errors: List[RowError] = []
    display_names: Dict[AccountId, str] = {}

    for offset, row in enumerate(frame.to_dict('records')):
        line = offset + 2
        try:
            proposal = row['proposal_id'].strip()
            if not proposal:
                raise RowValidationError("proposal_id is empty")
            voter = canonical_address(row['voter'])
            choice = _parse_choice_cell(row['choice'])
            power_text = row.get('voting_power', '').strip()
            power = _parse_float(power_text, 'voting_power') if power_text else None
            if power is not None and power < 0:
                raise RowValidationError(f"voting_power must be >= 0, got {power_text}")
            ts_text = row.get('timestamp', '').strip()
            timestamp = int(_parse_float(ts_text, 'timestamp')) if ts_text else None
            records.append(VoteRecord(proposal, voter, choice, power, timestamp))
            display_names.setdefault(voter, row['voter'].strip())
        except VbeError as e:
            errors.append(RowError(line, str(e), source))

    if errors:
        logger.warning("Rejected %d of %d vote rows in %s", len(errors), len(frame), source)
    return VoteLoadResult(records, errors, rows_in=len(frame), display_names=display_names)


def _read_balances(path) -> Tuple[TokenMap, Dict[AccountId, str]]:
    frame = _read_csv(path, BALANCE_COLUMNS, BALANCE_COLUMNS)
    source = Path(path).name
    if frame.empty:
        raise EmptyInputError(f"{source} contains no balances")

    amounts: Dict[AccountId, List[float]] = {}
    display_names: Dict[AccountId, str] = {}
    for offset, row in enumerate(frame.to_dict('records')):
        line = offset + 2
        try:
            account = canonical_address(row['address'])
            value = _parse_float(row['balance'].strip(), 'balance')
        except VbeError as e:
            raise RowValidationError(f"{source}:{line}: {e}", row=line) from e
        if value < 0:
            raise RowValidationError(f"{source}:{line}: negative balance {row['balance']!r}", row=line)
        amounts.setdefault(account, []).append(value)
        display_names.setdefault(account, row['address'].strip())

    return TokenMap({a: math.fsum(v) for a, v in amounts.items()}), display_names


def load_balances_csv(path) -> TokenMap:
    """
    Parse a balances file; duplicate addresses are summed.

    Raises:
        EmptyInputError: the file has no data rows
        RowValidationError: a balance is negative or unparseable
    """
    tokens, _ = _read_balances(path)
    return tokens


def load_proposals_csv(path) -> List[Election]:
    """
    Parse a proposals file into Elections sorted by ordinal.

    A missing round_tag column tags every proposal ``unspecified``. An
    optional ``arity`` column marks multi-choice proposals and an optional
    ``allocation`` column (true/false) marks proposals whose votes split
    weight across the choices. Allocation proposals must state their arity.
    """
    frame = _read_csv(path, PROPOSAL_COLUMNS, REQUIRED_PROPOSAL_COLUMNS)
    source = Path(path).name
    elections: List[Election] = []
    for offset, row in enumerate(frame.to_dict('records')):
        line = offset + 2
        try:
            ordinal_value = _parse_float(row['ordinal'].strip(), 'ordinal')
            if not ordinal_value.is_integer():
                raise RowValidationError(f"ordinal {row['ordinal']!r} is not an integer")
            arity_text = row.get('arity', '').strip()
            allocation = _parse_flag(row.get('allocation', ''), 'allocation')
            if allocation and not arity_text:
                raise RowValidationError("allocation proposals need an arity")
            elections.append(Election(
                id=row['proposal_id'].strip(),
                ordinal=int(ordinal_value),
                round_tag=parse_round_tag(row.get('round_tag', '')),
                arity=int(arity_text) if arity_text else 2,
                allocation=allocation,
                title=row.get('title', '').strip(),
            ))
        except (VbeError, ValueError) as e:
            raise RowValidationError(f"{source}:{line}: {e}", row=line) from e

    elections.sort(key=lambda e: e.ordinal)
    _check_proposals(elections)
    return elections


def _check_proposals(elections: Sequence[Election]) -> None:
    ids = [e.id for e in elections]
    if len(set(ids)) != len(ids):
        raise ValidationFailure("Proposal ids must be unique")
    ordinals = [e.ordinal for e in elections]
    if any(b <= a for a, b in zip(ordinals, ordinals[1:])):
        raise ValidationFailure("Proposal ordinals must be strictly increasing")


def load_ballots_csv(path) -> BallotMatrix:
    """Parse allocation ballots; repeated (voter, project) amounts are summed."""
    frame = _read_csv(path, BALLOT_COLUMNS, BALLOT_COLUMNS)
    source = Path(path).name
    if frame.empty:
        raise EmptyInputError(f"{source} contains no ballots")
    rows = []
    for offset, row in enumerate(frame.to_dict('records')):
        line = offset + 2
        try:
            amount = _parse_float(row['amount'].strip(), 'amount')
            if amount < 0:
                raise RowValidationError(f"negative amount {row['amount']!r}")
            rows.append((canonical_address(row['voter']), row['project'].strip(), amount))
        except VbeError as e:
            raise RowValidationError(f"{source}:{line}: {e}", row=line) from e

    table = (
        pd.DataFrame(rows, columns=list(BALLOT_COLUMNS))
        .pivot_table(index='voter', columns='project', values='amount', aggfunc='sum', fill_value=0.0)
        .sort_index(axis=0)
        .sort_index(axis=1)
    )
    return BallotMatrix(
        voters=tuple(table.index),
        projects=tuple(table.columns),
        amounts=table.to_numpy(dtype=float),
    )


def _check_allocations(proposals: Sequence[Election], votes: Sequence[VoteRecord]) -> None:
    """Allocation vectors only on allocation proposals, one entry per choice."""
    by_id = {p.id: p for p in proposals}
    for vote in votes:
        if not isinstance(vote.choice, tuple):
            continue
        election = by_id[vote.election]
        if not election.allocation:
            raise ArityError(
                f"Vote by {vote.voter} on proposal {election.id} is an allocation vector, "
                f"but the proposal is not marked as an allocation proposal"
            )
        if len(vote.choice) != election.arity:
            raise ArityError(
                f"Vote by {vote.voter} on proposal {election.id} allocates over {len(vote.choice)} "
                f"choice(s); the proposal has {election.arity}"
            )


def validate_dataset(dataset: Dataset, lenient: bool = False) -> Tuple[Dataset, ValidationReport]:
    """
    Enforce referential integrity and return the canonical dataset.

    Canonical form: proposals sorted by ordinal and every voter present in
    the balances. Running it on a canonical dataset changes nothing.

    Args:
        dataset: Dataset with balances attached
        lenient: Zero-fill voters missing from balances instead of failing

    Returns:
        (canonical Dataset, ValidationReport)
    """
    report = ValidationReport()
    if dataset.balances is None:
        raise ValidationFailure("Dataset has no balances attached")

    proposals = tuple(sorted(dataset.proposals, key=lambda e: e.ordinal))
    _check_proposals(proposals)

    known = {p.id for p in proposals}
    dangling = sorted({v.election for v in dataset.votes if v.election not in known})
    if dangling:
        raise ReferentialIntegrityError(f"Votes reference unknown proposal(s): {', '.join(dangling)}")
    _check_allocations(proposals, dataset.votes)

    missing = [a for a in dict.fromkeys(v.voter for v in dataset.votes) if a not in dataset.balances]
    balances = dataset.balances
    if missing:
        if not lenient:
            raise MissingBalanceError(f"{len(missing)} voter(s) have no balance, e.g. {missing[0]}")
        for account in missing:
            logger.warning("Voter %s missing from balances; zero-filled", account)
        report.zero_filled.extend(missing)
        report.warnings.append(f"zero-filled {len(missing)} voter(s) missing from balances")
        balances = balances.with_balances({a: 0.0 for a in missing})

    for error in dataset.rejected:
        report.warnings.append(str(error))

    canonical = replace(dataset, proposals=proposals, balances=balances)
    return canonical, report


def load_dataset(votes_path, balances_path, proposals_path, lenient: bool = False) -> Tuple[Dataset, ValidationReport]:
    """
    Load the three canonical CSV files and validate them together.

    In strict mode a rejected vote row fails the whole load; in lenient
    mode rejected rows are listed as warnings.
    """
    votes = load_votes_csv(votes_path)
    if votes.errors and not lenient:
        first = votes.errors[0]
        raise RowValidationError(f"{len(votes.errors)} malformed vote row(s); first: {first}", row=first.row)

    tokens, names = _read_balances(balances_path)
    proposals = load_proposals_csv(proposals_path)
    display_names = dict(votes.display_names)
    display_names.update(names)

    dataset = Dataset(
        proposals=tuple(proposals),
        votes=tuple(votes.records),
        balances=tokens,
        provenance=tuple(str(Path(p)) for p in (votes_path, balances_path, proposals_path)),
        display_names=display_names,
        rejected=tuple(votes.errors),
    )
    logger.info("Loaded %d proposals, %d votes, %d balances", len(proposals), len(votes.records), len(tokens))
    return validate_dataset(dataset, lenient=lenient)


def round_tags(dataset: Dataset) -> List[RoundTag]:
    return list(dict.fromkeys(p.round_tag for p in dataset.proposals))


def _number(value: float) -> str:
    value = float(value)
    return str(int(value)) if value.is_integer() else repr(value)


def _choice_cell(choice) -> str:
    if isinstance(choice, Choice):
        return choice.value
    if isinstance(choice, tuple):
        return ';'.join(_number(x) for x in choice)
    return str(choice)


def _optional(value) -> str:
    return '' if value is None else _number(value)


def write_dataset_csv(dataset: Dataset, directory) -> Tuple[Path, Path, Path]:
    """
    Write votes.csv, balances.csv and proposals.csv in the canonical
    layout, so the files load back with load_dataset.

    Returns:
        (votes path, balances path, proposals path)
    """
    if dataset.balances is None:
        raise ValidationFailure("Dataset has no balances attached")
    directory = Path(directory)
    frames = {
        'votes.csv': pd.DataFrame(
            [
                (v.election, v.voter, _choice_cell(v.choice), _optional(v.voting_power), _optional(v.timestamp))
                for v in dataset.votes
            ],
            columns=VOTE_COLUMNS,
        ),
        'balances.csv': pd.DataFrame(
            [(dataset.display_names.get(a, a), _number(b)) for a, b in dataset.balances.balances.items()],
            columns=BALANCE_COLUMNS,
        ),
        'proposals.csv': pd.DataFrame(
            [
                (e.id, e.ordinal, e.title, e.round_tag.value, e.arity, 'true' if e.allocation else 'false')
                for e in dataset.proposals
            ],
            columns=PROPOSAL_COLUMNS,
        ),
    }
    try:
        directory.mkdir(parents=True, exist_ok=True)
        for name, frame in frames.items():
            frame.to_csv(directory / name, index=False, lineterminator='\n')
    except OSError as e:
        raise ReportWriteError(f"Cannot write dataset to {directory}: {e}") from e
    logger.info("Wrote %d proposals and %d votes to %s", len(dataset.proposals), len(dataset.votes), directory)
    return tuple(directory / name for name in frames)
