"""
Readers for governance platform exports.

Two JSON shapes are supported:

offchain_snapshot_style
    {"space": str, "proposals": [{"id", "title", "choices": [str], "start"}],
     "votes": [{"proposal", "voter", "choice": 1-based int, "vp", "created"}]}

onchain_tally_style
    {"decimals": int, "proposals": [{"id", "title", "start_block"}],
     "votes": [{"proposal_id", "voter", "support": 0|1|2, "weight", "block_timestamp"}]}

Off-chain proposals are tagged as the temperature-check round and
on-chain proposals as the binding round. combine_exports stacks several
exports and attaches a balances file so the result can be windowed.
"""
import json
import logging
from dataclasses import replace
from decimal import Decimal, InvalidOperation
from pathlib import Path
from typing import Dict, List, Sequence, Tuple

from .choices import Choice, RoundTag, parse_choice
from .core import Election, VoteRecord, canonical_address
from .exceptions import ParameterError, RowValidationError, SchemaError, UnknownChoiceError, VbeError
from .ingestion import Dataset, RowError, ValidationReport, load_balances_csv, validate_dataset

logger = logging.getLogger(__name__)

OFFCHAIN_SNAPSHOT_STYLE = 'offchain_snapshot_style'
ONCHAIN_TALLY_STYLE = 'onchain_tally_style'
DIALECTS = (OFFCHAIN_SNAPSHOT_STYLE, ONCHAIN_TALLY_STYLE)

# Governor-style support values
ONCHAIN_SUPPORT = {
    0: Choice.AGAINST,
    1: Choice.FOR,
    2: Choice.ABSTAIN,
}


def _require(payload: dict, keys, where: str):
    missing = [k for k in keys if k not in payload]
    if missing:
        raise SchemaError(f"{where} is missing field(s): {', '.join(missing)}")


def _timestamp(value):
    """Integer seconds; digit strings and integral floats are accepted."""
    if value is None:
        return None
    if isinstance(value, int) and not isinstance(value, bool):
        return value
    if isinstance(value, float) and value.is_integer():
        return int(value)
    if isinstance(value, str) and value.strip().isdigit():
        return int(value.strip())
    raise SchemaError(f"timestamp {value!r} is not an integer")


def _ordinals(proposals: List[dict], start_key: str) -> Dict[str, int]:
    order = sorted(range(len(proposals)), key=lambda i: (proposals[i].get(start_key, 0) or 0, i))
    return {str(proposals[i]['id']): rank for rank, i in enumerate(order)}


def _offchain_choices(labels) -> Tuple[List, int]:
    """Canonical choices for a proposal, or None entries when the proposal is multi-choice."""
    try:
        return [parse_choice(label) for label in labels], len(labels)
    except UnknownChoiceError:
        return [None] * len(labels), len(labels)


def _load_offchain(payload: dict, source: str) -> Dataset:
    _require(payload, ('proposals', 'votes'), source)
    proposals = payload['proposals']
    for p in proposals:
        _require(p, ('id', 'choices'), f"{source} proposal")
    ordinals = _ordinals(proposals, 'start')

    elections = {}
    choice_maps = {}
    for p in proposals:
        pid = str(p['id'])
        canonical, arity = _offchain_choices(p['choices'])
        if arity < 2:
            raise SchemaError(f"{source} proposal {pid} has fewer than two choices")
        elections[pid] = Election(pid, ordinals[pid], RoundTag.OFFCHAIN, arity=arity, title=p.get('title', ''))
        choice_maps[pid] = canonical

    votes: List[VoteRecord] = []
    rejected: List[RowError] = []
    for index, v in enumerate(payload['votes']):
        try:
            _require(v, ('proposal', 'voter', 'choice'), f"{source} vote")
            pid = str(v['proposal'])
            position = int(v['choice']) - 1
            if pid in choice_maps:
                if not 0 <= position < len(choice_maps[pid]):
                    raise SchemaError(f"choice {v['choice']} outside 1..{len(choice_maps[pid])}")
                mapped = choice_maps[pid][position]
                choice = mapped if mapped is not None else position
            else:
                choice = position
            power = v.get('vp')
            votes.append(VoteRecord(
                election=pid,
                voter=canonical_address(v['voter']),
                choice=choice,
                voting_power=None if power is None else float(power),
                timestamp=_timestamp(v.get('created')),
            ))
        except (VbeError, TypeError, ValueError) as e:
            rejected.append(RowError(index + 1, str(e), source))

    return Dataset(
        proposals=tuple(sorted(elections.values(), key=lambda e: e.ordinal)),
        votes=tuple(votes),
        provenance=(f"{OFFCHAIN_SNAPSHOT_STYLE}:{source}",),
        rejected=tuple(rejected),
    )


def _scaled_weight(weight, decimals: int):
    if weight is None:
        return None
    try:
        return float(Decimal(str(weight)) / (Decimal(10) ** decimals))
    except InvalidOperation:
        raise SchemaError(f"weight {weight!r} is not a number") from None


def _load_onchain(payload: dict, source: str) -> Dataset:
    _require(payload, ('proposals', 'votes'), source)
    decimals = int(payload.get('decimals', 0))
    proposals = payload['proposals']
    for p in proposals:
        _require(p, ('id',), f"{source} proposal")
    ordinals = _ordinals(proposals, 'start_block')
    elections = tuple(sorted(
        (Election(str(p['id']), ordinals[str(p['id'])], RoundTag.ONCHAIN, title=p.get('title', '')) for p in proposals),
        key=lambda e: e.ordinal,
    ))

    votes: List[VoteRecord] = []
    rejected: List[RowError] = []
    for index, v in enumerate(payload['votes']):
        try:
            _require(v, ('proposal_id', 'voter', 'support'), f"{source} vote")
            support = int(v['support'])
            if support not in ONCHAIN_SUPPORT:
                raise UnknownChoiceError(f"Unknown support value: {v['support']!r}")
            votes.append(VoteRecord(
                election=str(v['proposal_id']),
                voter=canonical_address(v['voter']),
                choice=ONCHAIN_SUPPORT[support],
                voting_power=_scaled_weight(v.get('weight'), decimals),
                timestamp=_timestamp(v.get('block_timestamp')),
            ))
        except (VbeError, TypeError, ValueError) as e:
            rejected.append(RowError(index + 1, str(e), source))

    return Dataset(
        proposals=elections,
        votes=tuple(votes),
        provenance=(f"{ONCHAIN_TALLY_STYLE}:{source}",),
        rejected=tuple(rejected),
    )


def load_platform_export(path, dialect: str) -> Dataset:
    """
    Load a platform export into a partial Dataset (no balances).

    Args:
        path: JSON export file
        dialect: One of DIALECTS

    Returns:
        Dataset with proposals and votes; rejected votes listed in ``rejected``
    """
    loaders = {
        OFFCHAIN_SNAPSHOT_STYLE: _load_offchain,
        ONCHAIN_TALLY_STYLE: _load_onchain,
    }
    if dialect not in loaders:
        raise ParameterError(f"Unknown dialect {dialect!r}; expected one of {', '.join(DIALECTS)}")

    path = Path(path)
    try:
        payload = json.loads(path.read_text(encoding='utf-8'))
    except json.JSONDecodeError as e:
        raise SchemaError(f"{path.name} is not valid JSON: {e}") from e
    if not isinstance(payload, dict):
        raise SchemaError(f"{path.name} must hold a JSON object")

    dataset = loaders[dialect](payload, path.name)
    if dataset.rejected:
        logger.warning("Rejected %d vote(s) in %s", len(dataset.rejected), path.name)
    return dataset


def combine_exports(exports: Sequence[Tuple[object, str]], balances_path,
                    lenient: bool = False) -> Tuple[Dataset, ValidationReport]:
    """
    Merge platform exports into one dataset and attach balances.

    Exports are stacked in the order given: the proposals of each export
    follow those of the previous one. In strict mode any rejected vote
    fails the load; in lenient mode rejected votes become warnings.

    Args:
        exports: (path, dialect) pairs
        balances_path: balances CSV covering every voter
        lenient: Keep going past rejected votes and missing balances

    Returns:
        (canonical Dataset, ValidationReport)
    """
    if not exports:
        raise ParameterError("At least one platform export is required")

    proposals: List = []
    votes: List[VoteRecord] = []
    rejected: List[RowError] = []
    provenance: List[str] = []
    for path, dialect in exports:
        part = load_platform_export(path, dialect)
        offset = len(proposals)
        proposals.extend(replace(p, ordinal=p.ordinal + offset) for p in part.proposals)
        votes.extend(part.votes)
        rejected.extend(part.rejected)
        provenance.extend(part.provenance)

    if rejected and not lenient:
        first = rejected[0]
        raise RowValidationError(f"{len(rejected)} malformed vote(s) in the exports; first: {first}", row=first.row)

    dataset = Dataset(
        proposals=tuple(proposals),
        votes=tuple(votes),
        balances=load_balances_csv(balances_path),
        provenance=tuple(provenance) + (str(Path(balances_path)),),
        rejected=tuple(rejected),
    )
    logger.info("Combined %d export(s): %d proposals, %d votes", len(exports), len(proposals), len(votes))
    return validate_dataset(dataset, lenient=lenient)
