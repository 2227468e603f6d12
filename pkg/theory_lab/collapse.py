"""
Two-round datasets with planted centralization.

Round one is a factional DAO: every voter belongs to one of a few
equal-weight factions, and in each election one faction is the
dissenting minority. Round two replays round one after part of the
electorate falls in line behind each election's plurality. Falling in
line is a property of the voter, not of the vote: a susceptible voter
flips every dissenting vote, everyone else flips none.
"""
import logging
from typing import Dict, List, Tuple

import numpy as np

from clustering.kmeans import SEED_MASK
from governance.choices import Choice, RoundTag
from governance.core import Election, TokenMap, VoteRecord
from governance.exceptions import ParameterError
from governance.ingestion import Dataset

logger = logging.getLogger(__name__)

OFFCHAIN_PREFIX = 'offchain'
ONCHAIN_PREFIX = 'onchain'


def _validate(n_players: int, m_elections: int, collapse_strength: float, factions: int,
              loyalty: float, balance: float) -> None:
    if not 0 <= collapse_strength <= 1:
        raise ParameterError(f"collapse_strength must be in [0, 1], got {collapse_strength}")
    if factions < 2:
        raise ParameterError(f"factions must be >= 2, got {factions}")
    if n_players < factions:
        raise ParameterError(f"Need at least one voter per faction ({n_players} < {factions})")
    if m_elections < 1:
        raise ParameterError("m_elections must be >= 1")
    if not 0 < loyalty <= 1:
        raise ParameterError(f"loyalty must be in (0, 1], got {loyalty}")
    if not balance > 0:
        raise ParameterError(f"balance must be positive, got {balance}")


def _plurality(column: np.ndarray) -> int:
    """+1 or -1 by vote count; ties go to For."""
    return 1 if (column == 1).sum() >= (column == -1).sum() else -1


def _records(votes: np.ndarray, voters, elections: List[Election], balance: float) -> Tuple[VoteRecord, ...]:
    choices = {1: Choice.FOR, -1: Choice.AGAINST}
    return tuple(
        VoteRecord(election=election.id, voter=voter, choice=choices[int(votes[i, j])], voting_power=balance)
        for j, election in enumerate(elections)
        for i, voter in enumerate(voters)
        if votes[i, j] != 0
    )


def _elections(prefix: str, round_tag: RoundTag, m_elections: int, offset: int = 0) -> List[Election]:
    width = max(3, len(str(m_elections - 1)))
    return [
        Election(id=f"{prefix}-{j:0{width}d}", ordinal=offset + j + 1, round_tag=round_tag)
        for j in range(m_elections)
    ]


def _draw_rounds(seed: int, n_players: int, m_elections: int, collapse_strength: float,
                 factions: int, loyalty: float) -> Tuple[np.ndarray, np.ndarray]:
    """Round-one and round-two vote arrays: +1 for, -1 against, 0 no vote."""
    rng = np.random.default_rng(int(seed) & SEED_MASK)
    membership = np.arange(n_players) % factions
    majority = rng.choice([-1, 1], size=m_elections)
    stance = np.where(membership[:, None] == (np.arange(m_elections) % factions)[None, :],
                      -majority[None, :], majority[None, :])

    loyal = rng.random((n_players, m_elections)) < loyalty
    strays = rng.choice([-1, 0], size=(n_players, m_elections))
    first = np.where(loyal, stance, strays * stance)

    # a voter who falls in line does so in every election
    susceptibility = rng.random(n_players)
    second = first.copy()
    for j in range(m_elections):
        winner = _plurality(first[:, j])
        dissent = (first[:, j] == -winner) & (susceptibility < collapse_strength)
        second[dissent, j] = winner
    return first, second


def gen_consensus_collapse_pair(seed: int, n_players: int = 90, m_elections: int = 20,
                                collapse_strength: float = 0.5, factions: int = 3,
                                loyalty: float = 0.9, balance: float = 100.0) -> Tuple[Dataset, Dataset]:
    """
    Generate an off-chain round and an on-chain round over the same voters.

    Each voter draws once and is susceptible with probability
    ``collapse_strength``. A susceptible voter's dissenting round-one
    votes are all flipped to the election's round-one plurality; other
    voters keep every vote. Flips are therefore correlated per voter:
    any single dissenting vote flips with probability
    ``collapse_strength``, but never independently of the same voter's
    other dissenting votes. Abstentions are missing records and are
    never flipped. All voters hold the same balance.

    Args:
        seed: Random seed
        n_players: Number of voters
        m_elections: Elections per round
        collapse_strength: Probability a voter falls in line
        factions: Number of equal factions in round one
        loyalty: Probability a voter follows its faction's stance
        balance: Token balance of every voter

    Returns:
        (round one Dataset, round two Dataset)
    """
    _validate(n_players, m_elections, collapse_strength, factions, loyalty, balance)
    first, second = _draw_rounds(seed, n_players, m_elections, collapse_strength, factions, loyalty)

    width = max(3, len(str(n_players - 1)))
    voters = [f"v{i:0{width}d}" for i in range(n_players)]
    tokens = TokenMap({v: float(balance) for v in voters})
    names: Dict[str, str] = {v: v for v in voters}

    rounds = []
    for votes, prefix, tag in ((first, OFFCHAIN_PREFIX, RoundTag.OFFCHAIN), (second, ONCHAIN_PREFIX, RoundTag.ONCHAIN)):
        elections = _elections(prefix, tag, m_elections)
        rounds.append(Dataset(
            proposals=tuple(elections),
            votes=_records(votes, voters, elections, balance),
            balances=tokens,
            provenance=(f"consensus-collapse seed={seed} strength={collapse_strength}",),
            display_names=names,
        ))
    logger.debug("Collapse pair seed=%s flipped %d vote(s)", seed, int((first != second).sum()))
    return rounds[0], rounds[1]


def consensus_collapse_dataset(seed: int, n_players: int = 90, m_elections: int = 20,
                               collapse_strength: float = 0.5, **kwargs) -> Dataset:
    """Both rounds in one dataset; round-two ordinals follow round one."""
    first, second = gen_consensus_collapse_pair(seed, n_players, m_elections, collapse_strength, **kwargs)
    shifted = tuple(
        Election(id=e.id, ordinal=e.ordinal + m_elections, round_tag=e.round_tag) for e in second.proposals
    )
    return Dataset(
        proposals=first.proposals + shifted,
        votes=first.votes + second.votes,
        balances=first.balances,
        provenance=first.provenance,
        display_names=first.display_names,
    )
