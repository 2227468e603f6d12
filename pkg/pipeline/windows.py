"""
Observable VBE over rolling proposal windows.

For each window of consecutive elections the vote-history sub-matrix is
clustered with k-means and every configured entropy measure is applied
to the resulting bloc token masses. A window holding any allocation
proposal is clustered on the per-choice allocation matrix.
"""
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Sequence, Tuple

import numpy as np

from clustering.kmeans import kmeans
from governance.core import (
    AccountId,
    Election,
    TokenMap,
    VoteRecord,
    bloc_tokens,
    build_allocation_matrix,
    build_vote_matrix,
    latest_votes,
)
from governance.exceptions import DegenerateDistributionError, EmptySeriesError, MissingBalanceError
from metrics.entropy import vbe

from .config import PipelineConfig, WeightSource

logger = logging.getLogger(__name__)

STATS = ('avg', 'std', 'min', 'max', 'current')


@dataclass(frozen=True)
class WindowResult:
    window_index: int
    election_ids: Tuple[str, ...]
    first_ordinal: int
    last_ordinal: int
    values: Dict[str, float]
    participation: float
    largest_bloc_share: float
    cluster_sizes: Tuple[int, ...]
    cluster_masses: Tuple[float, ...]
    effective_k: int
    degenerate: bool = False


@dataclass(frozen=True)
class WindowSeries:
    results: Tuple[WindowResult, ...]
    measures: Tuple[str, ...]
    config: Dict = field(default_factory=dict)

    @property
    def aggregates(self) -> Dict[str, Dict[str, float]]:
        return aggregate(self) if self.results else {}

    def values(self, column: str) -> List[float]:
        return [r.values[column] for r in self.results]

    def __len__(self):
        return len(self.results)


def _universe(records: Sequence[VoteRecord], tokens: TokenMap, config: PipelineConfig) -> Tuple[List[AccountId], TokenMap]:
    voters = list(dict.fromkeys(r.voter for r in records))
    missing = [v for v in voters if v not in tokens]
    if missing:
        if not config.lenient:
            raise MissingBalanceError(f"{len(missing)} voter(s) have no balance, e.g. {missing[0]}")
        logger.warning("Zero-filling %d voter(s) missing from balances", len(missing))
        tokens = tokens.with_balances({v: 0.0 for v in missing})

    if config.include_inactive:
        accounts = list(tokens.accounts)
    else:
        voted = set(voters)
        accounts = [a for a in tokens.accounts if a in voted]
    return accounts, tokens


def _window_weights(window_records: Iterable[VoteRecord], accounts: Sequence[AccountId],
                    tokens: TokenMap, source: WeightSource) -> TokenMap:
    if source == WeightSource.STATIC_BALANCES:
        return TokenMap({a: tokens.balances[a] for a in accounts})
    power: Dict[AccountId, List[float]] = {a: [] for a in accounts}
    for record in latest_votes(window_records).values():
        if record.voter in power and record.voting_power is not None:
            power[record.voter].append(record.voting_power)
    return TokenMap({a: math.fsum(p) for a, p in power.items()})


def _evaluate_window(index: int, elections: Sequence[Election], records: Sequence[VoteRecord],
                     accounts: Sequence[AccountId], tokens: TokenMap, config: PipelineConfig) -> WindowResult:
    if any(e.allocation for e in elections):
        matrix = build_allocation_matrix(records, elections, accounts)
    else:
        matrix = build_vote_matrix(records, elections, accounts)
    outcome = kmeans(matrix, config.clustering, distance=config.distance)
    weights = _window_weights(records, accounts, tokens, config.weight_source)
    masses = bloc_tokens(outcome.partition, weights)
    total = math.fsum(masses)
    silent = not matrix.entries.any()

    if total > 0:
        values = {m.column: vbe(outcome.partition, weights, m).vbe_value for m in config.measures}
        largest = float(masses.max() / total)
    else:
        logger.warning("Window %d carries zero weight; recording 0", index)
        values = {m.column: 0.0 for m in config.measures}
        largest = 0.0

    return WindowResult(
        window_index=index,
        election_ids=tuple(e.id for e in elections),
        first_ordinal=elections[0].ordinal,
        last_ordinal=elections[-1].ordinal,
        values=values,
        participation=matrix.participation_rate(),
        largest_bloc_share=largest,
        cluster_sizes=outcome.cluster_sizes,
        cluster_masses=tuple(float(m) for m in masses),
        effective_k=outcome.effective_k,
        degenerate=silent or total <= 0,
    )


def window_series(records: Sequence[VoteRecord], tokens: TokenMap, elections: Sequence[Election],
                  config: PipelineConfig = None) -> WindowSeries:
    """
    Compute oVBE for every window of consecutive elections.

    Args:
        records: Vote records for the elections
        tokens: Balances (used directly or as the account universe)
        elections: Elections; evaluated in ordinal order
        config: PipelineConfig, defaults from settings

    Returns:
        WindowSeries, empty when there are fewer elections than one window
    """
    config = config or PipelineConfig.from_settings()
    if tokens.total <= 0:
        raise DegenerateDistributionError("Token balances sum to zero")

    elections = sorted(elections, key=lambda e: e.ordinal)
    accounts, tokens = _universe(records, tokens, config)
    if not accounts:
        raise DegenerateDistributionError("No accounts left to cluster")
    bounds = config.window.bounds(len(elections))
    if not bounds:
        logger.warning("Only %d election(s) for a window of %d; series is empty", len(elections), config.window.length)
        return WindowSeries(results=(), measures=config.columns, config=config.to_dict())

    by_election: Dict[str, List[VoteRecord]] = {}
    for record in records:
        by_election.setdefault(record.election, []).append(record)

    def run(item):
        index, (start, stop) = item
        chunk = elections[start:stop]
        chunk_records = [r for e in chunk for r in by_election.get(e.id, ())]
        return _evaluate_window(index, chunk, chunk_records, accounts, tokens, config)

    if config.workers > 1:
        with ThreadPoolExecutor(max_workers=config.workers) as pool:
            results = list(pool.map(run, enumerate(bounds)))
    else:
        results = [run(item) for item in enumerate(bounds)]

    logger.info("Evaluated %d window(s) over %d accounts", len(results), len(accounts))
    return WindowSeries(results=tuple(results), measures=config.columns, config=config.to_dict())


def _stats(values: Sequence[float]) -> Dict[str, float]:
    data = np.asarray(values, dtype=float)
    return {
        'avg': float(np.mean(data)),
        'std': float(np.std(data)),
        'min': float(np.min(data)),
        'max': float(np.max(data)),
        'current': float(data[-1]),
    }


def aggregate(series: WindowSeries) -> Dict[str, Dict[str, float]]:
    """
    Mean, population standard deviation, min, max and last value per
    measure, plus the same statistics for participation.
    """
    if not series.results:
        raise EmptySeriesError("Cannot aggregate an empty window series")
    summary = {column: _stats(series.values(column)) for column in series.measures}
    summary['participation'] = _stats([r.participation for r in series.results])
    return summary
