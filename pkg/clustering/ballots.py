"""
Clustering of allocation ballots treated as bag-of-words documents:
projects are terms, allocations are term counts.
"""
import logging

import numpy as np

from governance.exceptions import ParameterError
from governance.ingestion import BallotMatrix

from .distance import DistanceKind, unit_rows
from .kmeans import KMeansConfig, kmeans

logger = logging.getLogger(__name__)


def _amounts(ballots) -> np.ndarray:
    amounts = ballots.amounts if isinstance(ballots, BallotMatrix) else ballots
    amounts = np.asarray(amounts, dtype=float)
    if amounts.ndim != 2:
        raise ParameterError("Ballots must be a 2-D voters x projects matrix")
    if (amounts < 0).any():
        raise ParameterError("Ballot allocations must be non-negative")
    if not amounts.any():
        raise ParameterError("At least one ballot must allocate something")
    return amounts


def normalize_ballots(ballots) -> np.ndarray:
    """
    Down-weight popular projects, then scale each ballot to unit length.

    Column j is multiplied by ln((1 + R) / (1 + r_j)) + 1, where R is the
    number of ballots and r_j the number allocating to project j.

    Args:
        ballots: BallotMatrix or voters x projects array

    Returns:
        Normalized float matrix of the same shape
    """
    amounts = _amounts(ballots)
    ballots_total = amounts.shape[0]
    funded = (amounts > 0).sum(axis=0)
    weights = np.log((1 + ballots_total) / (1 + funded)) + 1
    return unit_rows(amounts * weights)


def cluster_ballots(ballots, config: KMeansConfig = None, kind=DistanceKind.EUCLIDEAN):
    row_ids = ballots.voters if isinstance(ballots, BallotMatrix) else None
    normalized = normalize_ballots(ballots)
    outcome = kmeans(normalized, config or KMeansConfig(), row_ids=row_ids, distance=kind)
    logger.info("Clustered %d ballots into %d blocs", normalized.shape[0], outcome.effective_k)
    return outcome
