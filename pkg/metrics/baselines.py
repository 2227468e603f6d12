"""
Token-distribution baselines: Gini index and Nakamoto coefficient.
"""
import math
from itertools import accumulate

import numpy as np

from governance.core import TokenMap
from governance.exceptions import DegenerateDistributionError, ParameterError


def _balances(tokens: TokenMap) -> np.ndarray:
    if len(tokens) == 0 or tokens.total <= 0:
        raise DegenerateDistributionError("Token distribution has zero total mass")
    return np.array(list(tokens.balances.values()), dtype=float)


def gini(tokens: TokenMap) -> float:
    """
    Gini index of the balance distribution.

    Uses the sorted-gap form of the mean absolute difference: for sorted
    balances with gaps d_k = x_(k+1) - x_(k), the pairwise sum
    sum_i sum_j |x_i - x_j| equals 2 * sum_k d_k * k * (n - k). Equal
    balances have no gaps, so the index is exactly 0.

    Args:
        tokens: Balances with a positive total

    Returns:
        Gini index in [0, 1)
    """
    values = np.sort(_balances(tokens))
    n = len(values)
    gaps = np.diff(values)
    k = np.arange(1, n)
    weighted = math.fsum(gaps * k * (n - k))
    return weighted / (n * n * (math.fsum(values) / n))


def nakamoto(tokens: TokenMap, threshold: float = 0.5) -> int:
    """
    Smallest number of accounts whose combined balance strictly exceeds
    ``threshold`` of the total.
    """
    if not 0 < threshold < 1:
        raise ParameterError(f"threshold must be in (0, 1), got {threshold}")
    values = sorted(_balances(tokens), reverse=True)
    bound = threshold * tokens.total
    for count, running in enumerate(accumulate(values), start=1):
        if running > bound:
            return count
    return len(values)
