"""
Entropy measures over token-weighted partitions and the Voting-Bloc
Entropy (VBE) evaluation built on them.

All values are in bits. Higher values mean token mass is spread over
more blocs; a single bloc holding everything scores 0.
"""
import logging
import math
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from governance.core import Partition, TokenMap, bloc_tokens
from governance.exceptions import DegenerateDistributionError, ParameterError

logger = logging.getLogger(__name__)

MIN_ENTROPY = 'min_entropy'
SHANNON = 'shannon'
RENYI = 'renyi'
KINDS = (MIN_ENTROPY, SHANNON, RENYI)


@dataclass(frozen=True)
class EntropyMeasure:
    """
    An entropy measure F. Renyi entropy needs ``alpha`` >= 0 with
    alpha != 1; alpha -> 1 is Shannon and alpha -> inf is min-entropy.
    """
    kind: str = MIN_ENTROPY
    alpha: Optional[float] = None
    normalize: bool = False

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ParameterError(f"Unknown entropy measure {self.kind!r}")
        if self.kind == RENYI:
            if self.alpha is None or math.isnan(self.alpha) or self.alpha < 0:
                raise ParameterError("Renyi entropy needs alpha >= 0")
            if self.alpha == 1:
                raise ParameterError("Renyi alpha = 1 is Shannon entropy; use 'shannon'")
        elif self.alpha is not None:
            raise ParameterError(f"{self.kind} takes no alpha")

    @classmethod
    def parse(cls, text: str, normalize: bool = False) -> 'EntropyMeasure':
        """Parse ``min_entropy``, ``shannon`` or ``renyi:<alpha>``."""
        name, _, arg = text.strip().lower().partition(':')
        name = name.replace('-', '_')
        if name == RENYI:
            try:
                alpha = float(arg)
            except ValueError:
                raise ParameterError(f"Bad Renyi order in {text!r}") from None
            return cls(RENYI, alpha, normalize)
        if arg:
            raise ParameterError(f"{name} takes no argument")
        return cls(name, None, normalize)

    @property
    def column(self) -> str:
        """Report column name, e.g. ``min_entropy`` or ``renyi_2``."""
        if self.kind == RENYI:
            return f"renyi_{format(self.alpha, 'g')}"
        return self.kind

    def __str__(self):
        if self.kind == RENYI:
            return f"renyi:{format(self.alpha, 'g')}"
        return self.kind

    def evaluate(self, shares: np.ndarray) -> float:
        """Raw (unnormalized) entropy of a share vector with no zero entries."""
        if self.kind == MIN_ENTROPY:
            return _min_entropy(shares)
        if self.kind == SHANNON:
            return _shannon(shares)
        return _renyi(self.alpha, shares)


@dataclass(frozen=True)
class MetricReport:
    vbe_value: float
    bloc_shares: Tuple[float, ...]
    measure: EntropyMeasure
    bloc_count: int
    largest_bloc_share: float

    @property
    def partition_summary(self) -> dict:
        return {
            'bloc_count': self.bloc_count,
            'largest_bloc_share': self.largest_bloc_share,
        }


def bloc_shares(partition: Partition, tokens: TokenMap, lenient: bool = False) -> np.ndarray:
    """
    Token share of each non-empty-mass bloc over the partitioned universe.

    Zero-mass blocs are dropped so 0 * log 0 never has to be evaluated.
    """
    if len(partition) == 0:
        raise DegenerateDistributionError("Partition has no blocs")
    masses = bloc_tokens(partition, tokens, lenient=lenient)
    total = math.fsum(masses)
    if total <= 0:
        raise DegenerateDistributionError("All bloc masses are zero")
    masses = masses[masses > 0]
    return masses / total


def _min_entropy(shares: np.ndarray) -> float:
    value = -math.log2(float(shares.max()))
    return value if value > 0 else 0.0


def _shannon(shares: np.ndarray) -> float:
    value = -math.fsum(shares * np.log2(shares))
    return value if value > 0 else 0.0


def _renyi(alpha: float, shares: np.ndarray) -> float:
    if alpha == 0:
        return math.log2(len(shares))
    if math.isinf(alpha):
        return _min_entropy(shares)
    # log-sum-exp keeps large orders from underflowing
    log_sum = float(np.logaddexp.reduce(alpha * np.log(shares)))
    value = log_sum / math.log(2) / (1 - alpha)
    return value if value > 0 else 0.0


def min_entropy(partition: Partition, tokens: TokenMap) -> float:
    """-log2 of the largest bloc's token share."""
    return _min_entropy(bloc_shares(partition, tokens))


def shannon_entropy(partition: Partition, tokens: TokenMap) -> float:
    return _shannon(bloc_shares(partition, tokens))


def renyi_entropy(alpha: float, partition: Partition, tokens: TokenMap) -> float:
    """
    Renyi entropy of order ``alpha``.

    Args:
        alpha: Order, >= 0 and != 1 (0 gives log2 of the nonzero bloc count)
        partition: Blocs to weigh
        tokens: Balances

    Returns:
        Entropy in bits
    """
    measure = EntropyMeasure(RENYI, float(alpha))
    return measure.evaluate(bloc_shares(partition, tokens))


def vbe(partition: Partition, tokens: TokenMap, measure: EntropyMeasure, lenient: bool = False) -> MetricReport:
    """
    Voting-Bloc Entropy: the measure F applied to bloc token masses.

    With ``measure.normalize`` the value is divided by log2 of the number
    of nonzero-mass blocs when there are at least two.

    Args:
        partition: Output of any clustering function
        tokens: Balances covering the partition
        measure: Entropy measure
        lenient: Zero-fill accounts without a balance

    Returns:
        MetricReport
    """
    shares = bloc_shares(partition, tokens, lenient=lenient)
    value = measure.evaluate(shares)
    if measure.normalize and len(shares) >= 2:
        value /= math.log2(len(shares))
    return MetricReport(
        vbe_value=value,
        bloc_shares=tuple(float(s) for s in shares),
        measure=measure,
        bloc_count=len(partition),
        largest_bloc_share=float(shares.max()),
    )


def trivial_vbe(tokens: TokenMap, measure: EntropyMeasure) -> float:
    """VBE under the clustering that gives every account its own bloc."""
    return vbe(Partition.singletons(tokens.accounts), tokens, measure).vbe_value
