"""
Two-round comparison: the same metric computed separately on the
off-chain temperature-check round and the on-chain binding round.
"""
import logging
from dataclasses import dataclass
from typing import Dict, Tuple

from governance.exceptions import EmptySeriesError, ParameterError

from .windows import WindowSeries, aggregate

logger = logging.getLogger(__name__)

A_MORE_DECENTRALIZED = 'a_more_decentralized'
B_MORE_DECENTRALIZED = 'b_more_decentralized'
TIE = 'tie'
MIXED = 'mixed'

TIE_TOLERANCE = 1e-12


@dataclass(frozen=True)
class MeasureComparison:
    measure: str
    avg_a: float
    avg_b: float
    difference: float
    verdict: str


@dataclass(frozen=True)
class RoundComparison:
    measures: Tuple[MeasureComparison, ...]
    windows_a: int
    windows_b: int

    @property
    def verdict(self) -> str:
        """The shared per-measure verdict, or ``mixed`` when measures disagree."""
        verdicts = {m.verdict for m in self.measures}
        return verdicts.pop() if len(verdicts) == 1 else MIXED

    def by_measure(self) -> Dict[str, MeasureComparison]:
        return {m.measure: m for m in self.measures}

    def to_dict(self) -> dict:
        return {
            'verdict': self.verdict,
            'windows_a': self.windows_a,
            'windows_b': self.windows_b,
            'measures': {
                m.measure: {
                    'avg_a': m.avg_a,
                    'avg_b': m.avg_b,
                    'difference': m.difference,
                    'verdict': m.verdict,
                }
                for m in self.measures
            },
        }


def _verdict(difference: float) -> str:
    if abs(difference) <= TIE_TOLERANCE:
        return TIE
    return A_MORE_DECENTRALIZED if difference > 0 else B_MORE_DECENTRALIZED


def compare_rounds(series_a: WindowSeries, series_b: WindowSeries) -> RoundComparison:
    """
    Compare average oVBE of two series measure by measure.

    Args:
        series_a: First round (e.g. off-chain temperature checks)
        series_b: Second round (e.g. on-chain votes)

    Returns:
        RoundComparison; higher average means more decentralized
    """
    if not series_a.results or not series_b.results:
        raise EmptySeriesError("Both rounds need at least one window")
    if set(series_a.measures) != set(series_b.measures):
        raise ParameterError(f"Measure mismatch: {series_a.measures} vs {series_b.measures}")

    stats_a, stats_b = aggregate(series_a), aggregate(series_b)
    rows = []
    for column in series_a.measures:
        avg_a, avg_b = stats_a[column]['avg'], stats_b[column]['avg']
        difference = avg_a - avg_b
        rows.append(MeasureComparison(column, avg_a, avg_b, difference, _verdict(difference)))
        logger.info("%s: round A %.4f vs round B %.4f", column, avg_a, avg_b)

    return RoundComparison(measures=tuple(rows), windows_a=len(series_a), windows_b=len(series_b))
