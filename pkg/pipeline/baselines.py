from dataclasses import dataclass
from typing import Dict, Sequence

from governance.core import TokenMap
from metrics.baselines import gini, nakamoto
from metrics.entropy import EntropyMeasure, trivial_vbe


@dataclass(frozen=True)
class BaselineReport:
    gini: float
    nakamoto: int
    trivial_vbe: Dict[str, float]
    accounts: int

    def to_dict(self) -> dict:
        return {
            'gini': self.gini,
            'nakamoto': self.nakamoto,
            'trivial_vbe': dict(self.trivial_vbe),
            'accounts': self.accounts,
        }


def baselines(tokens: TokenMap, measures: Sequence[EntropyMeasure] = (), threshold: float = 0.5) -> BaselineReport:
    """Gini, Nakamoto(threshold) and trivial-clustering VBE under each measure."""
    measures = measures or (EntropyMeasure('min_entropy'), EntropyMeasure('shannon'))
    return BaselineReport(
        gini=gini(tokens),
        nakamoto=nakamoto(tokens, threshold),
        trivial_vbe={m.column: trivial_vbe(tokens, m) for m in measures},
        accounts=len(tokens),
    )
