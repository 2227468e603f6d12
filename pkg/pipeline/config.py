"""
Pipeline configuration.

Defaults come from ``settings.VBE_PIPELINE_DEFAULTS``; callers override
individual keys.
"""
from dataclasses import dataclass, field
from typing import Tuple

from django.conf import settings
from django.db import models

from clustering.distance import DistanceKind, parse_distance
from clustering.kmeans import KMeansConfig
from governance.core import WindowSpec
from governance.exceptions import ParameterError
from metrics.entropy import EntropyMeasure


class WeightSource(models.TextChoices):
    STATIC_BALANCES = 'static_balances', 'Static balances'
    BALLOT_VOTING_POWER = 'ballot_voting_power', 'Recorded ballot voting power'


def parse_weight_source(value) -> WeightSource:
    try:
        return WeightSource(str(value).strip().lower())
    except ValueError:
        raise ParameterError(
            f"Unknown weight source {value!r}; expected one of {', '.join(WeightSource.values)}"
        ) from None


def parse_measures(value, normalize: bool = False) -> Tuple[EntropyMeasure, ...]:
    """Accept a comma-separated string or a list of measure names."""
    items = value.split(',') if isinstance(value, str) else list(value)
    measures = tuple(EntropyMeasure.parse(str(item), normalize=normalize) for item in items if str(item).strip())
    if not measures:
        raise ParameterError("At least one entropy measure is required")
    columns = [m.column for m in measures]
    if len(set(columns)) != len(columns):
        raise ParameterError(f"Duplicate measures in {value!r}")
    return measures


@dataclass(frozen=True)
class PipelineConfig:
    window: WindowSpec = field(default_factory=WindowSpec)
    measures: Tuple[EntropyMeasure, ...] = (EntropyMeasure('min_entropy'), EntropyMeasure('shannon'))
    clustering: KMeansConfig = field(default_factory=KMeansConfig)
    distance: DistanceKind = DistanceKind.EUCLIDEAN
    weight_source: WeightSource = WeightSource.STATIC_BALANCES
    include_inactive: bool = True
    lenient: bool = False
    workers: int = 1

    def __post_init__(self):
        if not self.measures:
            raise ParameterError("At least one entropy measure is required")
        if self.workers < 1:
            raise ParameterError(f"workers must be >= 1, got {self.workers}")

    @classmethod
    def from_settings(cls, **overrides) -> 'PipelineConfig':
        """
        Build a config from Django settings, applying flat overrides
        such as ``window=5`` or ``measures='shannon,renyi:2'``.
        """
        options = dict(settings.VBE_PIPELINE_DEFAULTS)
        unknown = set(overrides) - set(options) - {'lenient'}
        if unknown:
            raise ParameterError(f"Unknown pipeline option(s): {', '.join(sorted(unknown))}")
        options.update({k: v for k, v in overrides.items() if v is not None})
        normalize = bool(options['normalize'])
        return cls(
            window=WindowSpec(int(options['window']), int(options['stride']), bool(options['drop_partial_tail'])),
            measures=parse_measures(options['measures'], normalize=normalize),
            clustering=KMeansConfig(
                k=int(options['k']),
                seed=int(options['seed']),
                max_iterations=int(options['max_iterations']),
                tolerance=float(options['tolerance']),
                n_init=int(options['n_init']),
            ),
            distance=parse_distance(options['distance']),
            weight_source=parse_weight_source(options['weight_source']),
            include_inactive=bool(options['include_inactive']),
            lenient=bool(options.get('lenient', False)),
            workers=int(options['workers']),
        )

    @property
    def columns(self) -> Tuple[str, ...]:
        return tuple(m.column for m in self.measures)

    @property
    def normalize(self) -> bool:
        return any(m.normalize for m in self.measures)

    def to_dict(self) -> dict:
        """Config echo written into every report; worker count is left out."""
        return {
            'window': self.window.length,
            'stride': self.window.stride,
            'drop_partial_tail': self.window.drop_partial_tail,
            'k': self.clustering.k,
            'seed': self.clustering.seed,
            'n_init': self.clustering.n_init,
            'max_iterations': self.clustering.max_iterations,
            'tolerance': self.clustering.tolerance,
            'measures': [str(m) for m in self.measures],
            'normalize': self.normalize,
            'distance': str(self.distance.value),
            'include_inactive': self.include_inactive,
            'weight_source': str(self.weight_source.value),
        }
