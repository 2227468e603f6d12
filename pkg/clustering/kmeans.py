"""
K-means clustering with k-means++ seeding.

Rows are put in canonical order (sorted by row id) before seeding, so
permuting the input permutes the assignments and nothing else. Each
restart draws from its own stream derived from (seed, restart index).
"""
import logging
from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

import numpy as np

from governance.core import Partition, VoteMatrix
from governance.exceptions import ParameterError

from .distance import DistanceKind, parse_distance, squared_distances, unit_rows

logger = logging.getLogger(__name__)

SEED_MASK = (1 << 64) - 1


@dataclass(frozen=True)
class KMeansConfig:
    k: int = 3
    seed: int = 42
    max_iterations: int = 300
    tolerance: float = 1e-6
    n_init: int = 10

    def __post_init__(self):
        if self.k < 1:
            raise ParameterError(f"k must be >= 1, got {self.k}")
        if self.n_init < 1:
            raise ParameterError(f"n_init must be >= 1, got {self.n_init}")
        if self.max_iterations < 1:
            raise ParameterError(f"max_iterations must be >= 1, got {self.max_iterations}")
        if self.tolerance < 0:
            raise ParameterError(f"tolerance must be >= 0, got {self.tolerance}")


@dataclass(frozen=True)
class ClusteringOutcome:
    """
    Result of a clustering run.

    ``labels`` are per input row in input order; cluster numbers follow
    first appearance in canonical row order. ``inertia_trace`` holds the
    objective after every assignment step of the winning restart.
    """
    partition: Partition
    centroids: np.ndarray
    inertia: float
    iterations_run: int
    effective_k: int
    labels: Tuple[int, ...]
    inertia_trace: Tuple[float, ...]

    @property
    def cluster_sizes(self) -> Tuple[int, ...]:
        return tuple(len(b) for b in self.partition.blocs)


@dataclass
class _Run:
    labels: np.ndarray
    centroids: np.ndarray
    inertia: float
    iterations: int
    trace: list


def _seed_centroids(points: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    n = points.shape[0]
    chosen = [int(rng.integers(n))]
    closest = squared_distances(points, points[chosen]).min(axis=1)
    while len(chosen) < k:
        weights = closest / closest.sum()
        index = int(rng.choice(n, p=weights))
        chosen.append(index)
        closest = np.minimum(closest, squared_distances(points, points[[index]])[:, 0])
    return points[chosen].copy()


def _repair_empty(points, labels, centroids, dist2, k):
    # move the point farthest from its centroid, taken from a cluster that can spare it
    for cluster in range(k):
        if np.any(labels == cluster):
            continue
        sizes = np.bincount(labels, minlength=k)
        own = dist2[np.arange(len(labels)), labels]
        candidates = np.where(sizes[labels] > 1, own, -1.0)
        index = int(np.argmax(candidates))
        labels[index] = cluster
        centroids[cluster] = points[index]
        dist2 = squared_distances(points, centroids)
    return labels, centroids


def _lloyd(points: np.ndarray, k: int, config: KMeansConfig, rng: np.random.Generator) -> _Run:
    centroids = _seed_centroids(points, k, rng)
    previous = None
    trace = []
    iterations = 0
    for iterations in range(1, config.max_iterations + 1):
        dist2 = squared_distances(points, centroids)
        labels = np.argmin(dist2, axis=1)
        labels, centroids = _repair_empty(points, labels, centroids, dist2, k)
        trace.append(float(squared_distances(points, centroids)[np.arange(len(labels)), labels].sum()))

        updated = np.vstack([points[labels == j].mean(axis=0) for j in range(k)])
        shift = float(np.sqrt(((updated - centroids) ** 2).sum(axis=1)).max())
        centroids = updated
        if previous is not None and np.array_equal(labels, previous):
            break
        if shift <= config.tolerance:
            break
        previous = labels.copy()

    inertia = float(squared_distances(points, centroids)[np.arange(len(labels)), labels].sum())
    if inertia < trace[-1]:
        trace.append(inertia)
    return _Run(labels, centroids, inertia, iterations, trace)


def _canonical_labels(labels: np.ndarray, centroids: np.ndarray):
    order = list(dict.fromkeys(labels.tolist()))
    remap = {old: new for new, old in enumerate(order)}
    return np.array([remap[x] for x in labels], dtype=int), centroids[order]


def kmeans(matrix, config: Optional[KMeansConfig] = None, row_ids: Optional[Sequence[str]] = None,
           distance=DistanceKind.EUCLIDEAN) -> ClusteringOutcome:
    """
    Cluster the rows of a vote matrix (or any real matrix).

    Args:
        matrix: VoteMatrix or 2-D array
        config: KMeansConfig; defaults to k=3, seed 42
        row_ids: Row identifiers; taken from the VoteMatrix when omitted
        distance: Euclidean, or cosine via unit-row normalization

    Returns:
        ClusteringOutcome with the best restart by inertia
    """
    config = config or KMeansConfig()
    if isinstance(matrix, VoteMatrix):
        row_ids = matrix.accounts if row_ids is None else row_ids
        data = np.asarray(matrix.entries, dtype=float)
    else:
        data = np.asarray(matrix, dtype=float)
        if data.ndim == 1:
            data = data.reshape(-1, 1)
    if data.ndim != 2 or data.shape[0] == 0:
        raise ParameterError("Cannot cluster an empty matrix")
    if row_ids is None:
        row_ids = [f"{i:09d}" for i in range(data.shape[0])]
    row_ids = [str(r) for r in row_ids]
    if len(row_ids) != data.shape[0]:
        raise ParameterError("One row id per matrix row is required")

    if parse_distance(distance) == DistanceKind.COSINE:
        data = unit_rows(data)

    order = sorted(range(len(row_ids)), key=lambda i: row_ids[i])
    points = data[order]
    distinct = np.unique(points, axis=0).shape[0]
    k = min(config.k, distinct)
    if k < config.k:
        logger.info("Reducing k from %d to %d (only %d distinct rows)", config.k, k, distinct)

    best = None
    for restart in range(config.n_init):
        rng = np.random.default_rng([config.seed & SEED_MASK, restart])
        run = _lloyd(points, k, config, rng)
        if best is None or run.inertia < best.inertia:
            best = run

    labels, centroids = _canonical_labels(best.labels, best.centroids)
    sorted_ids = [row_ids[i] for i in order]
    input_labels = np.empty(len(row_ids), dtype=int)
    input_labels[order] = labels

    return ClusteringOutcome(
        partition=Partition.from_labels(sorted_ids, labels.tolist()),
        centroids=centroids,
        inertia=best.inertia,
        iterations_run=best.iterations,
        effective_k=k,
        labels=tuple(int(x) for x in input_labels),
        inertia_trace=tuple(best.trace),
    )
