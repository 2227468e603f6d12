"""
Distance functions over vote and ballot vectors.
"""
import numpy as np
from django.db import models

from governance.exceptions import ParameterError


class DistanceKind(models.TextChoices):
    EUCLIDEAN = 'euclidean', 'Euclidean'
    COSINE = 'cosine', 'Cosine'


def parse_distance(value) -> DistanceKind:
    try:
        return DistanceKind(str(value).strip().lower())
    except ValueError:
        raise ParameterError(f"Unknown distance {value!r}; expected one of {', '.join(DistanceKind.values)}") from None


def distance(a, b, kind=DistanceKind.EUCLIDEAN) -> float:
    """
    Distance between two vectors.

    Cosine distance is 1 - cos(a, b); against a zero vector it is 1.

    Args:
        a: First vector
        b: Second vector of the same length
        kind: DistanceKind

    Returns:
        Non-negative distance
    """
    a = np.asarray(a, dtype=float).ravel()
    b = np.asarray(b, dtype=float).ravel()
    if a.shape != b.shape:
        raise ParameterError(f"Dimension mismatch: {a.shape[0]} vs {b.shape[0]}")

    if parse_distance(kind) == DistanceKind.EUCLIDEAN:
        return float(np.sqrt(np.sum((a - b) ** 2)))

    norm_a, norm_b = np.linalg.norm(a), np.linalg.norm(b)
    if norm_a == 0 or norm_b == 0:
        return 1.0
    value = 1.0 - float(np.dot(a, b) / (norm_a * norm_b))
    return max(value, 0.0)


def unit_rows(matrix: np.ndarray) -> np.ndarray:
    """Scale each row to unit L2 norm; zero rows stay zero."""
    matrix = np.asarray(matrix, dtype=float)
    norms = np.linalg.norm(matrix, axis=1, keepdims=True)
    return np.divide(matrix, norms, out=np.zeros_like(matrix), where=norms > 0)


def squared_distances(points: np.ndarray, centroids: np.ndarray) -> np.ndarray:
    """n x k matrix of squared Euclidean distances."""
    diff = points[:, None, :] - centroids[None, :, :]
    return np.einsum('ijk,ijk->ij', diff, diff)
