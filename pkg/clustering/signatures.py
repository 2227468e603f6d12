"""
Exact epsilon-signature clustering over latent utilities.

A player's signature records, per election, whether its utility for the
true outcome is inside the epsilon deadzone (0) or which side it falls
on (+1/-1). Players sharing a signature form one bloc; the all-zero
signature bloc is the apathetic set.
"""
import numpy as np

from governance.core import Partition


def signatures(values, epsilon: float) -> np.ndarray:
    """Ternary signature matrix; the deadzone boundary |u| == epsilon counts as apathetic."""
    values = np.asarray(values, dtype=float)
    return np.where(np.abs(values) <= epsilon, 0, np.sign(values)).astype(int)


def _symbol(row) -> str:
    return ''.join('+' if x > 0 else '-' if x < 0 else '0' for x in row)


def signature_clustering(utilities, epsilon: float) -> Partition:
    """
    Partition players by signature.

    Args:
        utilities: UtilityMatrix (anything with ``players`` and ``values``)
        epsilon: Deadzone half-width, >= 0

    Returns:
        Partition with one bloc per distinct signature, labelled like ``+-0``
    """
    marks = signatures(utilities.values, epsilon)
    labels = [_symbol(row) for row in marks]
    return Partition.from_labels(list(utilities.players), labels)


def apathetic_set(utilities, epsilon: float) -> frozenset:
    """Players whose every utility lies inside the deadzone."""
    marks = signatures(utilities.values, epsilon)
    quiet = ~marks.any(axis=1) if marks.size else np.ones(len(utilities.players), dtype=bool)
    return frozenset(p for p, q in zip(utilities.players, quiet) if q)
