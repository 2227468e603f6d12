"""
Synthetic DAOs with explicit latent utilities.

A SyntheticDao holds every player's monetary utility for the ``true``
outcome of each election; the utility for ``false`` is its negation and
is never stored. Blocs come from exact epsilon-signature clustering, so
VBE here is the latent (not observable) quantity.
"""
import logging
import math
from dataclasses import dataclass, replace
from typing import Optional, Sequence, Tuple

import numpy as np
from django.conf import settings

from clustering.kmeans import SEED_MASK
from clustering.signatures import apathetic_set, signature_clustering
from governance.core import AccountId, ElectionId, Partition, TokenMap, bloc_tokens
from governance.exceptions import ParameterError
from metrics.entropy import min_entropy

logger = logging.getLogger(__name__)

UNIFORM = 'uniform'
PARETO = 'pareto'
DEFAULT_PARETO_ALPHA = 1.16

# share of an engaged player's entries drawn inside the deadzone
INDIFFERENCE = 0.15
PARETO_SCALE = 10.0


@dataclass(frozen=True, eq=False)
class UtilityMatrix:
    """Entry (P, e) is util_P(e, true); util_P(e, false) is its negation."""
    players: Tuple[AccountId, ...]
    elections: Tuple[ElectionId, ...]
    values: np.ndarray

    def __post_init__(self):
        players, elections = tuple(self.players), tuple(self.elections)
        values = np.array(self.values, dtype=float, copy=True).reshape(len(players), len(elections))
        if not np.isfinite(values).all():
            raise ParameterError("Utilities must be finite")
        if len(set(players)) != len(players) or len(set(elections)) != len(elections):
            raise ParameterError("Player and election ids must be unique")
        values.setflags(write=False)
        object.__setattr__(self, 'players', players)
        object.__setattr__(self, 'elections', elections)
        object.__setattr__(self, 'values', values)

    def index(self, player: AccountId) -> int:
        try:
            return self.players.index(player)
        except ValueError:
            raise ParameterError(f"Unknown player {player!r}") from None

    def column(self, election: ElectionId) -> int:
        try:
            return self.elections.index(election)
        except ValueError:
            raise ParameterError(f"Unknown election {election!r}") from None

    def util(self, player: AccountId, election: ElectionId, outcome: bool = True) -> float:
        value = float(self.values[self.index(player), self.column(election)])
        return value if outcome else -value

    def row(self, player: AccountId) -> np.ndarray:
        return self.values[self.index(player)]

    def with_values(self, values, elections: Optional[Sequence[ElectionId]] = None) -> 'UtilityMatrix':
        return UtilityMatrix(self.players, self.elections if elections is None else elections, values)

    def __eq__(self, other) -> bool:
        if not isinstance(other, UtilityMatrix):
            return NotImplemented
        return (
            self.players == other.players
            and self.elections == other.elections
            and np.array_equal(self.values, other.values)
        )


@dataclass(frozen=True)
class SyntheticDao:
    players: Tuple[AccountId, ...]
    tokens: TokenMap
    utilities: UtilityMatrix
    epsilon: float = 0.1
    quorum: float = 0.5

    def __post_init__(self):
        object.__setattr__(self, 'players', tuple(self.players))
        if self.players != self.utilities.players:
            raise ParameterError("Utility rows must follow the player order")
        if set(self.tokens.accounts) != set(self.players):
            raise ParameterError("Every player needs exactly one balance")
        if not self.epsilon >= 0:
            raise ParameterError(f"epsilon must be >= 0, got {self.epsilon}")
        if not 0 < self.quorum < 1:
            raise ParameterError(f"quorum must be in (0, 1), got {self.quorum}")

    @property
    def elections(self) -> Tuple[ElectionId, ...]:
        return self.utilities.elections

    @property
    def total(self) -> float:
        return self.tokens.total

    def balance(self, player: AccountId) -> float:
        return self.tokens.balances[player]

    def partition(self) -> Partition:
        return signature_clustering(self.utilities, self.epsilon)

    def bloc_masses(self) -> np.ndarray:
        return bloc_tokens(self.partition(), self.tokens)

    def largest_bloc_mass(self) -> float:
        return float(self.bloc_masses().max())

    def vbe(self) -> float:
        """Min-entropy VBE over signature clustering."""
        return min_entropy(self.partition(), self.tokens)

    def apathetic_set(self) -> frozenset:
        return apathetic_set(self.utilities, self.epsilon)

    def with_player(self, player: AccountId, row, balance: float) -> 'SyntheticDao':
        """Add one player, e.g. an inactivity whale with an all-zero row."""
        if player in self.tokens:
            raise ParameterError(f"Player {player!r} already exists")
        row = np.asarray(row, dtype=float).reshape(1, -1)
        utilities = UtilityMatrix(
            self.players + (player,),
            self.elections,
            np.vstack([self.utilities.values, row]),
        )
        return replace(
            self,
            players=utilities.players,
            tokens=self.tokens.with_balances({player: balance}),
            utilities=utilities,
        )


def parse_token_dist(token_dist) -> Tuple[str, Optional[float]]:
    """Accept ``'uniform'``, ``'pareto'``, ``'pareto:<alpha>'`` or ``('pareto', alpha)``."""
    if isinstance(token_dist, (tuple, list)):
        name, alpha = token_dist[0], (token_dist[1] if len(token_dist) > 1 else None)
    else:
        name, _, arg = str(token_dist).strip().lower().partition(':')
        alpha = arg or None
    name = str(name).strip().lower()
    if name == UNIFORM and alpha is None:
        return UNIFORM, None
    if name == PARETO:
        try:
            alpha = DEFAULT_PARETO_ALPHA if alpha is None else float(alpha)
        except ValueError:
            raise ParameterError(f"Bad Pareto shape in {token_dist!r}") from None
        if not alpha > 0 or math.isinf(alpha):
            raise ParameterError(f"Pareto shape must be positive and finite, got {alpha}")
        return PARETO, alpha
    raise ParameterError(f"Unknown token distribution {token_dist!r}; expected uniform or pareto(alpha)")


def _draw_balances(rng: np.random.Generator, n: int, kind: str, alpha: Optional[float]) -> np.ndarray:
    if kind == UNIFORM:
        return rng.integers(1, 101, size=n).astype(float)
    return np.floor((rng.pareto(alpha, size=n) + 1.0) * PARETO_SCALE)


def _magnitudes(rng: np.random.Generator, shape, epsilon: float, scale: float) -> np.ndarray:
    raw = epsilon + (scale - epsilon) * (1.0 - rng.random(shape))
    return np.maximum(raw, np.nextafter(epsilon, math.inf))


def _engaged_rows(rng: np.random.Generator, n: int, m: int, epsilon: float, scale: float) -> np.ndarray:
    signs = rng.choice([-1.0, 1.0], size=(n, m))
    values = signs * _magnitudes(rng, (n, m), epsilon, scale)
    quiet = rng.random((n, m)) < INDIFFERENCE
    for row in np.flatnonzero(quiet.all(axis=1)):
        quiet[row, rng.integers(m)] = False
    values[quiet] = rng.uniform(-epsilon, epsilon, size=int(quiet.sum()))
    return values


def _planted_rows(rng: np.random.Generator, n: int, m: int, blocs: int, epsilon: float, scale: float) -> np.ndarray:
    if blocs > 2 ** min(m, 62):
        raise ParameterError(f"Cannot plant {blocs} distinct signatures over {m} election(s)")
    patterns = {}
    while len(patterns) < blocs:
        signs = tuple(rng.choice([-1, 1], size=m).tolist())
        if signs not in patterns:
            patterns[signs] = np.asarray(signs, dtype=float) * _magnitudes(rng, m, epsilon, scale)
    prototypes = np.vstack(list(patterns.values()))
    return prototypes[rng.integers(blocs, size=n)]


def gen_random_dao(seed: int, n_players: int, m_elections: int, token_dist='uniform',
                   utility_scale: Optional[float] = None, apathetic_fraction: float = 0.0,
                   epsilon: Optional[float] = None, quorum: Optional[float] = None,
                   planted_blocs: Optional[int] = None) -> SyntheticDao:
    """
    Draw a random DAO.

    Balances are whole token units. Engaged players get utilities of
    random sign and magnitude in (epsilon, utility_scale], with a few
    entries inside the deadzone; apathetic players sit entirely inside
    it. With ``planted_blocs`` every engaged player copies one of that
    many prototype rows and apathetic rows are exactly zero.

    Args:
        seed: Random seed; the same seed gives the same DAO
        n_players: Number of players, >= 1
        m_elections: Number of elections, >= 1
        token_dist: 'uniform' or ('pareto', alpha)
        utility_scale: Largest utility magnitude
        apathetic_fraction: Share of players drawn inside the deadzone
        epsilon: Deadzone half-width
        quorum: Outcome threshold q
        planted_blocs: Number of planted signature prototypes

    Returns:
        SyntheticDao
    """
    defaults = settings.VBE_THEORY_DEFAULTS
    epsilon = float(defaults['epsilon'] if epsilon is None else epsilon)
    quorum = float(defaults['quorum'] if quorum is None else quorum)
    scale = float(defaults['utility_scale'] if utility_scale is None else utility_scale)
    if n_players < 1 or m_elections < 1:
        raise ParameterError("A DAO needs at least one player and one election")
    if not 0 <= apathetic_fraction <= 1:
        raise ParameterError(f"apathetic_fraction must be in [0, 1], got {apathetic_fraction}")
    if not scale > epsilon:
        raise ParameterError(f"utility_scale must exceed epsilon ({scale} <= {epsilon})")
    if planted_blocs is not None and planted_blocs < 1:
        raise ParameterError("planted_blocs must be >= 1")
    kind, alpha = parse_token_dist(token_dist)

    rng = np.random.default_rng(int(seed) & SEED_MASK)
    balances = _draw_balances(rng, n_players, kind, alpha)
    if planted_blocs:
        values = _planted_rows(rng, n_players, m_elections, planted_blocs, epsilon, scale)
    else:
        values = _engaged_rows(rng, n_players, m_elections, epsilon, scale)

    n_apathetic = int(round(apathetic_fraction * n_players))
    apathetic = rng.choice(n_players, size=n_apathetic, replace=False)
    if planted_blocs:
        values[apathetic] = 0.0
    else:
        values[apathetic] = rng.uniform(-epsilon, epsilon, size=(n_apathetic, m_elections))

    width = len(str(n_players - 1))
    players = tuple(f"p{i:0{width}d}" for i in range(n_players))
    elections = tuple(f"e{j:0{len(str(m_elections - 1))}d}" for j in range(m_elections))
    logger.debug("Generated DAO seed=%s n=%d m=%d apathetic=%d", seed, n_players, m_elections, n_apathetic)
    return SyntheticDao(
        players=players,
        tokens=TokenMap(dict(zip(players, balances))),
        utilities=UtilityMatrix(players, elections, values),
        epsilon=epsilon,
        quorum=quorum,
    )
