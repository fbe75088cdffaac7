"""Vector-payoff matrix games and the constants that drive the rate bounds."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, IndexOutOfRange, UnboundedSet
from .geometry import (
    Ball,
    ConvexTargetSet,
    HalfspaceIntersection,
    NonpositiveOrthantCone,
    VPolytope,
)

SIMPLEX_TOL = 1e-12


def as_mixed_action(probs, n: int | None = None) -> np.ndarray:
    """Validate a probability vector (nonnegative, sums to one within 1e-12)."""
    x = np.asarray(probs, dtype=float).ravel()
    if n is not None and x.size != n:
        raise DimensionMismatch(f"mixed action has {x.size} entries, expected {n}")
    if x.size == 0 or not np.all(np.isfinite(x)) or np.any(x < 0):
        raise ValueError("mixed action must be a nonempty nonnegative vector")
    if abs(x.sum() - 1.0) > SIMPLEX_TOL:
        raise ValueError(f"mixed action sums to {x.sum()!r}, not 1")
    return x


def uniform(n: int) -> np.ndarray:
    return np.full(n, 1.0 / n)


def pure(n: int, i: int) -> np.ndarray:
    x = np.zeros(n)
    x[i] = 1.0
    return x


@dataclass(frozen=True, eq=False)
class VectorGame:
    """Payoff tensor ``payoffs[i, j] = r(i, j)`` of shape ``(|I|, |J|, d)``."""

    payoffs: np.ndarray

    def __post_init__(self):
        P = np.asarray(self.payoffs, dtype=float)
        if P.ndim == 2:
            P = P[:, :, None]
        if P.ndim != 3 or min(P.shape) < 1:
            raise DimensionMismatch("payoffs must have shape (|I|, |J|, d) with all sizes >= 1")
        if not np.all(np.isfinite(P)):
            raise ValueError("payoffs must be finite")
        object.__setattr__(self, "payoffs", P)

    @property
    def n_agent(self) -> int:
        return self.payoffs.shape[0]

    @property
    def n_nature(self) -> int:
        return self.payoffs.shape[1]

    @property
    def dim(self) -> int:
        return self.payoffs.shape[2]

    def pure_payoffs(self) -> np.ndarray:
        return self.payoffs.reshape(-1, self.dim)


def mixed_reward(game: VectorGame, x, j: int) -> np.ndarray:
    """r(x, j) = sum_i x(i) r(i, j)."""
    x = np.asarray(x, dtype=float)
    if x.shape != (game.n_agent,):
        raise DimensionMismatch(f"x has shape {x.shape}, expected ({game.n_agent},)")
    if not 0 <= j < game.n_nature:
        raise IndexOutOfRange(f"nature action {j} outside 0..{game.n_nature - 1}")
    return x @ game.payoffs[:, j, :]


def bilinear_reward(game: VectorGame, x, y) -> np.ndarray:
    """r(x, y) = sum_j y(j) r(x, j); bit-identical to ``mixed_reward`` at pure y."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != (game.n_agent,) or y.shape != (game.n_nature,):
        raise DimensionMismatch("mixed actions do not match the game's action sets")
    cols = [x @ game.payoffs[:, j, :] for j in range(game.n_nature)]
    out = np.zeros(game.dim)
    for yj, col in zip(y, cols):
        out += yj * col
    return out


@dataclass(frozen=True)
class RewardConstants:
    diam_R: float
    dist_RS: float  # ||R - S||; Lipschitz constant of the steering losses

    @property
    def G(self) -> float:
        return self.dist_RS


def _max_pairwise(P: np.ndarray, Q: np.ndarray) -> float:
    diff = P[:, None, :] - Q[None, :, :]
    return float(np.sqrt(np.max(np.einsum("abk,abk->ab", diff, diff))))


def reward_constants(
    game: VectorGame, target: ConvexTargetSet, bounding_ball: Ball | None = None
) -> RewardConstants:
    """diam(R) and ||R - S|| from the pure payoffs (R is their convex hull).

    For the orthant cone the subgradient point of h_S is always the apex, so
    ``dist_RS`` is the largest payoff norm. Halfspace intersections need a
    caller-supplied ``bounding_ball`` and get a conservative bound.
    """
    if target.dim != game.dim:
        raise DimensionMismatch("target and game dimensions differ")
    P = game.pure_payoffs()
    diam = _max_pairwise(P, P)
    if isinstance(target, Ball):
        dist = float(np.max(np.linalg.norm(P - target.center, axis=1))) + target.radius
    elif isinstance(target, VPolytope):
        dist = _max_pairwise(P, target.vertices)
    elif isinstance(target, NonpositiveOrthantCone):
        dist = float(np.max(np.linalg.norm(P, axis=1)))
    elif isinstance(target, HalfspaceIntersection):
        if bounding_ball is None:
            raise UnboundedSet("halfspace targets need a bounding ball for ||R - S||")
        dist = (
            float(np.max(np.linalg.norm(P - bounding_ball.center, axis=1))) + bounding_ball.radius
        )
    else:
        raise UnboundedSet(f"no reward constants for {type(target).__name__}")
    return RewardConstants(diam, dist)


def regret_game(base) -> tuple[VectorGame, NonpositiveOrthantCone]:
    """No-regret play as approachability.

    Component k of r(i, j) is u(k, j) - u(i, j): the gain from having played k
    instead. Approaching the nonpositive orthant means vanishing external regret.
    """
    u = np.atleast_2d(np.asarray(base, dtype=float))
    if u.ndim != 2 or not np.all(np.isfinite(u)):
        raise ValueError("base game must be a finite 2-D payoff matrix")
    m, n = u.shape
    # payoffs[i, j, k] = u[k, j] - u[i, j]
    payoffs = u.T[None, :, :] - u[:, :, None]
    return VectorGame(payoffs), NonpositiveOrthantCone(m)


def external_regret(base, xs: np.ndarray, js: np.ndarray) -> np.ndarray:
    """Per-prefix average external regret of the mixed plays ``xs`` against ``js``.

    max_i [ mean_t u(i, j_t) - mean_t sum_k x_t(k) u(k, j_t) ].
    """
    u = np.atleast_2d(np.asarray(base, dtype=float))
    cols = u[:, js].T  # (T, |I|)
    realized = np.einsum("ti,ti->t", xs, cols)
    t = np.arange(1, len(js) + 1)[:, None]
    best = np.cumsum(cols, axis=0) / t
    got = np.cumsum(realized)[:, None] / t
    return np.max(best - got, axis=1)


def corner_game(half_width: float = 2.0) -> VectorGame:
    """Four agent actions paying the corners (+-a, +-a); Nature has one action."""
    a = half_width
    corners = np.array([[a, a], [a, -a], [-a, a], [-a, -a]])
    return VectorGame(corners[:, None, :])


def matching_pennies_vector() -> VectorGame:
    """r(i, j) = (1{i = j}, 1{i != j})."""
    P = np.zeros((2, 2, 2))
    for i in range(2):
        for j in range(2):
            P[i, j] = (1.0, 0.0) if i == j else (0.0, 1.0)
    return VectorGame(P)


MATCHING_PENNIES = np.array([[1.0, -1.0], [-1.0, 1.0]])

__all__ = [
    "MATCHING_PENNIES",
    "RewardConstants",
    "VectorGame",
    "as_mixed_action",
    "bilinear_reward",
    "corner_game",
    "external_regret",
    "matching_pennies_vector",
    "mixed_reward",
    "pure",
    "regret_game",
    "reward_constants",
    "uniform",
]
