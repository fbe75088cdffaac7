"""Scalarized zero-sum games, the agent's response oracle, and a
sampled approachability certificate."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.stats import norm, qmc

from .errors import SeparationViolation, UnboundedSupport
from .game import VectorGame, uniform
from .geometry import ConvexTargetSet, as_vector, support
from .lp import LinearProgram, LPSolution, solve_lp, solve_matrix_game_tableau

TAU_FEAS = 1e-8


@dataclass
class MinimaxSolution:
    value: float
    strategy: np.ndarray
    # Nature's optimal mixed action, read off the LP duals
    opponent: np.ndarray


def matrix_game_lp(A: np.ndarray) -> LinearProgram:
    """min v s.t. sum_i A[i, j] x_i <= v for every column j, x in the simplex.

    Variables are ``(x_1, ..., x_m, v)`` with ``v`` free.
    """
    m, n = A.shape
    rows = np.zeros((n + 1, m + 1))
    rows[:n, :m] = A.T
    rows[:n, m] = -1.0
    rows[n, :m] = 1.0
    b = np.zeros(n + 1)
    b[n] = 1.0
    c = np.zeros(m + 1)
    c[m] = 1.0
    lower = np.zeros(m + 1)
    lower[m] = -np.inf
    upper = np.full(m + 1, np.inf)
    return LinearProgram(c, rows, b, ("<=",) * n + ("=",), lower, upper)


def solve_matrix_game(A) -> MinimaxSolution:
    """Minimax strategy of the row player (minimizer) of payoff matrix ``A``."""
    A = np.atleast_2d(np.asarray(A, dtype=float))
    value, x, y = solve_matrix_game_tableau(A)
    return _clean(value, x, y)


def solve_matrix_game_general(A) -> MinimaxSolution:
    """Same as ``solve_matrix_game`` but through the general ``solve_lp`` route."""
    A = np.atleast_2d(np.asarray(A, dtype=float))
    sol: LPSolution = solve_lp(matrix_game_lp(A))
    m, n = A.shape
    return _clean(sol.value, sol.x[:m], -sol.duals[:n])


def _clean(value: float, x: np.ndarray, y: np.ndarray) -> MinimaxSolution:
    x = np.maximum(x, 0.0)
    x /= x.sum()
    y = np.maximum(y, 0.0)
    y = y / y.sum() if y.sum() > 0 else uniform(y.size)
    return MinimaxSolution(value, x, y)


def scalarize(game: VectorGame, w) -> np.ndarray:
    """A[i, j] = <w, r(i, j)>."""
    return game.payoffs @ w


def scalar_minimax(game: VectorGame, w) -> MinimaxSolution:
    """val(w.r) = min_x max_j <w, r(x, j)> and a minimizing x."""
    w = as_vector(w, game.dim, "w")
    return solve_matrix_game(scalarize(game, w))


def response_oracle(game: VectorGame, target: ConvexTargetSet, w) -> np.ndarray:
    """A mixed action x with <w, r(x, j)> <= h_S(w) + TAU_FEAS for every j.

    ``w = 0`` returns the uniform action. Raises SeparationViolation when no
    such x exists, which certifies that S is not approachable.
    """
    w = as_vector(w, game.dim, "w")
    if not w.any():
        return uniform(game.n_agent)
    h = support(target, w)
    if math.isinf(h):
        raise UnboundedSupport("steering vector lies outside the polar of the target cone")
    A = scalarize(game, w)
    sol = solve_matrix_game(A)
    if sol.value > h + TAU_FEAS:
        raise SeparationViolation(w, sol.value, h)
    worst = float(np.max(sol.strategy @ A))
    if worst - h > TAU_FEAS:
        raise SeparationViolation(w, worst, h)
    return sol.strategy


def sphere_directions(d: int, n: int) -> np.ndarray:
    """Deterministic, roughly uniform unit vectors in R^d.

    Equispaced on the circle, a Fibonacci lattice for d = 3, and
    normal-transformed Halton points above. In one dimension at most two exist.
    """
    if n < 1:
        raise ValueError("need at least one direction")
    k = np.arange(n)
    if d == 1:
        # the unit sphere of R is {+1, -1}
        return np.array([[1.0], [-1.0]])[: min(n, 2)]
    if d == 2:
        ang = 2.0 * np.pi * k / n
        return np.column_stack([np.cos(ang), np.sin(ang)])
    if d == 3:
        golden = np.pi * (3.0 - np.sqrt(5.0))
        z = 1.0 - 2.0 * (k + 0.5) / n
        rad = np.sqrt(1.0 - z * z)
        return np.column_stack([rad * np.cos(golden * k), rad * np.sin(golden * k), z])
    halton = qmc.Halton(d, scramble=False)
    halton.fast_forward(1)
    pts = norm.ppf(halton.random(n))
    return pts / np.linalg.norm(pts, axis=1, keepdims=True)


@dataclass
class CertificateReport:
    n_directions: int
    worst_margin: float  # max over finite-support directions of val(w.r) - h_S(w)
    worst_w: np.ndarray | None
    violations: list[tuple[np.ndarray, float, float]] = field(default_factory=list)

    @property
    def violated(self) -> bool:
        return bool(self.violations)


def approachability_certificate(
    game: VectorGame, target: ConvexTargetSet, n_directions: int
) -> CertificateReport:
    """Check val(w.r) <= h_S(w) + TAU_FEAS over sampled unit directions.

    A violation proves S is not approachable; a clean report is only evidence.
    """
    worst, worst_w, violations = -math.inf, None, []
    directions = sphere_directions(game.dim, n_directions)
    for w in directions:
        h = support(target, w)
        if math.isinf(h):
            continue
        val = scalar_minimax(game, w).value
        if val - h > worst:
            worst, worst_w = val - h, w
        if val > h + TAU_FEAS:
            violations.append((w, val, h))
    return CertificateReport(len(directions), worst, worst_w, violations)
