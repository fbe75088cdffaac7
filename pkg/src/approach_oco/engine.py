"""The approachability loop: steering vector -> response oracle -> Nature -> reward.

``run_meta`` drives any steering algorithm; ``run_blackwell`` is the classical
projection strategy written out directly so the two can be compared.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Iterator, Sequence

import numpy as np

from .errors import DimensionMismatch, MissingSamples
from .game import VectorGame, as_mixed_action
from .geometry import ConvexTargetSet, as_vector, distance, steering_direction, support
from .minimax import response_oracle
from .oco import LossContext, SteeringAlgorithm, SteeringVector, cumulative_regret

Picker = Callable[[np.ndarray, np.ndarray, int], int]


def philox(seed: int) -> np.random.Generator:
    """Counter-based generator: identical streams across platforms for a seed."""
    return np.random.Generator(np.random.Philox(int(seed)))


def sample_index(probs: np.ndarray, u: float) -> int:
    """Inverse-CDF draw from ``probs`` with a uniform ``u`` in [0, 1)."""
    i = int(np.searchsorted(np.cumsum(probs), u, side="right"))
    return min(i, probs.size - 1)


# ---------------------------------------------------------------------------
# adversaries; ``bind`` returns a fresh picker (x_t, mean_{t-1}, t) -> j_t


@dataclass(frozen=True)
class FixedPure:
    action: int
    name: str = "fixed_pure"

    def bind(self, game: VectorGame, target: ConvexTargetSet) -> Picker:
        if not 0 <= self.action < game.n_nature:
            raise ValueError(f"action {self.action} outside Nature's action set")
        return lambda x, mean, t: self.action


@dataclass(frozen=True)
class FixedMixed:
    probs: tuple[float, ...]
    seed: int = 0
    name: str = "fixed_mixed"

    def bind(self, game: VectorGame, target: ConvexTargetSet) -> Picker:
        y = as_mixed_action(self.probs, game.n_nature)
        rng = philox(self.seed)
        return lambda x, mean, t: sample_index(y, rng.random())


@dataclass(frozen=True)
class ActionSequence:
    actions: tuple[int, ...]
    name: str = "sequence"

    def bind(self, game: VectorGame, target: ConvexTargetSet) -> Picker:
        if any(not 0 <= a < game.n_nature for a in self.actions):
            raise ValueError("sequence contains actions outside Nature's action set")

        def pick(x, mean, t):
            if t > len(self.actions):
                raise ValueError(f"action sequence of length {len(self.actions)} exhausted at t={t}")
            return self.actions[t - 1]

        return pick


@dataclass(frozen=True)
class RoundRobin:
    name: str = "round_robin"

    def bind(self, game: VectorGame, target: ConvexTargetSet) -> Picker:
        n = game.n_nature
        return lambda x, mean, t: (t - 1) % n


@dataclass(frozen=True)
class GreedyWorstCase:
    """One-step lookahead: push the next mean as far from S as possible."""

    name: str = "greedy"

    def bind(self, game: VectorGame, target: ConvexTargetSet) -> Picker:
        return lambda x, mean, t: greedy_worst_case_action(game, target, x, mean, t)


Adversary = FixedPure | FixedMixed | ActionSequence | RoundRobin | GreedyWorstCase


def greedy_worst_case_action(
    game: VectorGame, target: ConvexTargetSet, x, mean_prev, t: int
) -> int:
    """argmax_j dist(mean_{t-1} + (r(x, j) - mean_{t-1}) / t, S); ties to lowest j."""
    cols = np.einsum("i,ijk->jk", np.asarray(x, dtype=float), game.payoffs)
    best, best_j = -1.0, 0
    for j in range(game.n_nature):
        cand = mean_prev + (cols[j] - mean_prev) / t
        d = distance(target, cand)
        if d > best:
            best, best_j = d, j
    return best_j


# ---------------------------------------------------------------------------
# traces


@dataclass
class StepRecord:
    t: int
    w: np.ndarray
    x: np.ndarray | None
    j: int | None
    r: np.ndarray
    mean: np.ndarray
    dist: float
    loss: float
    sampled_i: int | None = None
    sampled_r: np.ndarray | None = None


@dataclass
class RunTrace:
    w: np.ndarray  # (T, d)
    r: np.ndarray  # (T, d) smoothed rewards r(x_t, j_t)
    mean: np.ndarray  # (T, d) running averages
    dist: np.ndarray  # (T,) dist(mean_t, S)
    loss: np.ndarray  # (T,) f_t(w_t)
    slack: np.ndarray  # (T,) <w_t, r_t> - h_S(w_t); <= tau_feas in game runs
    regret: np.ndarray  # (T,) realized regret of each prefix
    x: np.ndarray | None = None  # (T, |I|)
    j: np.ndarray | None = None  # (T,)
    sampled_i: np.ndarray | None = None
    sampled_r: np.ndarray | None = None
    config: dict = field(default_factory=dict)

    def __len__(self) -> int:
        return self.dist.size

    @property
    def horizon(self) -> int:
        return len(self)

    @property
    def t(self) -> np.ndarray:
        return np.arange(1, len(self) + 1)

    def step(self, t: int) -> StepRecord:
        k = t - 1
        return StepRecord(
            t=t,
            w=self.w[k],
            x=None if self.x is None else self.x[k],
            j=None if self.j is None else int(self.j[k]),
            r=self.r[k],
            mean=self.mean[k],
            dist=float(self.dist[k]),
            loss=float(self.loss[k]),
            sampled_i=None if self.sampled_i is None else int(self.sampled_i[k]),
            sampled_r=None if self.sampled_r is None else self.sampled_r[k],
        )

    def records(self) -> Iterator[StepRecord]:
        for t in range(1, len(self) + 1):
            yield self.step(t)


class _Recorder:
    def __init__(self, T: int, d: int, m: int | None, sampled: bool):
        self.w = np.zeros((T, d))
        self.r = np.zeros((T, d))
        self.mean = np.zeros((T, d))
        self.dist = np.zeros(T)
        self.loss = np.zeros(T)
        self.slack = np.zeros(T)
        self.regret = np.zeros(T)
        self.x = None if m is None else np.zeros((T, m))
        self.j = None if m is None else np.zeros(T, dtype=int)
        self.sampled_i = np.zeros(T, dtype=int) if sampled else None
        self.sampled_r = np.zeros((T, d)) if sampled else None
        self.cum_loss = 0.0

    def record(self, k: int, ctx: LossContext, w, r, h: float, x=None, j=None) -> None:
        f = -float(w @ r) + h
        self.cum_loss += f
        self.w[k] = w
        self.r[k] = r
        self.mean[k] = ctx.mean
        self.dist[k] = ctx.dist
        self.loss[k] = f
        self.slack[k] = -f
        self.regret[k] = cumulative_regret(self.cum_loss, ctx.t, ctx.dist)
        if x is not None:
            self.x[k] = x
            self.j[k] = j

    def trace(self, config: dict) -> RunTrace:
        return RunTrace(
            self.w, self.r, self.mean, self.dist, self.loss, self.slack, self.regret,
            self.x, self.j, self.sampled_i, self.sampled_r, dict(config),
        )


def _check_inputs(game: VectorGame, target: ConvexTargetSet, T: int) -> None:
    if game.dim != target.dim:
        raise DimensionMismatch(f"game payoffs are {game.dim}-D but the target is {target.dim}-D")
    if T < 1:
        raise ValueError("horizon must be >= 1")


def _game_loop(
    game: VectorGame,
    target: ConvexTargetSet,
    policy: SteeringAlgorithm,
    adversary: Adversary,
    T: int,
    sample_seed: int | None,
    config: dict,
) -> RunTrace:
    _check_inputs(game, target, T)
    ctx = LossContext(target)
    policy.reset(ctx)
    pick = adversary.bind(game, target)
    rng = None if sample_seed is None else philox(sample_seed)
    rec = _Recorder(T, game.dim, game.n_agent, rng is not None)
    for k in range(T):
        t = k + 1
        w, direction = policy.propose(ctx)
        x = response_oracle(game, target, direction)
        j = pick(x, ctx.mean, t)
        r = x @ game.payoffs[:, j, :]
        h = support(target, w)
        if rng is not None:
            i = sample_index(x, rng.random())
            rec.sampled_i[k] = i
            rec.sampled_r[k] = game.payoffs[i, j]
        ctx.observe(r)
        policy.update(ctx, w, r)
        rec.record(k, ctx, w, r, h, x, j)
    return rec.trace(config)


def run_meta(
    game: VectorGame,
    target: ConvexTargetSet,
    steering: SteeringAlgorithm,
    adversary: Adversary,
    T: int,
    sample_seed: int | None = None,
    config: dict | None = None,
) -> RunTrace:
    """OCO-driven approachability for T stages.

    Each stage: w_t from the steering algorithm, x_t from the response oracle,
    j_t from the adversary (which sees x_t), reward r_t = r(x_t, j_t).
    SeparationViolation from the oracle aborts the run.
    """
    return _game_loop(
        game, target, steering, adversary, T, sample_seed,
        {"steering": steering.name, "adversary": adversary.name, **(config or {})},
    )


class _Blackwell:
    name = "blackwell"

    def reset(self, ctx: LossContext) -> None:
        pass

    def propose(self, ctx: LossContext) -> SteeringVector:
        if ctx.t == 0:
            u = np.zeros(ctx.target.dim)
        else:
            u = steering_direction(ctx.target, ctx.mean)
        return SteeringVector(u, u)

    def update(self, ctx: LossContext, w: np.ndarray, r: np.ndarray) -> None:
        pass


def run_blackwell(
    game: VectorGame,
    target: ConvexTargetSet,
    adversary: Adversary,
    T: int,
    sample_seed: int | None = None,
    config: dict | None = None,
) -> RunTrace:
    """Blackwell's strategy: x_{t+1} answers the projection direction u_S(mean_t).

    x_1 is uniform (the oracle's answer to the zero direction), as is any stage
    whose previous mean already lies in S.
    """
    return _game_loop(
        game, target, _Blackwell(), adversary, T, sample_seed,
        {"steering": "blackwell", "adversary": adversary.name, **(config or {})},
    )


def raw_sequence_run(
    target: ConvexTargetSet, rewards: Sequence, steering: SteeringAlgorithm
) -> RunTrace:
    """The OCO loop alone, with the reward vectors given up front."""
    rewards = [as_vector(r, target.dim, "reward") for r in rewards]
    if not rewards:
        raise ValueError("need at least one reward")
    ctx = LossContext(target)
    steering.reset(ctx)
    rec = _Recorder(len(rewards), target.dim, None, False)
    for k, r in enumerate(rewards):
        w = steering.propose(ctx).w
        h = support(target, w)
        ctx.observe(r)
        steering.update(ctx, w, r)
        rec.record(k, ctx, w, r, h)
    return rec.trace({"steering": steering.name, "mode": "raw"})


def martingale_gap_diagnostic(trace: RunTrace) -> np.ndarray:
    """||mean smoothed reward - mean sampled reward|| for every prefix."""
    if trace.sampled_r is None:
        raise MissingSamples("trace was produced without sampled pure rewards")
    t = trace.t[:, None]
    diff = np.cumsum(trace.r - trace.sampled_r, axis=0) / t
    return np.linalg.norm(diff, axis=1)


def ftl_counterexample_rewards(T: int) -> list[np.ndarray]:
    """r_1 = -1, r_t = 2 (-1)^t: the sign flips that defeat plain FTL on S = {0}."""
    return [np.array([-1.0])] + [np.array([2.0 * (-1) ** t]) for t in range(2, T + 1)]


__all__ = [
    "ActionSequence",
    "Adversary",
    "FixedMixed",
    "FixedPure",
    "GreedyWorstCase",
    "RoundRobin",
    "RunTrace",
    "StepRecord",
    "ftl_counterexample_rewards",
    "greedy_worst_case_action",
    "martingale_gap_diagnostic",
    "philox",
    "raw_sequence_run",
    "run_blackwell",
    "run_meta",
    "sample_index",
]
