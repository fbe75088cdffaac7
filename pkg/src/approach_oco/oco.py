"""Steering algorithms over the unit ball for the losses

    f_t(w) = -<w, r_t> + h_S(w),

plus realized-regret accounting and the analytic regret bounds.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, NamedTuple, Protocol

import numpy as np

from .errors import UnboundedSupport
from .geometry import (
    ConvexTargetSet,
    LiftedCone,
    NonpositiveOrthantCone,
    as_vector,
    projection_residual,
    support,
    support_argmax,
)

REGRET_ROUNDOFF = 1e-8


@dataclass
class LossContext:
    """Reward history seen so far, with the running mean and its projection cached."""

    target: ConvexTargetSet
    t: int = 0
    rewards: list[np.ndarray] = field(default_factory=list)
    total: np.ndarray = field(init=False)
    mean: np.ndarray = field(init=False)
    dist: float = field(init=False, default=0.0)
    direction: np.ndarray = field(init=False)

    def __post_init__(self):
        d = self.target.dim
        self.total = np.zeros(d)
        self.mean = np.zeros(d)
        self.direction = np.zeros(d)
        history, self.rewards = self.rewards, []
        for r in history:
            self.observe(r)

    @property
    def nonneg_domain(self) -> bool:
        """Cone targets restrict w to B_2 intersected with the polar (here: w >= 0)."""
        return isinstance(self.target, NonpositiveOrthantCone)

    def observe(self, r) -> None:
        r = np.asarray(r, dtype=float)
        self.rewards.append(r)
        self.total = self.total + r
        self.t += 1
        self.mean = self.total / self.t
        _, self.dist, self.direction = projection_residual(self.target, self.mean)


def loss(target: ConvexTargetSet, w, r) -> float:
    """f(w; r) = -<w, r> + h_S(w)."""
    return -float(np.dot(w, r)) + support(target, w)


class SteeringVector(NamedTuple):
    w: np.ndarray
    # what the response oracle is queried with; a positive multiple of w
    direction: np.ndarray


class SteeringAlgorithm(Protocol):
    name: str

    def reset(self, ctx: LossContext) -> None: ...

    def propose(self, ctx: LossContext) -> SteeringVector: ...

    def update(self, ctx: LossContext, w: np.ndarray, r: np.ndarray) -> None: ...


# ---------------------------------------------------------------------------
# single steps


def project_unit_ball(v: np.ndarray) -> np.ndarray:
    return v / max(1.0, float(np.linalg.norm(v)))


def ogd_step(ctx: LossContext, w_t, r_t, t: int, eta: float) -> np.ndarray:
    """w_{t+1} = Proj(w_t + (eta / sqrt(t)) (r_t - y_t)), y_t in argmax_S <s, w_t>.

    For the orthant cone the domain is B_2 intersected with the nonnegative
    orthant; clipping then rescaling is the exact projection onto it.
    """
    w_t = np.asarray(w_t, dtype=float)
    r_t = np.asarray(r_t, dtype=float)
    if isinstance(ctx.target, LiftedCone):
        raise UnboundedSupport("OGD over a lifted cone needs a polar projection (unsupported)")
    y_t = support_argmax(ctx.target, w_t)
    v = w_t + (eta / math.sqrt(t)) * (r_t - y_t)
    if ctx.nonneg_domain:
        v = np.maximum(v, 0.0)
    return project_unit_ball(v)


def ftl_step(ctx: LossContext) -> np.ndarray:
    """Follow the leader: u_S(mean reward), or 0 when the mean is inside S."""
    if ctx.t < 1:
        raise ValueError("FTL needs at least one observed reward")
    return ctx.direction


def rftl_scale(ctx: LossContext, rho: float) -> float:
    """beta_t = min{1, t / rho_t * dist(mean, S)} with rho_t = rho sqrt(t)."""
    if ctx.t < 1 or rho <= 0:
        raise ValueError("RFTL needs t >= 1 and rho > 0")
    rho_t = rho * math.sqrt(ctx.t)
    return min(1.0, ctx.t / rho_t * ctx.dist)


def rftl_step(ctx: LossContext, rho: float) -> np.ndarray:
    """Quadratically regularized leader: beta_t u_S(mean)."""
    return rftl_scale(ctx, rho) * ftl_step(ctx)


# ---------------------------------------------------------------------------
# stateful steering policies


class OGD:
    name = "ogd"

    def __init__(self, eta: float):
        if not eta > 0:
            raise ValueError("OGD step size must be positive")
        self.eta = float(eta)
        self._w: np.ndarray | None = None

    def reset(self, ctx: LossContext) -> None:
        self._w = np.zeros(ctx.target.dim)

    def propose(self, ctx: LossContext) -> SteeringVector:
        return SteeringVector(self._w, self._w)

    def update(self, ctx: LossContext, w: np.ndarray, r: np.ndarray) -> None:
        self._w = ogd_step(ctx, w, r, ctx.t, self.eta)


class FTL:
    name = "ftl"

    def reset(self, ctx: LossContext) -> None:
        pass

    def propose(self, ctx: LossContext) -> SteeringVector:
        if ctx.t == 0:
            z = np.zeros(ctx.target.dim)
            return SteeringVector(z, z)
        u = ftl_step(ctx)
        return SteeringVector(u, u)

    def update(self, ctx: LossContext, w: np.ndarray, r: np.ndarray) -> None:
        pass


class RFTL:
    name = "rftl"

    def __init__(self, rho: float):
        if not rho > 0:
            raise ValueError("RFTL regularization must be positive")
        self.rho = float(rho)

    def reset(self, ctx: LossContext) -> None:
        pass

    def propose(self, ctx: LossContext) -> SteeringVector:
        if ctx.t == 0:
            z = np.zeros(ctx.target.dim)
            return SteeringVector(z, z)
        u = ftl_step(ctx)
        # the oracle sees the unit direction; x_t is invariant to the positive scale
        return SteeringVector(rftl_scale(ctx, self.rho) * u, u)

    def update(self, ctx: LossContext, w: np.ndarray, r: np.ndarray) -> None:
        pass


def default_eta(dist_RS: float) -> float:
    return math.sqrt(2.0) / dist_RS if dist_RS > 0 else math.sqrt(2.0)


def default_rho(dist_RS: float) -> float:
    return math.sqrt(2.0) * dist_RS if dist_RS > 0 else 1.0


# ---------------------------------------------------------------------------
# regret


def cumulative_regret(cum_loss: float, t: int, dist: float) -> float:
    """sum_k f_k(w_k) - min_{B_2} sum_k f_k, the minimum being -t dist(mean, S)."""
    value = cum_loss + t * dist
    if -REGRET_ROUNDOFF <= value < 0.0:
        return 0.0
    return value


def realized_regret(ctx: LossContext, w_history) -> float:
    if len(w_history) != ctx.t:
        raise ValueError("need one steering vector per observed reward")
    total = 0.0
    for w, r in zip(w_history, ctx.rewards):
        w = as_vector(w, ctx.target.dim, "w")
        h = support(ctx.target, w)
        if math.isinf(h):
            raise UnboundedSupport("a played w has infinite support value")
        total += -float(w @ r) + h
    return cumulative_regret(total, ctx.t, ctx.dist)


# ---------------------------------------------------------------------------
# bounds


def ogd_regret_bound(T, eta: float, diam_W: float, G: float):
    """(diam_W^2 / eta + 2 eta G^2) sqrt(T)."""
    return (diam_W**2 / eta + 2.0 * eta * G**2) * np.sqrt(T)


def rftl_regret_bound(T, rho: float, L_f: float):
    """a_0(T) = (2 L^2 / rho + rho) sqrt(T) + 2 L^2 / rho + L ln(4T - 3)."""
    T = np.asarray(T, dtype=float)
    out = (2 * L_f**2 / rho + rho) * np.sqrt(T) + 2 * L_f**2 / rho + L_f * np.log(4 * T - 3)
    return float(out) if out.ndim == 0 else out


def rftl_schedule_bound(
    T: int, rho_of: Callable[[int], float], L_f: float, L_R: float, R_max: float
) -> float:
    """2 L_f sum_t (L_f + (rho_t - rho_{t-1}) L_R) / (rho_t + rho_{t-1}) + rho_T R_max.

    ``rho_of(t)`` must be defined for t = 0..T.
    """
    total = 0.0
    for t in range(1, T + 1):
        a, b = rho_of(t), rho_of(t - 1)
        total += (L_f + (a - b) * L_R) / (a + b)
    return 2.0 * L_f * total + rho_of(T) * R_max


def ftl_log_bound(T, diam_R: float, dist_RS: float, kappa0: float):
    """C_0 (1 + ln T) with C_0 = diam(R) ||R - S|| kappa_0."""
    return diam_R * dist_RS * kappa0 * (1.0 + np.log(T))


def blackwell_distance_bound(T, dist_RS: float):
    """Classical rate ||R - S|| / sqrt(T) for Blackwell's strategy."""
    return dist_RS / np.sqrt(T)
