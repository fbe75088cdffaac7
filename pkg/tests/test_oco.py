import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from approach_oco.geometry import Ball, NonpositiveOrthantCone, VPolytope, distance
from approach_oco.oco import (
    FTL,
    OGD,
    RFTL,
    LossContext,
    default_eta,
    default_rho,
    ftl_log_bound,
    ftl_step,
    loss,
    ogd_regret_bound,
    ogd_step,
    realized_regret,
    rftl_regret_bound,
    rftl_scale,
    rftl_schedule_bound,
    rftl_step,
)

from oracles import ball_grid_argmin, cumulative_loss_objective, random_set

UNIT = Ball([0.0, 0.0], 1.0)
ORIGIN_1D = VPolytope([[0.0]])
seeds = st.integers(0, 2**32 - 1)


def ctx_with(target, rewards):
    return LossContext(target, rewards=[np.asarray(r, dtype=float) for r in rewards])


# ---------------------------------------------------------------- steps


def test_ogd_example_from_zero():
    ctx = ctx_with(UNIT, [[3.0, 0.0]])
    np.testing.assert_array_equal(ogd_step(ctx, [0.0, 0.0], [3.0, 0.0], 1, 1.0), [1.0, 0.0])


def test_ogd_zero_subgradient_is_fixed_point():
    ctx = ctx_with(UNIT, [[0.0, 0.0]])
    w = np.array([0.6, 0.0])
    y = np.array([1.0, 0.0])  # argmax of the unit ball at w
    np.testing.assert_allclose(ogd_step(ctx, w, y, 3, 0.7), w, atol=1e-15)


def test_ogd_inside_ball_unprojected():
    ctx = ctx_with(UNIT, [[0.0, 0.0]])
    w = np.array([0.6, 0.0])
    r = np.array([1.0, 0.2])
    # y = (1, 0), v = w + 0.1 (r - y)
    np.testing.assert_allclose(ogd_step(ctx, w, r, 1, 0.1), [0.6, 0.02], atol=1e-15)


def test_ogd_orthant_domain():
    ctx = ctx_with(NonpositiveOrthantCone(2), [[0.0, 0.0]])
    # v = (-3, 4) clips to (0, 4) then rescales to (0, 1)
    np.testing.assert_allclose(ogd_step(ctx, [0.0, 0.0], [-3.0, 4.0], 1, 1.0), [0.0, 1.0], atol=1e-15)


def test_ftl_examples():
    assert np.array_equal(ftl_step(ctx_with(UNIT, [[0.1, 0.2]])), [0.0, 0.0])
    np.testing.assert_allclose(ftl_step(ctx_with(UNIT, [[0.0, 2.0]])), [0.0, 1.0], atol=1e-15)
    np.testing.assert_array_equal(ftl_step(ctx_with(ORIGIN_1D, [[-1.0]])), [-1.0])


def test_ftl_first_step_zero():
    ctx = LossContext(UNIT)
    sv = FTL().propose(ctx)
    assert np.array_equal(sv.w, [0.0, 0.0])
    with pytest.raises(ValueError):
        ftl_step(ctx)


def test_rftl_examples():
    assert np.array_equal(rftl_step(ctx_with(UNIT, [[0.3, 0.0]]), 1.0), [0.0, 0.0])
    ctx = ctx_with(ORIGIN_1D, [[5.0]] * 4)
    assert ctx.dist == pytest.approx(5.0)
    assert rftl_scale(ctx, 1.0) == 1.0
    np.testing.assert_allclose(rftl_step(ctx, 1.0), [1.0])
    ctx = ctx_with(ORIGIN_1D, [[0.01]])
    assert rftl_scale(ctx, 10.0) == pytest.approx(0.001, abs=1e-15)
    assert np.linalg.norm(rftl_step(ctx, 10.0)) == pytest.approx(0.001, abs=1e-15)


def test_rftl_policy_queries_unit_direction():
    ctx = ctx_with(ORIGIN_1D, [[0.01]])
    sv = RFTL(10.0).propose(ctx)
    np.testing.assert_allclose(sv.w, [0.001])
    np.testing.assert_array_equal(sv.direction, [1.0])


def test_ogd_policy_starts_at_zero():
    pol = OGD(1.0)
    ctx = LossContext(UNIT)
    pol.reset(ctx)
    assert np.array_equal(pol.propose(ctx).w, [0.0, 0.0])


def test_defaults():
    assert default_eta(2.0) == pytest.approx(math.sqrt(2) / 2)
    assert default_rho(2.0) == pytest.approx(2 * math.sqrt(2))


# ---------------------------------------------------------------- regret


def test_regret_stationary_play_is_zero():
    r = np.array([3.0, 4.0])
    ctx = ctx_with(UNIT, [r] * 5)
    u = ctx.direction
    assert realized_regret(ctx, [u] * 5) == pytest.approx(0.0, abs=1e-12)


def test_regret_single_step_zero_play():
    ctx = ctx_with(UNIT, [[2.0, 0.0]])
    assert realized_regret(ctx, [[0.0, 0.0]]) == pytest.approx(distance(UNIT, [2.0, 0.0]))


def test_regret_counterexample_linear():
    T = 200
    rewards = [np.array([-1.0])] + [np.array([2.0 * (-1) ** t]) for t in range(2, T + 1)]
    ctx = LossContext(ORIGIN_1D)
    ws, losses = [], []
    for r in rewards:
        w = np.zeros(1) if ctx.t == 0 else ftl_step(ctx)
        ws.append(w)
        losses.append(loss(ORIGIN_1D, w, r))
        ctx.observe(r)
    # w_t = sign(mean_{t-1}) is always opposite to r_t, so every loss after the first is 2
    assert losses[0] == 0.0 and all(f == 2.0 for f in losses[1:])
    reg = realized_regret(ctx, ws)
    assert reg >= T - 1 - T * abs(ctx.mean[0])
    assert reg / T > 1.9


def test_regret_rejects_infinite_support():
    ctx = ctx_with(NonpositiveOrthantCone(2), [[1.0, 1.0]])
    with pytest.raises(ValueError):
        realized_regret(ctx, [[-1.0, 0.0]])


# ---------------------------------------------------------------- bounds


def test_ogd_bound_examples():
    assert ogd_regret_bound(1, math.sqrt(2), 2.0, 1.0) == pytest.approx(4 * math.sqrt(2), abs=1e-12)
    assert ogd_regret_bound(400, 0.3, 2.0, 1.5) == pytest.approx(2 * ogd_regret_bound(100, 0.3, 2.0, 1.5))
    assert ogd_regret_bound(9, 0.5, 2.0, 0.0) == pytest.approx(4.0 / 0.5 * 3.0)


def test_ogd_bound_at_default_eta():
    G = 2.7
    b = ogd_regret_bound(1, default_eta(G), 2.0, G)
    assert b == pytest.approx(4 * math.sqrt(2) * G, rel=1e-12)


def test_rftl_bound_examples():
    assert rftl_regret_bound(1, math.sqrt(2), 1.0) == pytest.approx(3 * math.sqrt(2), abs=1e-12)
    assert rftl_regret_bound(1, math.sqrt(2), 1.0) == pytest.approx(4.243, abs=5e-4)
    assert rftl_regret_bound(25, 0.7, 0.0) == pytest.approx(0.7 * 5.0)
    T = np.array([1, 10, 100])
    np.testing.assert_allclose(rftl_regret_bound(T, 1.3, 0.4),
                               [rftl_regret_bound(int(t), 1.3, 0.4) for t in T])


def test_rftl_schedule_constant_reduces():
    T, rho0, L_f, L_R, R_max = 37, 1.7, 0.9, 3.0, 0.5
    got = rftl_schedule_bound(T, lambda t: rho0, L_f, L_R, R_max)
    assert got == pytest.approx(2 * L_f * T * L_f / (2 * rho0) + rho0 * R_max, rel=1e-13)


def test_ftl_log_examples():
    assert ftl_log_bound(1, 2.0, 3.0, 0.5) == pytest.approx(3.0)
    C0 = 4 * math.sqrt(2) * (2 * math.sqrt(2) + 1) * 1.0
    assert ftl_log_bound(1, 4 * math.sqrt(2), 2 * math.sqrt(2) + 1, 1.0) == pytest.approx(C0)
    assert C0 == pytest.approx(21.66, abs=5e-3)
    assert ftl_log_bound(1000, 4.0, 3.0, 0.0) == 0.0


# ---------------------------------------------------------------- grid oracle


def random_context(rng):
    S = random_set(rng, str(rng.choice(["ball", "polytope"])), 2)
    t = int(rng.integers(1, 6))
    rewards = 2.0 * rng.normal(size=(t, 2))
    return S, rewards


@pytest.mark.parametrize("seed", range(12))
def test_ftl_rftl_match_grid_argmin(seed):
    rng = np.random.default_rng(seed)
    S, rewards = random_context(rng)
    ctx = ctx_with(S, rewards)
    t = len(rewards)
    rho = float(rng.uniform(0.2, 3.0))
    for w, reg in ((ftl_step(ctx), 0.0), (rftl_step(ctx, rho), rho * math.sqrt(t))):
        F = cumulative_loss_objective(S, rewards, reg)
        grid_val, _ = ball_grid_argmin(F)
        lip = np.abs(rewards).sum() * 2 + t * 10 + reg
        assert F(w) <= grid_val + 1e-4
        assert grid_val <= F(w) + lip * 2e-3


# ---------------------------------------------------------------- properties


@given(seed=seeds)
def test_running_mean_exact(seed):
    rng = np.random.default_rng(seed)
    rewards = rng.normal(size=(int(rng.integers(1, 300)), 3))
    ctx = ctx_with(Ball(np.zeros(3), 1.0), rewards)
    np.testing.assert_allclose(ctx.mean, rewards.mean(axis=0), atol=1e-12)


@given(seed=seeds, rho=st.floats(0.01, 10.0))
def test_beta_in_unit_interval_and_collinear(seed, rho):
    rng = np.random.default_rng(seed)
    S, rewards = random_context(rng)
    ctx = ctx_with(S, rewards + 3.0 * rng.normal(size=2))
    u, v = ftl_step(ctx), rftl_step(ctx, rho)
    if ctx.dist > 1e-12:
        beta = rftl_scale(ctx, rho)
        assert 0.0 < beta <= 1.0
        cos = float(u @ v) / (np.linalg.norm(u) * np.linalg.norm(v))
        assert abs(u[0] * v[1] - u[1] * v[0]) <= 1e-10
        assert cos > 0
    else:
        assert not v.any()


@given(seed=seeds, lam=st.floats(0.0, 1.0),
       kind=st.sampled_from(["ball", "polytope", "halfspaces", "orthant"]))
def test_loss_convex(seed, lam, kind):
    rng = np.random.default_rng(seed)
    d = int(rng.integers(1, 4))
    S = random_set(rng, kind, d)
    w1, w2 = rng.normal(size=d), rng.normal(size=d)
    if S.is_cone:
        w1, w2 = np.abs(w1), np.abs(w2)
    w1 /= max(1.0, np.linalg.norm(w1))
    w2 /= max(1.0, np.linalg.norm(w2))
    r = 3.0 * rng.normal(size=d)
    lhs = loss(S, lam * w1 + (1 - lam) * w2, r)
    assert lhs <= lam * loss(S, w1, r) + (1 - lam) * loss(S, w2, r) + 1e-9


@given(seed=seeds, eta=st.floats(0.01, 5.0), cone=st.booleans())
def test_ogd_iterates_stay_in_domain(seed, eta, cone):
    rng = np.random.default_rng(seed)
    S = NonpositiveOrthantCone(2) if cone else random_set(rng, "polytope", 2)
    ctx = LossContext(S)
    pol = OGD(eta)
    pol.reset(ctx)
    for _ in range(30):
        w = pol.propose(ctx).w
        assert np.linalg.norm(w) <= 1 + 1e-12
        if cone:
            assert np.all(w >= 0)
        r = 2.0 * rng.normal(size=2)
        ctx.observe(r)
        pol.update(ctx, w, r)
