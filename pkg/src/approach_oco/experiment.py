"""Execute a validated ExperimentConfig: engine runs, bound checks, CSV + summary files."""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .config import (
    ExperimentConfig,
    adversary_label,
    ball_kappa0,
    bounding_ball,
    build_adversary,
    build_game,
    build_steering,
    build_target,
)
from .engine import (
    RunTrace,
    ftl_counterexample_rewards,
    martingale_gap_diagnostic,
    philox,
    raw_sequence_run,
    run_blackwell,
    run_meta,
)
from .errors import SeparationViolation
from .game import RewardConstants, VectorGame, reward_constants
from .geometry import distance, lift
from .minimax import CertificateReport, approachability_certificate
from .oco import (
    OGD,
    RFTL,
    blackwell_distance_bound,
    ftl_log_bound,
    ogd_regret_bound,
    rftl_regret_bound,
)

log = logging.getLogger(__name__)

BOUND_SLACK = 1e-8
# diameter of the unit ball, the OGD decision set
DIAM_W = 2.0

EXIT_PASS, EXIT_BOUND, EXIT_SEPARATION, EXIT_CONFIG = 0, 1, 2, 3


@dataclass
class RunResult:
    label: str
    seed: int
    trace: RunTrace | None
    dist_bound: np.ndarray | None  # bound on dist(mean_T, S), per prefix
    regret_bound: np.ndarray | None  # bound on realized regret, per prefix (RFTL)
    passed: bool
    max_margin: float  # max over prefixes of dist - bound (nan without a bound)
    csv_path: Path | None = None
    extra: dict = field(default_factory=dict)

    def summary(self) -> dict:
        out = {"run": self.label, "seed": self.seed, "pass": self.passed}
        if self.trace is not None:
            out["final_dist"] = float(self.trace.dist[-1])
            out["final_regret"] = float(self.trace.regret[-1])
        out["max_bound_margin"] = None if np.isnan(self.max_margin) else float(self.max_margin)
        if self.csv_path is not None:
            out["csv"] = self.csv_path.name
        out.update(self.extra)
        return out


@dataclass
class ExperimentResult:
    config: ExperimentConfig
    runs: list[RunResult]
    status: int
    summary: dict
    certificate: CertificateReport | None = None
    violation: SeparationViolation | None = None

    @property
    def passed(self) -> bool:
        return self.status == EXIT_PASS


# ---------------------------------------------------------------------------
# bounds


def bound_series(
    cfg: ExperimentConfig, constants: RewardConstants, policy, T: np.ndarray, target
) -> tuple[np.ndarray | None, np.ndarray | None]:
    """(bound on dist per prefix, bound on regret per prefix) for the configured kind."""
    kind = cfg.bound.kind
    T = np.asarray(T, dtype=float)
    if kind == "ogd":
        eta = policy.eta if isinstance(policy, OGD) else float(cfg.steering.eta)
        regret = ogd_regret_bound(T, eta, DIAM_W, constants.G)
        return regret / T, None
    if kind == "rftl":
        rho = policy.rho if isinstance(policy, RFTL) else float(cfg.steering.rho)
        a0 = rftl_regret_bound(T, rho, constants.dist_RS)
        return a0 / T, a0
    if kind == "ftl_log":
        kappa0 = cfg.bound.kappa0 if cfg.bound.kappa0 is not None else ball_kappa0(target)
        return ftl_log_bound(T, constants.diam_R, constants.dist_RS, kappa0) / T, None
    if kind == "blackwell":
        return blackwell_distance_bound(T, constants.dist_RS), None
    return None, None


def _check(trace: RunTrace, dist_bound, regret_bound) -> tuple[bool, float]:
    if dist_bound is None:
        return True, float("nan")
    margin = trace.dist - dist_bound
    ok = bool(np.all(margin <= BOUND_SLACK))
    if regret_bound is not None:
        ok = ok and bool(np.all(trace.regret - regret_bound <= BOUND_SLACK))
    return ok, float(np.max(margin))


# ---------------------------------------------------------------------------
# CSV


def _fmt_table(path: Path, header: list[str], columns: list[np.ndarray]) -> None:
    table = np.column_stack([np.asarray(c, dtype=float).reshape(len(c), -1) for c in columns])
    np.savetxt(path, table, fmt="%.17g", delimiter=",", header=",".join(header), comments="")


def write_trace_csv(path: Path, trace: RunTrace, dist_bound, verbose: bool, gap=None) -> None:
    T = len(trace)
    header = ["t", "dist", "regret", "bound_over_T"]
    cols = [trace.t, trace.dist, trace.regret, dist_bound if dist_bound is not None else np.full(T, np.nan)]
    if gap is not None:
        header.append("gap")
        cols.append(gap)
    if verbose:
        d = trace.w.shape[1]
        header += [f"w{k}" for k in range(d)]
        cols.append(trace.w)
        if trace.x is not None:
            header += [f"x{k}" for k in range(trace.x.shape[1])] + ["j"]
            cols += [trace.x, trace.j]
        header += [f"r{k}" for k in range(d)]
        cols.append(trace.r)
        if trace.sampled_i is not None:
            header.append("i")
            cols.append(trace.sampled_i)
    _fmt_table(path, header, cols)


# ---------------------------------------------------------------------------
# kinds


def _game_constants(cfg: ExperimentConfig, game: VectorGame, target) -> RewardConstants:
    return reward_constants(game, target, bounding_ball(cfg.target))


def _run_game(cfg: ExperimentConfig, out: Path | None) -> ExperimentResult:
    game, _ = build_game(cfg.game)
    target = build_target(cfg.target, game.dim)
    constants = _game_constants(cfg, game, target)
    cert = None
    if cfg.flags.certificate:
        cert = approachability_certificate(game, target, cfg.flags.certificate_directions)
        if cert.violated:
            summary = {
                "name": cfg.name,
                "status": "separation_violation",
                "violations": [
                    {"w": w.tolist(), "value": val, "support": h} for w, val, h in cert.violations
                ],
            }
            _write_summary(out, summary)
            return ExperimentResult(cfg, [], EXIT_SEPARATION, summary, cert)

    sample = cfg.flags.sample_rewards or cfg.kind == "martingale_gap"
    runs: list[RunResult] = []
    for seed in cfg.seeds:
        for k, adv_spec in enumerate(cfg.adversaries):
            label = adversary_label(adv_spec, k)
            adversary = build_adversary(adv_spec, seed)
            policy = build_steering(cfg.steering, constants)
            meta = {"name": cfg.name, "seed": seed, "run": label}
            try:
                if policy is None:
                    trace = run_blackwell(game, target, adversary, cfg.horizon, seed if sample else None, meta)
                else:
                    trace = run_meta(game, target, policy, adversary, cfg.horizon, seed if sample else None, meta)
            except SeparationViolation as exc:
                summary = {
                    "name": cfg.name,
                    "status": "separation_violation",
                    "violations": [{"w": exc.w.tolist(), "value": exc.value, "support": exc.support}],
                    "run": label,
                    "seed": seed,
                }
                _write_summary(out, summary)
                return ExperimentResult(cfg, runs, EXIT_SEPARATION, summary, cert, exc)
            dist_b, regret_b = bound_series(cfg, constants, policy, trace.t, target)
            ok, margin = _check(trace, dist_b, regret_b)
            gap = martingale_gap_diagnostic(trace) if sample else None
            res = RunResult(label, seed, trace, dist_b, regret_b, ok, margin)
            if out is not None:
                res.csv_path = out / f"{label}_seed{seed}.csv"
                write_trace_csv(res.csv_path, trace, dist_b if cfg.flags.bound_series else None,
                                cfg.flags.verbose, gap)
            log.info("%s seed %d: final dist %.3g, pass=%s", label, seed, trace.dist[-1], ok)
            runs.append(res)

    summary = {
        "name": cfg.name,
        "kind": cfg.kind,
        "horizon": cfg.horizon,
        "bound": cfg.bound.kind,
        "diam_R": constants.diam_R,
        "dist_RS": constants.dist_RS,
        "runs": [r.summary() for r in runs],
    }
    ok = all(r.passed for r in runs)
    if cfg.kind == "martingale_gap":
        gap_ok, gap_summary = _martingale_summary(cfg, runs)
        summary["martingale_gap"] = gap_summary
        ok = ok and gap_ok
    summary["pass"] = ok
    _write_summary(out, summary)
    return ExperimentResult(cfg, runs, EXIT_PASS if ok else EXIT_BOUND, summary, cert)


def _martingale_summary(cfg: ExperimentConfig, runs: list[RunResult]) -> tuple[bool, dict]:
    gaps = np.array([martingale_gap_diagnostic(r.trace) for r in runs])
    avg = gaps.mean(axis=0)
    rows, ok = [], True
    for h in cfg.gap.horizons:
        ratio = float(avg[4 * h - 1] / avg[h - 1])
        passed = ratio <= cfg.gap.max_ratio
        ok = ok and passed
        rows.append({"T": h, "gap_T": float(avg[h - 1]), "gap_4T": float(avg[4 * h - 1]),
                     "ratio": ratio, "pass": passed})
    return ok, {"n_runs": len(runs), "max_ratio": cfg.gap.max_ratio, "checks": rows}


def _raw_rewards(cfg: ExperimentConfig) -> list[np.ndarray]:
    if cfg.rewards.generator == "ftl_counterexample":
        return ftl_counterexample_rewards(cfg.horizon)
    return [np.array(r, dtype=float) for r in cfg.rewards.values[: cfg.horizon]]


def _run_raw(cfg: ExperimentConfig, out: Path | None) -> ExperimentResult:
    rewards = _raw_rewards(cfg)
    target = build_target(cfg.target, rewards[0].size)
    # the realized rewards play the role of the pure payoffs
    unique = np.unique(np.array(rewards), axis=0)
    constants = reward_constants(VectorGame(unique[:, None, :]), target, bounding_ball(cfg.target))
    runs = []
    for seed in cfg.seeds:
        policy = build_steering(cfg.steering, constants)
        trace = raw_sequence_run(target, rewards, policy)
        trace.config.update(name=cfg.name, seed=seed)
        dist_b, regret_b = bound_series(cfg, constants, policy, trace.t, target)
        ok, margin = _check(trace, dist_b, regret_b)
        extra = {}
        if cfg.bound.kind == "linear_regret":
            ratio = trace.regret / trace.t
            window = ratio[cfg.bound.from_t - 1:]
            extra = {
                "expectation": "linear regret (no sublinear bound)",
                "min_regret_over_T": float(window.min()) if window.size else None,
                "min_ratio_required": cfg.bound.min_ratio,
            }
            if len(trace) >= 1000:
                extra["regret_over_T_at_1000"] = float(ratio[999])
            ok = bool(window.size) and bool(window.min() >= cfg.bound.min_ratio)
            extra["expectation_met"] = ok
        res = RunResult(f"{cfg.steering.algorithm}", seed, trace, dist_b, regret_b, ok, margin, extra=extra)
        if out is not None:
            res.csv_path = out / f"{res.label}_seed{seed}.csv"
            write_trace_csv(res.csv_path, trace, dist_b if cfg.flags.bound_series else None, cfg.flags.verbose)
        runs.append(res)
    ok = all(r.passed for r in runs)
    summary = {
        "name": cfg.name,
        "kind": cfg.kind,
        "horizon": cfg.horizon,
        "bound": cfg.bound.kind,
        "diam_R": constants.diam_R,
        "dist_RS": constants.dist_RS,
        "runs": [r.summary() for r in runs],
        "pass": ok,
    }
    _write_summary(out, summary)
    return ExperimentResult(cfg, runs, EXIT_PASS if ok else EXIT_BOUND, summary)


def lifting_table(base, n_points: int, seed: int, scale: float) -> np.ndarray:
    """Rows (dist(u, S), dist(u', S')) for uniform points u in [-scale, scale]^d."""
    cone, transform = lift(base)
    rng = philox(seed)
    pts = rng.uniform(-scale, scale, size=(n_points, base.dim))
    return np.array([[distance(base, u), distance(cone, transform(u))] for u in pts])


def _run_lifting(cfg: ExperimentConfig, out: Path | None) -> ExperimentResult:
    lf = cfg.lifting
    runs = []
    for k, spec in enumerate(lf.bases):
        base = build_target(spec, None, f"lifting.bases[{k}]")
        table = lifting_table(base, lf.n_points, lf.seed, lf.scale)
        margin = table[:, 0] - 2.0 * table[:, 1]
        ok = bool(np.all(margin <= BOUND_SLACK))
        label = f"{k:02d}-{spec.type}"
        res = RunResult(label, lf.seed, None, None, None, ok, float(margin.max()),
                        extra={"n_points": lf.n_points, "max_ratio": float(np.max(
                            np.divide(table[:, 0], table[:, 1], out=np.zeros(len(table)),
                                      where=table[:, 1] > 0)))})
        if out is not None:
            res.csv_path = out / f"{label}.csv"
            _fmt_table(res.csv_path, ["index", "dist", "lifted_dist", "margin"],
                       [np.arange(len(table)), table[:, 0], table[:, 1], margin])
        runs.append(res)
    ok = all(r.passed for r in runs)
    summary = {"name": cfg.name, "kind": cfg.kind, "runs": [r.summary() for r in runs], "pass": ok}
    _write_summary(out, summary)
    return ExperimentResult(cfg, runs, EXIT_PASS if ok else EXIT_BOUND, summary)


def _write_summary(out: Path | None, summary: dict) -> None:
    if out is not None:
        (out / "summary.json").write_text(json.dumps(summary, indent=2, sort_keys=True) + "\n")


def run_experiment(cfg: ExperimentConfig, out_dir: str | Path | None = None) -> ExperimentResult:
    """Run every (seed, adversary) pair of ``cfg``; write CSVs and a summary if ``out_dir``."""
    out = None
    if out_dir is not None:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
    if cfg.kind == "raw_sequence":
        return _run_raw(cfg, out)
    if cfg.kind == "lifting_check":
        return _run_lifting(cfg, out)
    return _run_game(cfg, out)
