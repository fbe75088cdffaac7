"""Command line entry point.

    approach-oco run --config cfg.json | --scenario NAME [--out DIR] [--seeds 0,1] [--horizon T] [--verbose]
    approach-oco list-scenarios
    approach-oco certify --config cfg.json --directions N

Exit codes: 0 pass, 1 bound violated, 2 separation violation, 3 config error.
The output directory is, in order of precedence: --out, $APPROACH_OCO_OUT,
the config's ``output`` entry, then ``out/<scenario name>``.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys
from pathlib import Path

from .config import ExperimentConfig, build_game, build_target, parse_config
from .errors import ConfigError
from .experiment import EXIT_BOUND, EXIT_CONFIG, EXIT_PASS, EXIT_SEPARATION, ExperimentResult, run_experiment
from .minimax import approachability_certificate
from .scenarios import SCENARIOS, list_scenarios, load_scenario

OUT_ENV = "APPROACH_OCO_OUT"


def _seeds(text: str) -> tuple[int, ...]:
    try:
        seeds = tuple(int(s) for s in text.split(",") if s.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"seeds must be comma-separated integers, got {text!r}") from None
    if not seeds:
        raise argparse.ArgumentTypeError("at least one seed is required")
    return seeds


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="approach-oco", description="Approachability via OCO steering")
    sub = p.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run a config file or a built-in scenario")
    src = run.add_mutually_exclusive_group(required=True)
    src.add_argument("--config", type=Path)
    src.add_argument("--scenario")
    run.add_argument("--out", type=Path)
    run.add_argument("--seeds", type=_seeds)
    run.add_argument("--horizon", type=int)
    run.add_argument("--verbose", action="store_true", help="per-step w, x, j, r columns in the CSVs")

    sub.add_parser("list-scenarios", help="list the built-in scenarios")

    cert = sub.add_parser("certify", help="check val(w.r) <= h_S(w) over sampled directions")
    cert.add_argument("--config", type=Path, required=True)
    cert.add_argument("--directions", type=int, default=256)
    return p


def resolve_output(cli_out: Path | None, cfg: ExperimentConfig) -> Path:
    if cli_out is not None:
        return cli_out
    if os.environ.get(OUT_ENV):
        return Path(os.environ[OUT_ENV])
    if cfg.output:
        return Path(cfg.output)
    return Path("out") / (cfg.name or "experiment")


def _print_violations(violations, out) -> None:
    for w, value, h in violations:
        print(f"separation violation at w = {list(map(float, w))}: val(w.r) = {value:.6g} > h_S(w) = {h:.6g}",
              file=out)


def _report(result: ExperimentResult, out_dir: Path) -> None:
    s = result.summary
    if result.status == EXIT_SEPARATION:
        viol = [(v["w"], v["value"], v["support"]) for v in s["violations"]]
        _print_violations(viol, sys.stderr)
        print("S is not approachable for this game; run aborted", file=sys.stderr)
        return
    for run in s.get("runs", []):
        bits = [f"{run['run']}", f"seed={run['seed']}"]
        if "final_dist" in run:
            bits.append(f"dist_T={run['final_dist']:.6g}")
        if run.get("max_bound_margin") is not None:
            bits.append(f"max(dist - bound)={run['max_bound_margin']:.3g}")
        if "min_regret_over_T" in run:
            bits.append(f"min regret/T={run['min_regret_over_T']:.4g}")
        bits.append("PASS" if run["pass"] else "FAIL")
        print("  ".join(bits))
    gap = s.get("martingale_gap")
    if gap:
        for row in gap["checks"]:
            print(f"gap({4 * row['T']})/gap({row['T']}) = {row['ratio']:.4f}  {'PASS' if row['pass'] else 'FAIL'}")
    print(f"{s.get('name', '')}: {'PASS' if result.passed else 'FAIL'}  (outputs in {out_dir})")


def _cmd_run(args) -> int:
    if args.scenario is not None:
        try:
            cfg = load_scenario(args.scenario)
        except KeyError as exc:
            print(f"error: {exc.args[0]}", file=sys.stderr)
            return EXIT_CONFIG
    else:
        cfg = parse_config(args.config)
    cfg = cfg.with_overrides(horizon=args.horizon, seeds=args.seeds, verbose=args.verbose)
    out_dir = resolve_output(args.out, cfg)
    result = run_experiment(cfg, out_dir)
    _report(result, out_dir)
    return result.status


def _cmd_certify(args) -> int:
    cfg = parse_config(args.config)
    if cfg.game is None:
        print("error: certify needs a config with a game", file=sys.stderr)
        return EXIT_CONFIG
    if args.directions < 1:
        print("error: --directions must be positive", file=sys.stderr)
        return EXIT_CONFIG
    game, _ = build_game(cfg.game)
    target = build_target(cfg.target, game.dim)
    report = approachability_certificate(game, target, args.directions)
    if report.violated:
        _print_violations(report.violations, sys.stdout)
        return EXIT_SEPARATION
    print(f"no violation over {report.n_directions} directions; "
          f"worst margin val(w.r) - h_S(w) = {report.worst_margin:.6g}")
    return EXIT_PASS


def main(argv: list[str] | None = None) -> int:
    args = _parser().parse_args(argv)
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.command == "list-scenarios":
            for name, desc in list_scenarios():
                print(f"{name:<20} {desc}")
            return EXIT_PASS
        if args.command == "certify":
            return _cmd_certify(args)
        return _cmd_run(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        for path, msg in exc.errors[1:]:
            print(f"  {path}: {msg}", file=sys.stderr)
        return EXIT_CONFIG


__all__ = ["EXIT_BOUND", "EXIT_CONFIG", "EXIT_PASS", "EXIT_SEPARATION", "SCENARIOS", "main", "resolve_output"]

if __name__ == "__main__":
    sys.exit(main())
