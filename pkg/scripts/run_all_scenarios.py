"""Run every built-in scenario and print one verdict line per scenario.

    python scripts/run_all_scenarios.py [--out DIR] [--horizon T] [--only NAME ...]

Outputs (CSV traces and summary.json) go to DIR/<scenario>. The exit status
is the worst status seen: 0 all pass, 1 a bound was violated, 3 an override
was rejected (martingale-gap needs a horizon of at least 4 x its largest check).
"""

from __future__ import annotations

import argparse
import sys
import time
from pathlib import Path

from approach_oco.errors import ConfigError
from approach_oco.experiment import EXIT_CONFIG, run_experiment
from approach_oco.scenarios import SCENARIOS, load_scenario


def main(argv: list[str] | None = None) -> int:
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--out", type=Path, default=Path("out"))
    p.add_argument("--horizon", type=int, help="override the horizon of every game scenario")
    p.add_argument("--only", nargs="+", choices=sorted(SCENARIOS), help="run a subset")
    args = p.parse_args(argv)

    worst = 0
    for name in args.only or list(SCENARIOS):
        try:
            cfg = load_scenario(name).with_overrides(horizon=args.horizon)
        except ConfigError as exc:
            print(f"{name:<20} SKIP  {exc}")
            worst = max(worst, EXIT_CONFIG)
            continue
        t0 = time.perf_counter()
        result = run_experiment(cfg, args.out / name)
        secs = time.perf_counter() - t0
        print(f"{name:<20} {'PASS' if result.passed else 'FAIL'}  {secs:7.1f} s")
        worst = max(worst, result.status)
    return worst


if __name__ == "__main__":
    sys.exit(main())
