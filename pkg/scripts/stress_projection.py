"""Compare polytope and halfspace projections with brute-force oracles on random instances.

    python scripts/stress_projection.py [--n 1000] [--seed 0]

Prints the worst distance error and the slowest call per set type. The
oracles live in tests/oracles.py and enumerate faces or active sets, so keep
dimensions small.
"""

from __future__ import annotations

import argparse
import sys
import time
from pathlib import Path

import numpy as np

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "tests"))

from oracles import halfspace_projection_bruteforce, polytope_projection_bruteforce, random_set  # noqa: E402

from approach_oco.geometry import distance  # noqa: E402


def main(argv: list[str] | None = None) -> int:
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--n", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0)
    args = p.parse_args(argv)
    rng = np.random.default_rng(args.seed)

    for kind, oracle in (("polytope", polytope_projection_bruteforce), ("halfspaces", halfspace_projection_bruteforce)):
        worst, slowest = 0.0, 0.0
        for _ in range(args.n):
            d = int(rng.integers(1, 4))
            S = random_set(rng, kind, d)
            r = 3.0 * rng.normal(size=d)
            t0 = time.perf_counter()
            got = distance(S, r)
            slowest = max(slowest, time.perf_counter() - t0)
            ref = oracle(S.vertices, r) if kind == "polytope" else oracle(S.normals, S.offsets, r)
            worst = max(worst, abs(got - float(np.linalg.norm(r - ref))))
        print(f"{kind:<11} n={args.n}  worst |dist - oracle| = {worst:.2e}  slowest call {1e3 * slowest:.2f} ms")
    return 0


if __name__ == "__main__":
    sys.exit(main())
