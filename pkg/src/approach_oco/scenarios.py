"""Built-in experiment configs, stored as the JSON documents a user would write."""

from __future__ import annotations

from .config import ExperimentConfig, config_from_dict

_G1 = {"builder": "corner_game"}
_UNIT_BALL = {"type": "ball", "center": [0.0, 0.0], "radius": 1.0}
_PENNIES_SEGMENT = {"type": "polytope", "vertices": [[0.5, 0.5], [1.0, 0.0]]}

# G1 has a single Nature action, so these all coincide there; they are listed
# so that the same adversary battery runs on every scenario
_G1_ADVERSARIES = [
    {"type": "fixed_pure", "action": 0},
    {"type": "fixed_mixed", "probs": [1.0]},
    {"type": "fixed_mixed", "probs": [1.0], "seed": 1},
    {"type": "round_robin"},
    {"type": "greedy"},
]
_TWO_ACTION_ADVERSARIES = [
    {"type": "fixed_pure", "action": 0},
    {"type": "fixed_pure", "action": 1},
    {"type": "fixed_mixed", "probs": [0.5, 0.5]},
    {"type": "round_robin"},
    {"type": "greedy"},
]


def _game(name, description, game, target, steering, adversaries, bound, kind="game", **extra) -> dict:
    doc = {
        "schema_version": 1,
        "name": name,
        "description": description,
        "kind": kind,
        "game": game,
        "target": target,
        "steering": steering,
        "adversaries": adversaries,
        "horizon": 10_000,
        "seeds": [0],
        "bound": bound,
    }
    doc.update(extra)
    return doc


_DOCS = [
    _game(
        "g1-ball-ftl-log",
        "FTL (= Blackwell) on the corner game with a unit-ball target; log-rate bound",
        _G1, _UNIT_BALL, {"algorithm": "ftl"}, _G1_ADVERSARIES,
        {"kind": "ftl_log", "kappa0": 1.0},
    ),
    _game(
        "g1-ball-ogd",
        "OGD steering on the corner game with a unit-ball target; 4 sqrt(2) ||R-S|| / sqrt(T)",
        _G1, _UNIT_BALL, {"algorithm": "ogd", "eta": "default"}, _G1_ADVERSARIES,
        {"kind": "ogd"},
    ),
    _game(
        "g1-ball-rftl",
        "Regularized FTL on the corner game with a unit-ball target; a0(T) / T",
        _G1, _UNIT_BALL, {"algorithm": "rftl", "rho": "default"}, _G1_ADVERSARIES,
        {"kind": "rftl"},
    ),
    _game(
        "g1-ball-blackwell",
        "Blackwell's projection strategy on the corner game; ||R-S|| / sqrt(T)",
        _G1, _UNIT_BALL, {"algorithm": "blackwell"}, _G1_ADVERSARIES,
        {"kind": "blackwell"},
    ),
    _game(
        "polytope-pennies",
        "Regularized FTL on vector matching pennies with a segment target; a0(T) / T",
        {"builder": "matching_pennies_vector"}, _PENNIES_SEGMENT,
        {"algorithm": "rftl", "rho": "default"}, _TWO_ACTION_ADVERSARIES,
        {"kind": "rftl"},
    ),
    _game(
        "regret-cone-ogd",
        "No-regret play in matching pennies via OGD steering toward the nonpositive orthant",
        {"builder": "regret_game", "base": [[1.0, -1.0], [-1.0, 1.0]]}, {"type": "orthant"},
        {"algorithm": "ogd", "eta": "default"}, _TWO_ACTION_ADVERSARIES,
        {"kind": "ogd"},
    ),
    {
        "schema_version": 1,
        "name": "ftl-counterexample",
        "description": "Alternating rewards against S = {0}: FTL regret grows linearly",
        "kind": "raw_sequence",
        "target": {"type": "polytope", "vertices": [[0.0]]},
        "steering": {"algorithm": "ftl"},
        "rewards": {"generator": "ftl_counterexample"},
        "horizon": 10_000,
        "bound": {"kind": "linear_regret", "min_ratio": 0.9, "from_t": 100},
    },
    {
        "schema_version": 1,
        "name": "lifting-check",
        "description": "dist(u, S) <= 2 dist(u', S') for the cone lift of a ball and a polytope",
        "kind": "lifting_check",
        "lifting": {
            "bases": [_UNIT_BALL, _PENNIES_SEGMENT],
            "n_points": 1000,
            "seed": 0,
            "scale": 3.0,
        },
    },
    _game(
        "martingale-gap",
        "Smoothed vs sampled average reward under uniform play on the corner game, 50 seeds",
        _G1, _UNIT_BALL, {"algorithm": "ftl"}, [{"type": "fixed_pure", "action": 0}],
        {"kind": "none"},
        kind="martingale_gap",
        seeds=list(range(50)),
        flags={"sample_rewards": True},
        gap={"horizons": [250, 2500], "max_ratio": 0.75},
    ),
]

SCENARIOS: dict[str, dict] = {doc["name"]: doc for doc in _DOCS}


def list_scenarios() -> list[tuple[str, str]]:
    return [(name, doc["description"]) for name, doc in SCENARIOS.items()]


def load_scenario(name: str) -> ExperimentConfig:
    if name not in SCENARIOS:
        raise KeyError(f"unknown scenario '{name}'; valid names: {', '.join(SCENARIOS)}")
    return config_from_dict(SCENARIOS[name])
