"""Blackwell approachability driven by online convex optimization.

Target sets are exposed through support functions and projections; a steering
algorithm (OGD, FTL, regularized FTL) picks w_t, a minimax LP picks the mixed
action, and the engine records the distance of the average reward to S.
"""

from .engine import (
    ActionSequence,
    FixedMixed,
    FixedPure,
    GreedyWorstCase,
    RoundRobin,
    RunTrace,
    martingale_gap_diagnostic,
    raw_sequence_run,
    run_blackwell,
    run_meta,
)
from .game import VectorGame, corner_game, matching_pennies_vector, regret_game, reward_constants
from .geometry import (
    Ball,
    HalfspaceIntersection,
    LiftedCone,
    NonpositiveOrthantCone,
    VPolytope,
    distance,
    dual_distance,
    lift,
    project,
    steering_direction,
    support,
    support_argmax,
)
from .minimax import approachability_certificate, response_oracle, scalar_minimax
from .oco import FTL, OGD, RFTL, default_eta, default_rho

__version__ = "0.1.0"

__all__ = [
    "ActionSequence",
    "approachability_certificate",
    "Ball",
    "corner_game",
    "default_eta",
    "default_rho",
    "distance",
    "dual_distance",
    "FixedMixed",
    "FixedPure",
    "FTL",
    "GreedyWorstCase",
    "HalfspaceIntersection",
    "lift",
    "LiftedCone",
    "martingale_gap_diagnostic",
    "matching_pennies_vector",
    "NonpositiveOrthantCone",
    "OGD",
    "project",
    "raw_sequence_run",
    "regret_game",
    "response_oracle",
    "reward_constants",
    "RFTL",
    "RoundRobin",
    "run_blackwell",
    "run_meta",
    "RunTrace",
    "scalar_minimax",
    "steering_direction",
    "support",
    "support_argmax",
    "VectorGame",
    "VPolytope",
]
