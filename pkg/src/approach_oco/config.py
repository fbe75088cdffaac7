"""Experiment configuration: JSON schema, typed specs, parse/emit, and builders.

A config is a JSON object with a top-level ``schema_version``. Structural
problems (wrong types, unknown keys, ragged arrays) raise SchemaError; values
that are well-formed but unusable (negative radius, action out of range) raise
ValidationError. Both carry the dotted key path of the offending entry.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, fields, replace
from pathlib import Path
from typing import Any

import jsonschema
import numpy as np

from .engine import ActionSequence, FixedMixed, FixedPure, GreedyWorstCase, RoundRobin
from .errors import ParseError, SchemaError, ValidationError
from .game import RewardConstants, VectorGame, corner_game, matching_pennies_vector, regret_game
from .geometry import Ball, ConvexTargetSet, HalfspaceIntersection, NonpositiveOrthantCone, VPolytope
from .oco import FTL, OGD, RFTL, default_eta, default_rho

SCHEMA_VERSION = 1

KINDS = ("game", "raw_sequence", "lifting_check", "martingale_gap")
BOUND_KINDS = ("none", "ogd", "rftl", "ftl_log", "blackwell", "linear_regret")

# ---------------------------------------------------------------------------
# JSON schema (structure only; values are checked after typing)

_num = {"type": "number"}
_int = {"type": "integer"}
_vec = {"type": "array", "items": _num, "minItems": 1}
_mat = {"type": "array", "items": _vec, "minItems": 1}
_default_or_num = {"anyOf": [{"const": "default"}, _num]}


def _obj(props: dict, required: tuple[str, ...] = ()) -> dict:
    return {
        "type": "object",
        "properties": props,
        "required": list(required),
        "additionalProperties": False,
    }


_GAME_VARIANTS = {
    "payoffs": _obj({"builder": {}, "payoffs": {"type": "array", "items": _mat, "minItems": 1}}, ("payoffs",)),
    "regret_game": _obj({"builder": {}, "base": _mat}, ("base",)),
    "corner_game": _obj({"builder": {}, "half_width": _num}),
    "matching_pennies_vector": _obj({"builder": {}}),
}

_BALL = _obj({"type": {}, "center": _vec, "radius": _num}, ("center", "radius"))
_TARGET_VARIANTS = {
    "ball": _BALL,
    "polytope": _obj({"type": {}, "vertices": _mat}, ("vertices",)),
    "orthant": _obj({"type": {}, "dim": _int}),
    "halfspaces": _obj(
        {
            "type": {},
            "normals": _mat,
            "offsets": _vec,
            "interior_point": _vec,
            "bounding_ball": _obj({"center": _vec, "radius": _num}, ("center", "radius")),
        },
        ("normals", "offsets", "interior_point", "bounding_ball"),
    ),
}

_STEERING_VARIANTS = {
    "ogd": _obj({"algorithm": {}, "eta": _default_or_num}),
    "ftl": _obj({"algorithm": {}}),
    "rftl": _obj({"algorithm": {}, "rho": _default_or_num}),
    "blackwell": _obj({"algorithm": {}}),
}

_ADVERSARY_VARIANTS = {
    "fixed_pure": _obj({"type": {}, "action": _int}, ("action",)),
    "fixed_mixed": _obj({"type": {}, "probs": _vec, "seed": _int}, ("probs",)),
    "sequence": _obj({"type": {}, "actions": {"type": "array", "items": _int, "minItems": 1}}, ("actions",)),
    "round_robin": _obj({"type": {}}),
    "greedy": _obj({"type": {}}),
}

_TOP = _obj(
    {
        "schema_version": _int,
        "name": {"type": "string"},
        "description": {"type": "string"},
        "kind": {"enum": list(KINDS)},
        "game": {"type": "object"},
        "target": {"type": "object"},
        "steering": {"type": "object"},
        "adversaries": {"type": "array", "items": {"type": "object"}, "minItems": 1},
        "horizon": _int,
        "seeds": {"type": "array", "items": _int, "minItems": 1},
        "output": {"type": ["string", "null"]},
        "flags": _obj(
            {
                "sample_rewards": {"type": "boolean"},
                "bound_series": {"type": "boolean"},
                "certificate": {"type": "boolean"},
                "certificate_directions": _int,
                "verbose": {"type": "boolean"},
            }
        ),
        "bound": _obj(
            {
                "kind": {"enum": list(BOUND_KINDS)},
                "kappa0": _num,
                "min_ratio": _num,
                "from_t": _int,
            },
            ("kind",),
        ),
        "rewards": _obj({"generator": {"enum": ["ftl_counterexample"]}, "values": _mat}),
        "lifting": _obj(
            {
                "bases": {"type": "array", "items": {"type": "object"}, "minItems": 1},
                "n_points": _int,
                "seed": _int,
                "scale": _num,
            },
            ("bases",),
        ),
        "gap": _obj(
            {"horizons": {"type": "array", "items": _int, "minItems": 1}, "max_ratio": _num},
            ("horizons",),
        ),
    },
    ("schema_version", "kind"),
)

_REQUIRED_SECTIONS = {
    "game": ("game", "target", "steering", "adversaries", "horizon"),
    "raw_sequence": ("target", "steering", "rewards", "horizon"),
    "lifting_check": ("lifting",),
    "martingale_gap": ("game", "target", "steering", "adversaries", "horizon", "gap"),
}


def _path(parts) -> str:
    out = ""
    for p in parts:
        out += f"[{p}]" if isinstance(p, int) else (f".{p}" if out else str(p))
    return out


def _validate_schema(doc: Any, schema: dict, prefix: tuple = ()) -> None:
    errors = sorted(
        jsonschema.Draft202012Validator(schema).iter_errors(doc),
        key=lambda e: (len(e.absolute_path), list(map(str, e.absolute_path))),
    )
    if errors:
        listed = [(_path(prefix + tuple(e.absolute_path)), e.message) for e in errors]
        raise SchemaError(listed[0][1], listed[0][0], errors=listed)


def _check_variant(doc: dict, tag: str, variants: dict, prefix: tuple) -> str:
    name = doc.get(tag)
    if name not in variants:
        raise SchemaError(f"must be one of {sorted(variants)}", _path(prefix + (tag,)))
    _validate_schema(doc, variants[name], prefix)
    return name


def _tuplify(v):
    if isinstance(v, list):
        return tuple(_tuplify(x) for x in v)
    return v


def _listify(v):
    if isinstance(v, tuple):
        return [_listify(x) for x in v]
    return v


def _rectangular(value, path: str) -> np.ndarray:
    try:
        arr = np.array(value, dtype=float)
    except ValueError:
        raise SchemaError("ragged array", path) from None
    return arr


# ---------------------------------------------------------------------------
# typed specs


@dataclass(frozen=True)
class GameSpec:
    builder: str
    payoffs: tuple | None = None
    base: tuple | None = None
    half_width: float | None = None


@dataclass(frozen=True)
class TargetSpec:
    type: str
    center: tuple | None = None
    radius: float | None = None
    vertices: tuple | None = None
    dim: int | None = None
    normals: tuple | None = None
    offsets: tuple | None = None
    interior_point: tuple | None = None
    bounding_ball: tuple | None = None  # (center, radius)


@dataclass(frozen=True)
class SteeringSpec:
    algorithm: str
    eta: float | str | None = None
    rho: float | str | None = None


@dataclass(frozen=True)
class AdversarySpec:
    type: str
    action: int | None = None
    probs: tuple | None = None
    seed: int | None = None
    actions: tuple | None = None


@dataclass(frozen=True)
class BoundSpec:
    kind: str = "none"
    kappa0: float | None = None
    min_ratio: float | None = None
    from_t: int | None = None


@dataclass(frozen=True)
class Flags:
    sample_rewards: bool = False
    bound_series: bool = True
    certificate: bool = False
    certificate_directions: int = 256
    verbose: bool = False


@dataclass(frozen=True)
class RewardsSpec:
    generator: str | None = None
    values: tuple | None = None


@dataclass(frozen=True)
class LiftingSpec:
    bases: tuple[TargetSpec, ...]
    n_points: int = 1000
    seed: int = 0
    scale: float = 3.0


@dataclass(frozen=True)
class GapSpec:
    horizons: tuple[int, ...]
    max_ratio: float = 0.75


@dataclass(frozen=True)
class ExperimentConfig:
    kind: str
    name: str = ""
    description: str = ""
    game: GameSpec | None = None
    target: TargetSpec | None = None
    steering: SteeringSpec | None = None
    adversaries: tuple[AdversarySpec, ...] = ()
    horizon: int | None = None
    seeds: tuple[int, ...] = (0,)
    output: str | None = None
    flags: Flags = field(default_factory=Flags)
    bound: BoundSpec = field(default_factory=BoundSpec)
    rewards: RewardsSpec | None = None
    lifting: LiftingSpec | None = None
    gap: GapSpec | None = None
    schema_version: int = SCHEMA_VERSION

    def with_overrides(
        self,
        horizon: int | None = None,
        seeds: tuple[int, ...] | None = None,
        output: str | None = None,
        verbose: bool | None = None,
    ) -> ExperimentConfig:
        cfg = self
        if horizon is not None:
            cfg = replace(cfg, horizon=int(horizon))
        if seeds is not None:
            cfg = replace(cfg, seeds=tuple(int(s) for s in seeds))
        if output is not None:
            cfg = replace(cfg, output=output)
        if verbose:
            cfg = replace(cfg, flags=replace(cfg.flags, verbose=True))
        validate(cfg)
        return cfg


def _spec_from(cls, doc: dict, drop: tuple[str, ...] = ()):
    names = {f.name for f in fields(cls)}
    return cls(**{k: _tuplify(v) for k, v in doc.items() if k in names and k not in drop})


def _target_from(doc: dict, prefix: tuple) -> TargetSpec:
    _check_variant(doc, "type", _TARGET_VARIANTS, prefix)
    spec = _spec_from(TargetSpec, doc, drop=("bounding_ball",))
    if "bounding_ball" in doc:
        bb = doc["bounding_ball"]
        spec = replace(spec, bounding_ball=(_tuplify(bb["center"]), bb["radius"]))
    return spec


def config_from_dict(doc: Any) -> ExperimentConfig:
    """Typed config from a decoded JSON document (schema + value checks)."""
    _validate_schema(doc, _TOP)
    if doc["schema_version"] != SCHEMA_VERSION:
        raise SchemaError(f"unsupported version {doc['schema_version']} (expected {SCHEMA_VERSION})",
                          "schema_version")
    kind = doc["kind"]
    for key in _REQUIRED_SECTIONS[kind]:
        if key not in doc:
            raise SchemaError(f"'{key}' is required for kind '{kind}'", key)

    kw: dict[str, Any] = {"kind": kind, "schema_version": doc["schema_version"]}
    for key in ("name", "description", "horizon", "output"):
        if key in doc:
            kw[key] = doc[key]
    if "seeds" in doc:
        kw["seeds"] = tuple(doc["seeds"])
    if "game" in doc:
        game = doc["game"]
        if "builder" not in game and "payoffs" in game:
            # an explicit payoff tensor needs no builder name
            game = {"builder": "payoffs", **game}
        _check_variant(game, "builder", _GAME_VARIANTS, ("game",))
        kw["game"] = _spec_from(GameSpec, game)
    if "target" in doc:
        kw["target"] = _target_from(doc["target"], ("target",))
    if "steering" in doc:
        _check_variant(doc["steering"], "algorithm", _STEERING_VARIANTS, ("steering",))
        kw["steering"] = _spec_from(SteeringSpec, doc["steering"])
    if "adversaries" in doc:
        advs = []
        for k, a in enumerate(doc["adversaries"]):
            _check_variant(a, "type", _ADVERSARY_VARIANTS, ("adversaries", k))
            advs.append(_spec_from(AdversarySpec, a))
        kw["adversaries"] = tuple(advs)
    if "flags" in doc:
        kw["flags"] = Flags(**doc["flags"])
    if "bound" in doc:
        kw["bound"] = _spec_from(BoundSpec, doc["bound"])
    if "rewards" in doc:
        kw["rewards"] = _spec_from(RewardsSpec, doc["rewards"])
    if "lifting" in doc:
        lf = doc["lifting"]
        bases = tuple(_target_from(b, ("lifting", "bases", k)) for k, b in enumerate(lf["bases"]))
        kw["lifting"] = LiftingSpec(bases, **{k: v for k, v in lf.items() if k != "bases"})
    if "gap" in doc:
        kw["gap"] = GapSpec(tuple(doc["gap"]["horizons"]), doc["gap"].get("max_ratio", 0.75))
    cfg = ExperimentConfig(**kw)
    validate(cfg)
    return cfg


def parse_config(path) -> ExperimentConfig:
    """Read, decode and validate a JSON config file."""
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc.strerror}") from exc
    return parse_config_text(text)


def parse_config_text(text: str) -> ExperimentConfig:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON at line {exc.lineno} column {exc.colno}: {exc.msg}") from exc
    return config_from_dict(doc)


# ---------------------------------------------------------------------------
# emit


def _spec_dict(spec, tag: str) -> dict:
    out = {tag: getattr(spec, tag)}
    for f in fields(spec):
        v = getattr(spec, f.name)
        if f.name != tag and v is not None:
            out[f.name] = _listify(v)
    return out


def _target_dict(spec: TargetSpec) -> dict:
    out = _spec_dict(replace(spec, bounding_ball=None), "type")
    if spec.bounding_ball is not None:
        out["bounding_ball"] = {"center": _listify(spec.bounding_ball[0]), "radius": spec.bounding_ball[1]}
    return out


def config_to_dict(cfg: ExperimentConfig) -> dict:
    out: dict[str, Any] = {"schema_version": cfg.schema_version, "kind": cfg.kind}
    if cfg.name:
        out["name"] = cfg.name
    if cfg.description:
        out["description"] = cfg.description
    if cfg.game is not None:
        out["game"] = _spec_dict(cfg.game, "builder")
    if cfg.target is not None:
        out["target"] = _target_dict(cfg.target)
    if cfg.steering is not None:
        out["steering"] = _spec_dict(cfg.steering, "algorithm")
    if cfg.adversaries:
        out["adversaries"] = [_spec_dict(a, "type") for a in cfg.adversaries]
    if cfg.horizon is not None:
        out["horizon"] = cfg.horizon
    out["seeds"] = list(cfg.seeds)
    out["output"] = cfg.output
    out["flags"] = {f.name: getattr(cfg.flags, f.name) for f in fields(Flags)}
    out["bound"] = _spec_dict(cfg.bound, "kind")
    if cfg.rewards is not None:
        out["rewards"] = _spec_dict(cfg.rewards, "generator")
        if out["rewards"]["generator"] is None:
            del out["rewards"]["generator"]
    if cfg.lifting is not None:
        lf = cfg.lifting
        out["lifting"] = {
            "bases": [_target_dict(b) for b in lf.bases],
            "n_points": lf.n_points,
            "seed": lf.seed,
            "scale": lf.scale,
        }
    if cfg.gap is not None:
        out["gap"] = {"horizons": list(cfg.gap.horizons), "max_ratio": cfg.gap.max_ratio}
    return out


def emit_config(cfg: ExperimentConfig) -> str:
    return json.dumps(config_to_dict(cfg), indent=2) + "\n"


# ---------------------------------------------------------------------------
# builders


def build_game(spec: GameSpec, path: str = "game") -> tuple[VectorGame, NonpositiveOrthantCone | None]:
    """The vector game, plus the natural target for regret games."""
    if spec.builder == "payoffs":
        P = _rectangular(spec.payoffs, f"{path}.payoffs")
        if P.ndim != 3:
            raise SchemaError("payoffs must be a |I| x |J| x d nested array", f"{path}.payoffs")
        return VectorGame(P), None
    if spec.builder == "regret_game":
        u = _rectangular(spec.base, f"{path}.base")
        return regret_game(u)
    if spec.builder == "corner_game":
        a = 2.0 if spec.half_width is None else spec.half_width
        if not a > 0:
            raise ValidationError("must be positive", f"{path}.half_width")
        return corner_game(a), None
    return matching_pennies_vector(), None


def build_target(spec: TargetSpec, dim: int | None = None, path: str = "target") -> ConvexTargetSet:
    def need_dim(n: int, key: str):
        if dim is not None and n != dim:
            raise ValidationError(f"dimension {n} does not match the game's {dim}", f"{path}.{key}")

    if spec.type == "ball":
        if not spec.radius > 0:
            raise ValidationError("radius must be positive", f"{path}.radius")
        need_dim(len(spec.center), "center")
        return Ball(np.array(spec.center, dtype=float), float(spec.radius))
    if spec.type == "polytope":
        V = _rectangular(spec.vertices, f"{path}.vertices")
        need_dim(V.shape[1], "vertices")
        return VPolytope(V)
    if spec.type == "orthant":
        n = dim if spec.dim is None else spec.dim
        if n is None or n < 1:
            raise ValidationError("orthant needs a positive dimension", f"{path}.dim")
        need_dim(n, "dim")
        return NonpositiveOrthantCone(n)
    A = _rectangular(spec.normals, f"{path}.normals")
    b = np.array(spec.offsets, dtype=float)
    if A.shape[0] != b.size:
        raise ValidationError("one offset per normal is required", f"{path}.offsets")
    need_dim(A.shape[1], "normals")
    bb_center, bb_radius = spec.bounding_ball
    if len(bb_center) != A.shape[1]:
        raise ValidationError("bounding ball dimension mismatch", f"{path}.bounding_ball.center")
    if not bb_radius > 0:
        raise ValidationError("radius must be positive", f"{path}.bounding_ball.radius")
    try:
        return HalfspaceIntersection(A, b, np.array(spec.interior_point, dtype=float))
    except ValueError as exc:
        raise ValidationError(str(exc), path) from exc


def bounding_ball(spec: TargetSpec) -> Ball | None:
    if spec.bounding_ball is None:
        return None
    return Ball(np.array(spec.bounding_ball[0], dtype=float), float(spec.bounding_ball[1]))


def build_steering(spec: SteeringSpec, constants: RewardConstants):
    """A fresh steering policy; ``None`` stands for Blackwell's strategy."""
    if spec.algorithm == "ogd":
        eta = default_eta(constants.dist_RS) if spec.eta in (None, "default") else float(spec.eta)
        return OGD(eta)
    if spec.algorithm == "rftl":
        rho = default_rho(constants.dist_RS) if spec.rho in (None, "default") else float(spec.rho)
        return RFTL(rho)
    if spec.algorithm == "ftl":
        return FTL()
    return None


def build_adversary(spec: AdversarySpec, run_seed: int = 0):
    if spec.type == "fixed_pure":
        return FixedPure(spec.action)
    if spec.type == "fixed_mixed":
        seed = run_seed if spec.seed is None else spec.seed
        return FixedMixed(tuple(spec.probs), seed)
    if spec.type == "sequence":
        return ActionSequence(tuple(spec.actions))
    if spec.type == "round_robin":
        return RoundRobin()
    return GreedyWorstCase()


def adversary_label(spec: AdversarySpec, index: int) -> str:
    extra = ""
    if spec.type == "fixed_pure":
        extra = f"{spec.action}"
    elif spec.type == "fixed_mixed" and spec.seed is not None:
        extra = f"s{spec.seed}"
    return f"{index:02d}-{spec.type}{extra}"


def ball_kappa0(target: ConvexTargetSet) -> float | None:
    """Curvature bound of a ball's boundary (1 / radius); None otherwise."""
    if isinstance(target, Ball) and target.radius > 0:
        return 1.0 / target.radius
    return None


# ---------------------------------------------------------------------------
# value checks


def _positive(value, path: str) -> None:
    if value is None:
        return
    if not (isinstance(value, (int, float)) and math.isfinite(value) and value > 0):
        raise ValidationError("must be positive", path)


def validate(cfg: ExperimentConfig) -> None:
    """Value-level checks; builds every object once so constructor errors surface here."""
    _positive(cfg.horizon, "horizon")
    if any(s < 0 for s in cfg.seeds):
        raise ValidationError("seeds must be nonnegative", "seeds")
    _positive(cfg.flags.certificate_directions, "flags.certificate_directions")

    if cfg.kind == "lifting_check":
        _positive(cfg.lifting.n_points, "lifting.n_points")
        _positive(cfg.lifting.scale, "lifting.scale")
        for k, base in enumerate(cfg.lifting.bases):
            p = f"lifting.bases[{k}]"
            if base.type not in ("ball", "polytope"):
                raise ValidationError("lifting needs a ball or polytope base", f"{p}.type")
            build_target(base, None, p)
        return

    if cfg.steering is not None:
        _positive(cfg.steering.eta if cfg.steering.eta != "default" else None, "steering.eta")
        _positive(cfg.steering.rho if cfg.steering.rho != "default" else None, "steering.rho")

    if cfg.kind == "raw_sequence":
        if cfg.steering.algorithm == "blackwell":
            raise ValidationError("raw sequences need an OCO steering algorithm", "steering.algorithm")
        rw = cfg.rewards
        if (rw.generator is None) == (rw.values is None):
            raise ValidationError("give exactly one of 'generator' or 'values'", "rewards")
        if rw.values is not None:
            R = _rectangular(rw.values, "rewards.values")
            if len(R) < cfg.horizon:
                raise ValidationError(f"{len(R)} rewards for horizon {cfg.horizon}", "rewards.values")
            build_target(cfg.target, R.shape[1])
        else:
            build_target(cfg.target, 1)
        _check_bound(cfg, build_target(cfg.target, None))
        return

    game, _ = build_game(cfg.game)
    target = build_target(cfg.target, game.dim)
    for k, a in enumerate(cfg.adversaries):
        p = f"adversaries[{k}]"
        if a.type == "fixed_pure" and not 0 <= a.action < game.n_nature:
            raise ValidationError(f"action outside 0..{game.n_nature - 1}", f"{p}.action")
        if a.type == "fixed_mixed":
            probs = np.array(a.probs, dtype=float)
            if probs.size != game.n_nature:
                raise ValidationError(f"needs {game.n_nature} probabilities", f"{p}.probs")
            if np.any(probs < 0) or abs(probs.sum() - 1.0) > 1e-12:
                raise ValidationError("not a probability vector", f"{p}.probs")
            if a.seed is not None and a.seed < 0:
                raise ValidationError("seed must be nonnegative", f"{p}.seed")
        if a.type == "sequence":
            if any(not 0 <= j < game.n_nature for j in a.actions):
                raise ValidationError(f"actions outside 0..{game.n_nature - 1}", f"{p}.actions")
            if len(a.actions) < cfg.horizon:
                raise ValidationError(f"{len(a.actions)} actions for horizon {cfg.horizon}", f"{p}.actions")
    _check_bound(cfg, target)
    if cfg.kind == "martingale_gap":
        hs = cfg.gap.horizons
        if any(h < 1 for h in hs):
            raise ValidationError("gap horizons must be positive", "gap.horizons")
        if 4 * max(hs) > cfg.horizon:
            raise ValidationError(f"horizon must be at least {4 * max(hs)}", "horizon")
        _positive(cfg.gap.max_ratio, "gap.max_ratio")


def _check_bound(cfg: ExperimentConfig, target: ConvexTargetSet) -> None:
    b = cfg.bound
    if b.kind == "ftl_log":
        _positive(b.kappa0, "bound.kappa0")
        if b.kappa0 is None and ball_kappa0(target) is None:
            raise ValidationError("kappa0 is required unless the target is a ball", "bound.kappa0")
    if b.kind == "linear_regret":
        if b.min_ratio is None:
            raise ValidationError("min_ratio is required", "bound.min_ratio")
        _positive(b.from_t, "bound.from_t")
    if b.kind in ("ogd", "rftl", "ftl_log", "blackwell") and isinstance(target, HalfspaceIntersection):
        if cfg.target.bounding_ball is None:
            raise ValidationError("rate bounds for halfspace targets need a bounding ball", "target")
