"""JSON run configuration: parsing, validation and the built-in example."""

from __future__ import annotations

import copy
import json
import math
from dataclasses import dataclass, field
from typing import Optional

from .classifier import PRESETS, Classifier, ObjectiveWeights, classifier_from_dict
from .dist import ContinuousDist, NumericsConfig, make_dist
from .errors import ConfigError, ParameterError
from .model import Environment, make_environment, make_signal_model
from .oracle import TrialConfig

COMMANDS = ("solve", "evaluate", "verify", "simulate", "paper-example")
COMMAND_BLOCKS = ("solve", "evaluate", "verify", "simulate")
TOP_LEVEL_KEYS = {"environment", "objective", "numerics", "output", *COMMAND_BLOCKS}

EXAMPLE_CONFIG = {
    "environment": {
        "cost": {"kind": "gaussian", "loc": 0.75, "scale": 1.0},
        "r1": 5.0,
        "r0": 0.0,
        "signal": {
            "f0": {"kind": "gaussian", "loc": 0.0, "scale": 1.0},
            "f1": {"kind": "gaussian", "loc": 1.0, "scale": 1.0},
        },
    },
    "objective": {"preset": "accuracy"},
}


def _reject_constant(name):
    raise ConfigError(f"non-finite number {name} is not allowed in configs")


def loads(text: str) -> dict:
    try:
        doc = json.loads(text, parse_constant=_reject_constant)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"invalid JSON: {exc}") from None
    if not isinstance(doc, dict):
        raise ConfigError("config must be a JSON object")
    return doc


def load(path: str) -> dict:
    try:
        with open(path, encoding="utf-8") as fh:
            return loads(fh.read())
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None


def _number(block: dict, key: str, default=None) -> float:
    if key not in block:
        if default is None:
            raise ConfigError(f"missing numeric field {key!r}")
        return default
    v = block[key]
    if isinstance(v, bool) or not isinstance(v, (int, float)) or not math.isfinite(v):
        raise ConfigError(f"field {key!r} must be a finite number, got {v!r}")
    return float(v)


def _object(block, name: str) -> dict:
    if not isinstance(block, dict):
        raise ConfigError(f"{name} must be a JSON object")
    return block


def parse_dist(block) -> ContinuousDist:
    block = _object(block, "distribution")
    kind = block.get("kind")
    params = {k: v for k, v in block.items() if k != "kind"}
    try:
        return make_dist(kind, **params)
    except ParameterError as exc:
        raise ConfigError(f"bad distribution {block!r}: {exc}") from None


def parse_environment(block) -> Environment:
    """Build an environment; modelling violations propagate unchanged."""
    block = _object(block, "environment")
    signal = _object(block.get("signal"), "environment.signal")
    cost = parse_dist(block.get("cost"))
    f0, f1 = parse_dist(signal.get("f0")), parse_dist(signal.get("f1"))
    r1, r0 = _number(block, "r1"), _number(block, "r0")
    return make_environment(cost, r1, r0, make_signal_model(f0, f1))


def parse_objective(block) -> ObjectiveWeights:
    block = _object(block if block is not None else {"preset": "accuracy"}, "objective")
    preset = block.get("preset", "custom" if "A1" in block else "accuracy")
    if preset in PRESETS:
        return PRESETS[preset]
    if preset != "custom":
        raise ConfigError(f"unknown objective preset {preset!r}")
    try:
        return ObjectiveWeights(**{k: _number(block, k) for k in ("A1", "A0", "B1", "B0")})
    except ParameterError as exc:
        raise ConfigError(str(exc)) from None


def parse_numerics(block) -> NumericsConfig:
    block = _object(block if block is not None else {}, "numerics")
    allowed = set(NumericsConfig.__dataclass_fields__)
    unknown = set(block) - allowed
    if unknown:
        raise ConfigError(f"unknown numerics fields {sorted(unknown)}")
    kwargs = {}
    for k, v in block.items():
        if isinstance(v, bool) or not isinstance(v, (int, float)):
            raise ConfigError(f"numerics.{k} must be a number")
        kwargs[k] = int(v) if k == "opt_grid_n" and float(v).is_integer() else v
    try:
        return NumericsConfig(**kwargs)
    except ParameterError as exc:
        raise ConfigError(str(exc)) from None


def parse_classifier(block) -> Classifier:
    try:
        return classifier_from_dict(block)
    except ParameterError as exc:
        raise ConfigError(f"malformed classifier spec: {exc}") from None


def parse_trial(block) -> TrialConfig:
    block = dict(_object(block if block is not None else {}, "verify"))
    unknown = set(block) - set(TrialConfig.__dataclass_fields__)
    if unknown:
        raise ConfigError(f"unknown trial fields {sorted(unknown)}")
    for k in ("cost_mu", "cost_sigma", "reward", "signal_mu", "signal_sigma"):
        if k in block:
            block[k] = tuple(block[k]) if isinstance(block[k], list) else block[k]
    try:
        return TrialConfig(**block)
    except (ParameterError, TypeError) as exc:
        raise ConfigError(f"bad trial config: {exc}") from None


@dataclass
class RunConfig:
    """A parsed config document for one command.

    ``raw`` keeps the resolved document (after flag overrides) so reports
    can embed it verbatim.
    """

    command: str
    raw: dict
    weights: ObjectiveWeights
    numerics: NumericsConfig
    block: dict = field(default_factory=dict)
    out: Optional[str] = None
    csv: Optional[str] = None


def resolve(command: str, doc: dict, out: Optional[str] = None, csv: Optional[str] = None,
            seed: Optional[int] = None) -> RunConfig:
    """Validate a config document for ``command`` and apply flag overrides."""
    if command not in COMMANDS:
        raise ConfigError(f"unknown command {command!r}")
    doc = copy.deepcopy(doc)
    unknown = set(doc) - TOP_LEVEL_KEYS
    if unknown:
        raise ConfigError(f"unknown top-level keys {sorted(unknown)}")
    active = [k for k in COMMAND_BLOCKS if k in doc]
    if len(active) > 1:
        raise ConfigError(f"exactly one command block may be present, found {active}")
    own = "solve" if command == "paper-example" else command
    if active and active[0] != own:
        raise ConfigError(f"config carries a {active[0]!r} block but the command is {command!r}")
    block = _object(doc.get(own, {}), own)

    if seed is not None:
        if command in ("verify", "simulate"):
            block["seed"] = seed
            doc[own] = block
    output = _object(doc.get("output", {}), "output")
    out = out or output.get("report")
    csv = csv or output.get("csv")
    if out or csv:
        doc["output"] = {k: v for k, v in (("report", out), ("csv", csv)) if v}

    if command != "verify" and "environment" not in doc:
        raise ConfigError("config lacks an environment block")
    weights = parse_objective(doc.get("objective"))
    numerics = parse_numerics(doc.get("numerics"))
    return RunConfig(command, doc, weights, numerics, block, out, csv)
