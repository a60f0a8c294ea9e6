"""Run configuration files: JSON documents with sections world, ddpg,
socialforce, and run, validated strictly (unknown keys are rejected so a
typo cannot silently burn a long training run).
"""
from __future__ import annotations

import json
from pathlib import Path

from .ddpg import DdpgConfig
from .harness import AGENT_KINDS, RunSpec
from .reward import PROSE, TABLE
from .simcore import WorldConfig
from .socialforce import SocialForceParams


class ConfigError(ValueError):
    """Invalid or unreadable run configuration (CLI exit code 2)."""


_SECTIONS = ("world", "ddpg", "socialforce", "run")

_RUN_KEYS = {
    "agent": str,
    "episodes": int,
    "seed": int,
    "seeds": int,
    "out": str,
    "orientation": str,
    "tie_is_away": bool,
    "checkpoint_interval": int,
    "recall_n": int,
    "smooth_window": int,
}

_RUN_DEFAULTS = {
    "agent": "rl_momentum",
    "episodes": 2000,
    "seed": 0,
    "seeds": 1,
    "out": "runs/out",
    "orientation": PROSE,
    "tie_is_away": True,
    "checkpoint_interval": 500,
    "recall_n": 100,
    "smooth_window": 20,
}


def load_config_file(path) -> dict:
    """Read and validate a config document from a JSON file."""
    p = Path(path)
    if not p.is_file():
        raise ConfigError(f"config file not found: {p}")
    try:
        doc = json.loads(p.read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"unreadable config {p}: {exc}") from exc
    return validate_config(doc)


def validate_config(doc: dict) -> dict:
    """Check section and key names, returning a normalized document."""
    if not isinstance(doc, dict):
        raise ConfigError("config root must be an object with sections "
                          + "/".join(_SECTIONS))
    for section in doc:
        if section not in _SECTIONS:
            raise ConfigError(f"unknown config section: {section!r}")
        if not isinstance(doc[section], dict):
            raise ConfigError(f"section {section!r} must be an object")
    run = dict(_RUN_DEFAULTS)
    for key, value in doc.get("run", {}).items():
        if key not in _RUN_KEYS:
            raise ConfigError(f"unknown key in run section: {key!r}")
        want = _RUN_KEYS[key]
        if want is int and isinstance(value, bool):
            raise ConfigError(f"run.{key} must be an integer")
        if want is int and isinstance(value, float) and value.is_integer():
            value = int(value)
        if not isinstance(value, want):
            raise ConfigError(f"run.{key} must be of type {want.__name__}")
        run[key] = value
    if run["agent"] not in AGENT_KINDS:
        raise ConfigError(f"run.agent must be one of {AGENT_KINDS}, "
                          f"got {run['agent']!r}")
    if run["orientation"] not in (PROSE, TABLE):
        raise ConfigError(f"run.orientation must be {PROSE!r} or {TABLE!r}")
    for key in ("episodes", "seeds", "checkpoint_interval", "recall_n",
                "smooth_window"):
        if run[key] < 1:
            raise ConfigError(f"run.{key} must be >= 1")
    out = {"world": dict(doc.get("world", {})),
           "ddpg": dict(doc.get("ddpg", {})),
           "socialforce": dict(doc.get("socialforce", {})),
           "run": run}
    return out


def build_runspec(doc: dict, **overrides):
    """Construct a validated RunSpec from a config document plus overrides.

    Overrides use run-section key names and skip None values, mirroring CLI
    flags left at their defaults. Returns (spec, run) where run is the
    merged run section (it also carries seeds/smooth_window, which are
    orchestration knobs rather than RunSpec fields).
    """
    run = dict(doc["run"])
    for key, value in overrides.items():
        if value is None:
            continue
        if key not in _RUN_KEYS:
            raise ConfigError(f"unknown run override: {key!r}")
        run[key] = value
    if run["seeds"] < 1:
        raise ConfigError("run.seeds must be >= 1")
    try:
        world = WorldConfig.from_dict(doc["world"])
        ddpg = DdpgConfig.from_dict(doc["ddpg"])
        sf = SocialForceParams.from_dict(doc["socialforce"])
    except (TypeError, ValueError, KeyError) as exc:
        raise ConfigError(str(exc)) from exc
    try:
        spec = RunSpec(agent=run["agent"], world=world, ddpg=ddpg,
                       socialforce=sf, episodes=run["episodes"],
                       seed=run["seed"], out_dir=Path(run["out"]),
                       reward_orientation=run["orientation"],
                       tie_is_away=run["tie_is_away"],
                       checkpoint_interval=run["checkpoint_interval"],
                       recall_n=run["recall_n"])
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    return spec, run


def default_config() -> dict:
    """Document with every section present and run defaults filled in."""
    return validate_config({s: {} for s in _SECTIONS})
