"""Declarative experiment configuration: flat INI sections, seeded runs."""

from __future__ import annotations

import configparser
import hashlib
import json
from dataclasses import dataclass, field

from ..errors import ConfigError

KINDS = (
    "surface-poisson",
    "minimize",
    "barycenter-verify",
    "kazhdan",
    "amenable-collapse",
    "thickness-scan",
    "margulis-check",
)

# required per-kind parameter sections (beyond [experiment] and [group])
_REQUIRED = {
    "surface-poisson": ("poisson", ("c", "radius", "mesh_level")),
    "minimize": ("descent", ("source",)),
    "barycenter-verify": ("barycenter", ("dimension", "samples")),
    "kazhdan": ("kazhdan", ("s",)),
    "amenable-collapse": ("amenable", ("sides",)),
    "thickness-scan": ("thickness", ("source", "deltas")),
    "margulis-check": ("margulis", ("chain", "alpha")),
}


@dataclass
class ExperimentConfig:
    kind: str
    seed: int
    group: dict = field(default_factory=dict)
    params: dict = field(default_factory=dict)
    out: str = ""
    threads: int = 1
    quadrature_order: int = 8

    def canonical(self) -> dict:
        return {
            "kind": self.kind,
            "seed": self.seed,
            "group": dict(sorted(self.group.items())),
            "params": dict(sorted(self.params.items())),
            "threads": self.threads,
            "quadrature_order": self.quadrature_order,
        }

    def config_hash(self) -> str:
        blob = json.dumps(self.canonical(), sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()[:16]


def _value(raw: str):
    raw = raw.strip()
    if "," in raw:
        return [_value(tok) for tok in raw.split(",") if tok.strip()]
    for cast in (int, float):
        try:
            return cast(raw)
        except ValueError:
            continue
    return raw


def parse_config_text(text: str, overrides: dict | None = None) -> ExperimentConfig:
    parser = configparser.ConfigParser()
    try:
        parser.read_string(text)
    except configparser.Error as exc:
        raise ConfigError("<ini>", f"unparseable config: {exc}")
    if "experiment" not in parser:
        raise ConfigError("experiment", "missing [experiment] section")
    exp = parser["experiment"]
    kind = exp.get("kind", "")
    if kind not in KINDS:
        raise ConfigError("experiment.kind", f"unknown kind {kind!r}; expected one of {KINDS}")
    if "seed" not in exp:
        raise ConfigError("experiment.seed", "a seed is mandatory")
    try:
        seed = int(exp["seed"])
    except ValueError:
        raise ConfigError("experiment.seed", "seed must be an integer")
    group = {k: _value(v) for k, v in parser["group"].items()} if "group" in parser else {}
    section, required = _REQUIRED[kind]
    if section not in parser:
        raise ConfigError(section, f"missing [{section}] section for kind {kind}")
    params = {k: _value(v) for k, v in parser[section].items()}
    for key in required:
        if key not in params:
            raise ConfigError(f"{section}.{key}", "required parameter missing")
    cfg = ExperimentConfig(
        kind=kind,
        seed=seed,
        group=group,
        params=params,
        out=exp.get("out", ""),
        threads=int(exp.get("threads", "1")),
        quadrature_order=int(exp.get("quadrature_order", "8")),
    )
    for key, val in (overrides or {}).items():
        if val is not None:
            setattr(cfg, key, val)
    return cfg


def parse_config_file(path: str, overrides: dict | None = None) -> ExperimentConfig:
    try:
        with open(path) as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(path, f"cannot read config: {exc}")
    return parse_config_text(text, overrides)
