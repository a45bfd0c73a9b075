"""Experiment configuration: JSON schema, validation and resolution."""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import jsonschema
import numpy as np

from ..atom_bloch import AtomParams
from ..errors import ConfigError

SCHEMA_VERSION = 1
MODES = ("coeffs", "evolve", "steady", "scan-reit", "scan-drr", "oracle-compare")

_NUM = {"type": "number"}
_AXIS = {
    "oneOf": [
        {"type": "array", "items": _NUM},
        {
            "type": "object",
            "properties": {
                "start": _NUM, "stop": _NUM,
                "num": {"type": "integer", "minimum": 1},
                "spacing": {"enum": ["linear", "log"]},
            },
            "required": ["start", "stop", "num"],
            "additionalProperties": False,
        },
    ]
}

SCHEMA = {
    "type": "object",
    "properties": {
        "schema_version": {"const": SCHEMA_VERSION},
        "mode": {"enum": list(MODES)},
        "description": {"type": "string"},
        "angle_unit": {"enum": ["deg", "rad"]},
        "atom": {
            "type": "object",
            "properties": {k: _NUM for k in (
                "omega_p", "omega_c", "delta_p", "delta_c", "gamma", "gamma_bc",
                "g_s", "g_a", "kappa_s", "kappa_a", "phi")},
            "additionalProperties": False,
        },
        "grid": {
            "type": "object",
            "properties": {
                "phi": _AXIS, "omega_c": _AXIS, "omega": _AXIS, "kappa": _AXIS,
                "kappa_safety": {"type": "number", "exclusiveMinimum": 1},
            },
            "additionalProperties": False,
        },
        "times": {
            "type": "object",
            "properties": {
                "t_end": {"type": "number", "exclusiveMinimum": 0},
                "tol": {"type": "number", "minimum": 1e-12, "maximum": 1e-4},
                "num": {"type": "integer", "minimum": 2},
                "spacing": {"enum": ["linear", "log"]},
            },
            "required": ["t_end"],
            "additionalProperties": False,
        },
        "oracle": {
            "type": "object",
            "properties": {
                "n_max": {"type": "integer", "minimum": 1, "maximum": 40},
                "leak_budget": {"type": "number", "exclusiveMinimum": 0},
                "tolerance": {"type": "number", "exclusiveMinimum": 0},
                "t_end": {"type": "number", "exclusiveMinimum": 0},
                "num": {"type": "integer", "minimum": 2},
                "corrupt": {"enum": [None, "c2-sign"]},
            },
            "additionalProperties": False,
        },
        "coefficients": {
            "type": "object",
            "properties": {
                "kind": {"enum": ["pipeline", "reit", "pure-loss", "explicit", "random-weak"]},
                "xi": _NUM,
                "scale": {"type": "number", "exclusiveMinimum": 0},
                "values": {
                    "type": "object",
                    "additionalProperties": {
                        "type": "array", "items": _NUM, "minItems": 2, "maxItems": 2,
                    },
                },
            },
            "required": ["kind"],
            "additionalProperties": False,
        },
        "expect": {
            "type": "object",
            "properties": {
                "entangled_region": {"type": "boolean"},
                "phi_range": {"type": "array", "items": _NUM, "minItems": 2, "maxItems": 2},
            },
            "additionalProperties": False,
        },
        "output": {
            "type": "object",
            "properties": {
                "path": {"type": "string"},
                "format": {"enum": ["csv"]},
                "dump_populations": {"type": "boolean"},
            },
            "additionalProperties": False,
        },
    },
    "required": ["mode", "atom"],
    "additionalProperties": False,
}

_SCAN_AXES = {"scan-reit": ("phi", "omega_c"), "scan-drr": ("phi", "omega", "kappa")}


@dataclass(frozen=True)
class ExperimentConfig:
    mode: str
    atom: AtomParams
    grid: dict = field(default_factory=dict)
    times: dict | None = None
    oracle: dict | None = None
    coefficients: dict | None = None
    expect: dict | None = None
    output: dict = field(default_factory=dict)
    raw: dict = field(default_factory=dict)
    source: str = ""

    @property
    def output_name(self) -> str:
        return self.output.get("path") or f"{self.mode}.csv"


def _axis(spec, name: str, to_rad: bool) -> list[float]:
    if isinstance(spec, dict):
        if spec.get("spacing") == "log":
            if spec["start"] <= 0 or spec["stop"] <= 0:
                raise ConfigError(f"grid.{name}: log spacing needs positive bounds")
            vals = np.geomspace(spec["start"], spec["stop"], spec["num"])
        else:
            vals = np.linspace(spec["start"], spec["stop"], spec["num"])
        vals = [float(v) for v in vals]
    else:
        vals = [float(v) for v in spec]
    if not vals:
        raise ConfigError(f"grid.{name} is empty")
    if not all(math.isfinite(v) for v in vals):
        raise ConfigError(f"grid.{name} has non-finite values")
    if to_rad:
        vals = [math.radians(v) for v in vals]
    return vals


def validate_config(raw: dict, source: str = "<dict>", mode: str | None = None) -> ExperimentConfig:
    """Schema-check ``raw`` and resolve it into an ``ExperimentConfig``."""
    raw = dict(raw)
    if mode is not None:
        if "mode" in raw and raw["mode"] != mode:
            raise ConfigError(f"{source}: config mode {raw['mode']!r} does not match {mode!r}")
        raw["mode"] = mode
    try:
        jsonschema.validate(raw, SCHEMA)
    except jsonschema.ValidationError as exc:
        loc = "/".join(str(p) for p in exc.absolute_path) or "<root>"
        raise ConfigError(f"{source}: {loc}: {exc.message}") from None

    m = raw["mode"]
    deg = raw.get("angle_unit", "rad") == "deg"
    atom_raw = dict(raw["atom"])
    if deg and "phi" in atom_raw:
        atom_raw["phi"] = math.radians(atom_raw["phi"])
    try:
        atom = AtomParams(**atom_raw)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{source}: atom: {exc}") from None

    grid = {}
    for name, spec in raw.get("grid", {}).items():
        if name == "kappa_safety":
            grid[name] = float(spec)
        else:
            grid[name] = _axis(spec, name, to_rad=deg and name == "phi")
    for name in _SCAN_AXES.get(m, ()):
        if name == "phi" and name not in grid:
            grid["phi"] = [atom.phi]
        if name not in grid:
            raise ConfigError(f"{source}: mode {m} needs grid.{name}")
    if m == "evolve" and "times" not in raw:
        raise ConfigError(f"{source}: mode evolve needs a times section")
    if m == "oracle-compare" and "oracle" not in raw:
        raise ConfigError(f"{source}: mode oracle-compare needs an oracle section")
    if m in ("scan-drr",) and raw.get("coefficients"):
        raise ConfigError(f"{source}: scan-drr always uses the full pipeline")

    return ExperimentConfig(
        mode=m,
        atom=atom,
        grid=grid,
        times=raw.get("times"),
        oracle=raw.get("oracle"),
        coefficients=raw.get("coefficients"),
        expect=raw.get("expect"),
        output=raw.get("output", {}),
        raw=raw,
        source=source,
    )


def bundled_configs() -> list[str]:
    root = resources.files("doublelambda") / "configs"
    return sorted(p.name[:-5] for p in root.iterdir() if p.name.endswith(".json"))


def resolve_config_path(name: str) -> Path:
    """A filesystem path, or the stem of a bundled config such as ``fig3``."""
    p = Path(name)
    if p.exists():
        return p
    stem = p.name[:-5] if p.name.endswith(".json") else p.name
    bundled = resources.files("doublelambda") / "configs" / f"{stem}.json"
    if bundled.is_file():
        return Path(str(bundled))
    raise ConfigError(f"config {name!r} not found (bundled: {', '.join(bundled_configs())})")


def load_config(name: str, mode: str | None = None) -> ExperimentConfig:
    path = resolve_config_path(name)
    try:
        raw = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON: {exc}") from None
    if not isinstance(raw, dict):
        raise ConfigError(f"{path}: top level must be an object")
    return validate_config(raw, str(path), mode)
