"""Run configuration: JSON documents validated against a fixed schema."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from jsonschema import Draft202012Validator

from .errors import ConfigError, ValidationError
from .field import GridSpec, PhotonField, PhysicsConfig, plane_wave_state, potential_state, random_field

SCHEMA_VERSION = 1

_pos = {"type": "number", "exclusiveMinimum": 0}
_vec3 = {"type": "array", "items": {"type": "number"}, "minItems": 3, "maxItems": 3}
_complex = {
    "oneOf": [
        {"type": "number"},
        {"type": "array", "items": {"type": "number"}, "minItems": 2, "maxItems": 2},
    ]
}

PLANE_WAVE_PARAMS = {
    "type": "object",
    "additionalProperties": False,
    "required": ["k", "polarization"],
    "properties": {
        "k": _vec3,
        "chirality": {"enum": [1, -1]},
        "polarization": {"type": "array", "items": _complex, "minItems": 3, "maxItems": 3},
        "branch": {"enum": [1, -1, None]},
        "amplitude": {"type": "number", "minimum": 0},
    },
}

RANDOM_PARAMS = {
    "type": "object",
    "additionalProperties": False,
    "required": ["cutoff"],
    "properties": {
        "cutoff": _pos,
        "branch": {"enum": [1, -1, "mixed"]},
        "amplitude": {"type": "number", "minimum": 0},
        "symmetric": {"type": "boolean"},
        "source": {"enum": ["modes", "potentials"]},
    },
}

FILE_PARAMS = {
    "type": "object",
    "additionalProperties": False,
    "required": ["path"],
    "properties": {"path": {"type": "string", "minLength": 1}},
}

SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "type": "object",
    "additionalProperties": False,
    "required": ["grid", "run", "init"],
    "properties": {
        "version": {"const": SCHEMA_VERSION},
        "grid": {
            "type": "object",
            "additionalProperties": False,
            "required": ["n"],
            "properties": {
                "n": {"type": "array", "items": {"type": "integer", "minimum": 1},
                      "minItems": 3, "maxItems": 3},
                "length": {"type": "array", "items": _pos, "minItems": 3, "maxItems": 3},
            },
        },
        "physics": {
            "type": "object",
            "additionalProperties": False,
            "properties": {"hbar": _pos, "c": _pos, "m_flash": _pos},
        },
        "run": {
            "type": "object",
            "additionalProperties": False,
            "required": ["dt", "steps"],
            "properties": {
                "dt": _pos,
                "steps": {"type": "integer", "minimum": 1},
                "output_stride": {"type": "integer", "minimum": 1},
                "seed": {"type": "integer", "minimum": 0},
            },
        },
        "init": {
            "type": "object",
            "additionalProperties": False,
            "required": ["type"],
            "properties": {
                "type": {"enum": ["plane_wave", "random", "file"]},
                "parameters": {"type": "object"},
            },
            "allOf": [
                {"if": {"properties": {"type": {"const": t}}},
                 "then": {"required": ["parameters"], "properties": {"parameters": s}}}
                for t, s in (("plane_wave", PLANE_WAVE_PARAMS), ("random", RANDOM_PARAMS),
                             ("file", FILE_PARAMS))
            ],
        },
        "output": {
            "type": "object",
            "additionalProperties": False,
            "properties": {"dir": {"type": "string", "minLength": 1}},
        },
    },
}

_VALIDATOR = Draft202012Validator(SCHEMA)


def _pointer(path) -> str:
    parts = [str(p).replace("~", "~0").replace("/", "~1") for p in path]
    return "/" + "/".join(parts) if parts else ""


def _deepest(err):
    # descend into oneOf/allOf branches so the pointer names the offending leaf
    while err.context:
        err = max(err.context, key=lambda e: (len(e.absolute_path), -len(e.message)))
    return err


def schema_errors(doc) -> list[ConfigError]:
    out = []
    for err in sorted(_VALIDATOR.iter_errors(doc), key=lambda e: list(map(str, e.absolute_path))):
        leaf = _deepest(err)
        out.append(ConfigError(leaf.message, _pointer(leaf.absolute_path)))
    return out


@dataclass(frozen=True)
class RunConfig:
    grid: GridSpec
    physics: PhysicsConfig
    dt: float
    steps: int
    output_stride: int
    seed: int
    init_type: str
    init_params: dict
    output_dir: Path
    raw: dict = field(repr=False, default_factory=dict)
    base_dir: Path = Path(".")

    @classmethod
    def from_dict(cls, doc, base_dir=".") -> "RunConfig":
        errs = schema_errors(doc)
        if errs:
            raise errs[0]
        g = doc["grid"]
        grid = GridSpec(tuple(g["n"]), tuple(g.get("length", (2 * math.pi,) * 3)))
        physics = PhysicsConfig(**doc.get("physics", {}))
        run = doc["run"]
        steps = int(run["steps"])
        init = doc["init"]
        cfg = cls(
            grid=grid,
            physics=physics,
            dt=float(run["dt"]),
            steps=steps,
            output_stride=int(run.get("output_stride", steps)),
            seed=int(run.get("seed", 0)),
            init_type=init["type"],
            init_params=dict(init.get("parameters", {})),
            output_dir=Path(doc.get("output", {}).get("dir", "out")),
            raw=doc,
            base_dir=Path(base_dir),
        )
        cfg._check_semantics()
        return cfg

    def _check_semantics(self):
        if self.init_type == "plane_wave":
            from .spectral import lattice_index

            k = np.asarray(self.init_params["k"], float)
            if lattice_index(self.grid, k) is None:
                raise ConfigError(f"k = {k.tolist()} is not on the grid's Fourier lattice",
                                  "/init/parameters/k")
            if not np.any(k):
                raise ConfigError("k must be nonzero", "/init/parameters/k")

    def resolve(self, path) -> Path:
        p = Path(path)
        return p if p.is_absolute() else self.base_dir / p

    @property
    def out_dir(self) -> Path:
        return self.resolve(self.output_dir)


def load_config(path) -> RunConfig:
    """Read and validate a config file; OSError propagates for I/O problems."""
    path = Path(path)
    text = path.read_text()
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"invalid JSON: {exc}", "") from exc
    return RunConfig.from_dict(doc, base_dir=path.parent)


def _complex_vec(items):
    return np.array([complex(v[0], v[1]) if isinstance(v, list) else complex(v) for v in items])


def initial_field(cfg: RunConfig) -> PhotonField:
    """Build the t = 0 field described by ``cfg.init``."""
    p = cfg.init_params
    if cfg.init_type == "plane_wave":
        pol = _complex_vec(p["polarization"])
        try:
            psi = plane_wave_state(cfg.grid, p["k"], int(p.get("chirality", 1)), pol,
                                   branch=p.get("branch"), physics=cfg.physics)
        except ValidationError as exc:
            raise ConfigError(str(exc), "/init/parameters") from exc
        return psi * float(p.get("amplitude", 1.0))
    if cfg.init_type == "random":
        amp = float(p.get("amplitude", 1.0))
        if p.get("source", "modes") == "potentials":
            return potential_state(cfg.grid, cfg.seed, p["cutoff"], cfg.physics, amplitude=1.0) * amp
        branch = p.get("branch", 1)
        branch = None if branch == "mixed" else branch
        return random_field(cfg.seed, cfg.grid, p["cutoff"], branch=branch, physics=cfg.physics,
                            amplitude=amp, symmetric=bool(p.get("symmetric", False)))
    from .snapshot import load

    psi = load(cfg.resolve(p["path"]))
    if psi.grid != cfg.grid:
        raise ConfigError("snapshot grid does not match the configured grid", "/init/parameters/path")
    return psi
