"""Sweep configuration: flat ``key = value`` files with dotted keys.

Example::

    # outward tube around the unit circle
    geometry.kind = circle
    geometry.radius = 1.0
    geometry.orientation = outward
    sweep.eps = 0.2, 0.1, 0.05, 0.025
    sweep.n_max = 5
    sweep.cases = dn, dirichlet
    solver.tol = 1e-6
    output.formats = csv, json
"""
from __future__ import annotations

import configparser
import hashlib
import json
import os
from dataclasses import asdict, dataclass, replace
from pathlib import Path

from .errors import ConfigError, DomainError
from .geometry import Geometry, make_geometry, max_admissible_eps

CASES = ("dn", "dirichlet", "neumann", "effective")
FORMATS = ("csv", "json", "plot")
WORKERS_ENV = "THINTUBE_WORKERS"
_GEOMETRY_KEYS = ("radius", "R", "length", "L", "a", "b", "major", "minor", "profile", "closed")


@dataclass(frozen=True)
class Config:
    geometry_kind: str = "circle"
    geometry_params: tuple = (("radius", "1.0"),)
    orientation: str = "outward"
    eps_list: tuple = (0.2, 0.1, 0.05, 0.025)
    n_max: int = 5
    cases: tuple = ("dn",)
    n_surface: int = 32
    n_t: int = 16
    mode_max: int = 8
    tol_disc: float = 1e-3
    solver_tol: float = 1e-6
    extrapolate: bool = True
    max_levels: int = 5
    eps_ceiling: float = 1.0
    seed: int = 0x5EED
    workers: int | None = None
    out_dir: str = "out"
    formats: tuple = ("csv", "json")

    def geometry(self) -> Geometry:
        try:
            return make_geometry(self.geometry_kind, dict(self.geometry_params), self.orientation)
        except DomainError as exc:
            raise ConfigError(str(exc)) from exc

    def validate(self) -> "Config":
        geom = self.geometry()
        eps = self.eps_list
        if not eps:
            raise ConfigError("sweep.eps is empty")
        if any(e <= 0 for e in eps):
            raise ConfigError("all eps values must be positive")
        if any(b >= a for a, b in zip(eps, eps[1:])):
            raise ConfigError("sweep.eps must be strictly decreasing")
        limit = max_admissible_eps(geom, self.eps_ceiling)
        if eps[0] >= limit:
            raise ConfigError(f"eps={eps[0]} not below the admissible bound {limit:.6g}")
        if self.n_max < 1:
            raise ConfigError("sweep.n_max must be >= 1")
        bad = [c for c in self.cases if c not in CASES]
        if bad or not self.cases:
            raise ConfigError(f"unknown cases {bad}; choose from {CASES}")
        bad = [f for f in self.formats if f not in FORMATS]
        if bad:
            raise ConfigError(f"unknown formats {bad}; choose from {FORMATS}")
        return self

    def resolved_workers(self) -> int:
        if self.workers is not None:
            return max(1, int(self.workers))
        env = os.environ.get(WORKERS_ENV)
        return max(1, int(env)) if env else 1

    def canonical(self) -> dict:
        data = asdict(self)
        data.pop("workers")
        data.pop("out_dir")
        return data

    def digest(self) -> str:
        blob = json.dumps(self.canonical(), sort_keys=True, default=str).encode()
        return hashlib.sha256(blob).hexdigest()


def _floats(text):
    return tuple(float(v) for v in text.replace(";", ",").split(",") if v.strip())


def _words(text):
    return tuple(v.strip().lower() for v in text.replace(";", ",").split(",") if v.strip())


def _bool(text):
    value = text.strip().lower()
    if value in ("1", "true", "yes", "on"):
        return True
    if value in ("0", "false", "no", "off"):
        return False
    raise ConfigError(f"not a boolean: {text!r}")


_SCALARS = {
    "sweep.n_max": ("n_max", int),
    "grid.n_surface": ("n_surface", int),
    "grid.n_t": ("n_t", int),
    "grid.mode_max": ("mode_max", int),
    "solver.tol": ("solver_tol", float),
    "solver.tol_disc": ("tol_disc", float),
    "solver.extrapolate": ("extrapolate", _bool),
    "solver.max_levels": ("max_levels", int),
    "solver.seed": ("seed", lambda v: int(v, 0)),
    "geometry.eps_ceiling": ("eps_ceiling", float),
    "run.workers": ("workers", int),
    "output.dir": ("out_dir", str),
}


def config_from_mapping(values: dict, base: Config | None = None) -> Config:
    """Apply dotted ``key -> string`` settings on top of ``base`` (or the defaults)."""
    cfg = base or Config()
    params = dict(cfg.geometry_params)
    updates = {}
    unknown = []
    values = {k.strip(): str(v).strip() for k, v in values.items()}
    kind = values.pop("geometry.kind", None)
    if kind is not None:
        if kind.lower() != cfg.geometry_kind:
            params = {}
        updates["geometry_kind"] = kind.lower()
    for key, raw in values.items():
        try:
            if key == "geometry.orientation":
                updates["orientation"] = raw
            elif key.startswith("geometry.") and key[9:] in _GEOMETRY_KEYS:
                params[key[9:]] = raw
            elif key == "sweep.eps":
                updates["eps_list"] = _floats(raw)
            elif key == "sweep.cases":
                updates["cases"] = _words(raw)
            elif key == "output.formats":
                updates["formats"] = _words(raw)
            elif key in _SCALARS:
                name, conv = _SCALARS[key]
                updates[name] = conv(raw)
            else:
                unknown.append(key)
        except ValueError as exc:
            raise ConfigError(f"bad value for {key}: {raw!r} ({exc})") from exc
    if unknown:
        raise ConfigError(f"unknown config keys: {', '.join(sorted(unknown))}")
    updates["geometry_params"] = tuple(sorted(params.items()))
    return replace(cfg, **updates)


def parse_config_text(text: str, base: Config | None = None) -> Config:
    parser = configparser.ConfigParser(interpolation=None, delimiters=("=",),
                                       comment_prefixes=("#", ";"), inline_comment_prefixes=("#",))
    parser.optionxform = str
    try:
        parser.read_string("[root]\n" + text)
    except configparser.Error as exc:
        raise ConfigError(f"malformed config: {exc}") from exc
    values = {}
    for section in parser.sections():
        prefix = "" if section == "root" else section + "."
        for key, value in parser.items(section):
            values[prefix + key] = value
    return config_from_mapping(values, base)


def load_config(path, base: Config | None = None) -> Config:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    return parse_config_text(text, base)


def parse_geometry_flag(text: str) -> dict:
    """``circle,radius=1,orientation=inward`` -> dotted config keys."""
    parts = [p.strip() for p in text.split(",") if p.strip()]
    if not parts:
        raise ConfigError("empty --geometry value")
    values = {"geometry.kind": parts[0]}
    for part in parts[1:]:
        if "=" not in part:
            raise ConfigError(f"--geometry entries must be key=value, got {part!r}")
        key, value = part.split("=", 1)
        values["geometry." + key.strip()] = value.strip()
    return values
