"""Declarative analysis configuration: YAML document, env overrides, schema.

One config drives one batch run. The document is a nested key/value
mapping; any key can be overridden from the environment with the
``MCONVEX_`` prefix, double underscores separating nesting levels
(``MCONVEX_BARRIER__M=3`` sets ``barrier.m``). Schema violations are
reported with the offending field path. The schema reference lives in
docs/config.md.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field
from typing import Any, Optional

import yaml

ENV_PREFIX = "MCONVEX_"

KINDS = (
    "curvature",
    "reach",
    "barrier",
    "verify",
    "subharmonicity",
    "metric",
    "omega-d",
    "convex-classify",
)

FORMATS = ("json-lines", "csv-summary")

DOMAINS = ("sphere", "halfspace", "cylinder", "slab", "catenoid", "scherk")

OMEGA_SLICES = ("disc", "punctured-plane", "plane")


class ConfigError(ValueError):
    """Schema violation carrying the field path."""

    def __init__(self, path: str, message: str):
        self.path = path
        super().__init__(f"{path}: {message}")


@dataclass
class AnalysisConfig:
    """Validated run description; defaults filled in."""

    kind: str
    seed: int = 0
    out: Optional[str] = None
    fmt: str = "json-lines"
    workers: int = 1
    domain: dict = field(default_factory=lambda: {"name": "sphere"})
    grid: dict = field(default_factory=dict)
    params: dict = field(default_factory=dict)
    raw: dict = field(default_factory=dict)


def load_config(path: Optional[str], overrides: Optional[dict] = None) -> dict:
    """Read the YAML document and apply environment + explicit overrides."""
    data: dict = {}
    if path is not None:
        with open(path, "r", encoding="utf-8") as fh:
            loaded = yaml.safe_load(fh)
        if loaded is None:
            loaded = {}
        if not isinstance(loaded, dict):
            raise ConfigError("<root>", "config document must be a mapping")
        data = loaded
    _apply_env(data, os.environ)
    for key, value in (overrides or {}).items():
        if value is not None:
            _set_path(data, key.split("."), value)
    return data


def _apply_env(data: dict, env) -> None:
    for name in sorted(env):
        if not name.startswith(ENV_PREFIX):
            continue
        path = [part.lower() for part in name[len(ENV_PREFIX):].split("__")]
        try:
            value = yaml.safe_load(env[name])
        except yaml.YAMLError:
            value = env[name]
        _set_path(data, path, value)


def _set_path(data: dict, path, value) -> None:
    node = data
    for part in path[:-1]:
        nxt = node.get(part)
        if not isinstance(nxt, dict):
            nxt = {}
            node[part] = nxt
        node = nxt
    node[path[-1]] = value


def _require(data: dict, path: str, typ, choices=None):
    node: Any = data
    parts = path.split(".")
    for part in parts:
        if not isinstance(node, dict) or part not in node:
            raise ConfigError(path, "missing required field")
        node = node[part]
    return _coerce(path, node, typ, choices)


def _optional(data: dict, path: str, typ, default, choices=None):
    node: Any = data
    for part in path.split("."):
        if not isinstance(node, dict) or part not in node:
            return default
        node = node[part]
    if node is None:
        return default
    return _coerce(path, node, typ, choices)


def _coerce(path: str, value, typ, choices):
    if typ is float and isinstance(value, int) and not isinstance(value, bool):
        value = float(value)
    if typ is int and isinstance(value, bool):
        raise ConfigError(path, f"expected int, got bool {value!r}")
    if not isinstance(value, typ):
        raise ConfigError(path, f"expected {typ.__name__}, got {type(value).__name__}")
    if choices is not None and value not in choices:
        raise ConfigError(path, f"must be one of {list(choices)}, got {value!r}")
    return value


def validate(data: dict) -> AnalysisConfig:
    """Check the document against the schema and fill defaults."""
    kind = _require(data, "kind", str, KINDS)
    seed = _optional(data, "seed", int, 0)
    out = _optional(data, "output.path", str, None)
    fmt = _optional(data, "output.format", str, "json-lines", FORMATS)
    workers = _optional(data, "workers", int, 1)
    if workers < 1:
        raise ConfigError("workers", f"must be >= 1, got {workers}")
    if seed < 0:
        raise ConfigError("seed", f"must be >= 0, got {seed}")

    domain = {"name": _optional(data, "domain.name", str, "sphere", DOMAINS)}
    for key, value in (data.get("domain") or {}).items():
        if key != "name":
            domain[key] = value

    grid = {
        "interior": _optional(data, "grid.interior", int, 2000),
        "boundary": _optional(data, "grid.boundary", int, 400),
    }
    for name, val in grid.items():
        if val < 1:
            raise ConfigError(f"grid.{name}", f"must be >= 1, got {val}")

    params: dict = {}
    if kind == "curvature":
        params["m"] = _require(data, "curvature.m", int)
        params["flat_tol"] = _optional(data, "curvature.flat_tol", float, None)
        params["r0"] = _optional(data, "curvature.r0", float, 1.0)
    elif kind == "reach":
        params["m"] = _require(data, "reach.m", int)
        params["probes"] = _optional(data, "reach.probes", int, 16)
    elif kind in ("barrier", "verify", "subharmonicity"):
        params["m"] = _require(data, "barrier.m", int)
        params["epsilon"] = _optional(data, "barrier.epsilon", float, None)
        params["epsilon_fraction"] = _optional(
            data, "barrier.epsilon_fraction", float, 0.8
        )
        params["alpha"] = _optional(data, "barrier.alpha", float, None)
        params["safety"] = _optional(data, "barrier.safety", float, 0.99)
        params["ratios"] = _optional(data, "barrier.ratios", list, [0.9, 0.6, 0.3])
        if len(params["ratios"]) != 3:
            raise ConfigError("barrier.ratios", "must be three ratios")
        params["cap_degree"] = _optional(data, "barrier.cap_degree", int, 3)
        params["psh_tol"] = _optional(data, "barrier.psh_tol", float, 1e-8)
        params["levels"] = _optional(data, "barrier.levels", int, 10)
        params["fd_checks"] = _optional(data, "barrier.fd_checks", int, 0)
        if kind == "subharmonicity":
            params["tol"] = _optional(data, "subharmonicity.tol", float, 1e-8)
            params["negative_control"] = _optional(
                data, "subharmonicity.negative_control", bool, True
            )
            params["maps"] = _optional(data, "subharmonicity.maps", list, None)
    elif kind == "metric":
        params["pairs"] = _optional(data, "metric.pairs", int, 100)
        params["max_radius"] = _optional(data, "metric.max_radius", float, 0.9)
        params["tolerance"] = _optional(data, "metric.tolerance", float, 0.01)
        params["point"] = _optional(data, "metric.point", list, None)
        params["direction"] = _optional(data, "metric.direction", list, None)
    elif kind == "omega-d":
        params["slice"] = _optional(
            data, "omega_d.slice", str, "punctured-plane", OMEGA_SLICES
        )
        params["p"] = _optional(data, "omega_d.p", list, [0.0, 0.0, 0.0])
        params["q"] = _optional(data, "omega_d.q", list, [1.0, 0.0, 0.0])
        params["ks"] = _optional(data, "omega_d.ks", list, [10, 100, 1000, 10000])
        params["threshold"] = _optional(data, "omega_d.threshold", float, 0.01)
        for name in ("p", "q"):
            if len(params[name]) != 3:
                raise ConfigError(f"omega_d.{name}", "must be a 3-vector")
    elif kind == "convex-classify":
        fixtures = _optional(data, "convex.fixtures", list, None)
        if fixtures is None:
            raise ConfigError("convex.fixtures", "missing required field")
        for i, fx in enumerate(fixtures):
            if not isinstance(fx, dict):
                raise ConfigError(f"convex.fixtures[{i}]", "must be a mapping")
            for fld in ("name", "normals", "constants", "interior"):
                if fld not in fx:
                    raise ConfigError(
                        f"convex.fixtures[{i}].{fld}", "missing required field"
                    )
        params["fixtures"] = fixtures
        params["trials"] = _optional(data, "convex.trials", int, 10000)

    if kind in ("barrier", "verify", "subharmonicity") and params["m"] < 1:
        raise ConfigError("barrier.m", f"must be >= 1, got {params['m']}")

    return AnalysisConfig(
        kind=kind,
        seed=seed,
        out=out,
        fmt=fmt,
        workers=workers,
        domain=domain,
        grid=grid,
        params=params,
        raw=data,
    )
