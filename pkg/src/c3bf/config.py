"""Scenario configuration: JSON schema, parsing, and canonical echo."""

import json
import math
from dataclasses import asdict, dataclass, field
from importlib import resources
from pathlib import Path

import jsonschema

from .errors import ConfigError
from .models import METHODS, RK4, EgoParams, PlanarState, UnicycleState
from .safety_filter import InputBounds

SCHEMA_VERSION = 1
VERTICAL = "vertical"
HORIZONTAL = "horizontal"

_num = {"type": "number"}
_pos = {"type": "number", "exclusiveMinimum": 0}
_vec2 = {"type": "array", "items": _num, "minItems": 2, "maxItems": 2}
_bound = {"type": "array", "items": {"type": ["number", "null"]}, "minItems": 2, "maxItems": 2}


def _record(props, required=None):
    return {
        "type": "object",
        "properties": props,
        "required": list(props) if required is None else required,
        "additionalProperties": False,
    }


_COMMON = {
    "schema_version": {"const": SCHEMA_VERSION},
    "name": {"type": "string"},
    "ego": _record({"l": {"type": "number", "minimum": 0}, "width": _pos}),
    "obstacles": {
        "type": "array",
        # velocity is a single constant 2-vector; anything time-varying is rejected here
        "items": _record(
            {"center": _vec2, "velocity": _vec2, "semi_axes": {**_vec2, "items": _pos}},
            required=["center", "semi_axes"],
        ),
    },
    "gamma": _pos,
    "dt": _pos,
    "duration": _pos,
    "pd_gains": _record({"kp": {"type": "number", "minimum": 0}, "kd": {"type": "number", "minimum": 0}}),
    "bounds": {"oneOf": [{"type": "null"}, _record({"lower": _bound, "upper": _bound})]},
    "seed": {"type": "integer"},
    "method": {"enum": list(METHODS)},
}
_OPTIONAL = {"name", "ego", "gamma", "dt", "method", "bounds", "seed", "pd_gains"}


def _mode_schema(mode, state_fields, target_fields):
    props = {
        **_COMMON,
        "mode": {"const": mode},
        "initial_state": _record({k: _num for k in state_fields}),
        "target": _record({k: _num for k in target_fields}),
    }
    return _record(props, required=sorted(set(props) - _OPTIONAL))


CONFIG_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "title": "c3bf scenario",
    "type": "object",
    "required": ["mode"],
    "properties": {"mode": {"enum": [VERTICAL, HORIZONTAL]}},
    "allOf": [
        {
            "if": {"properties": {"mode": {"const": VERTICAL}}},
            "then": _mode_schema(VERTICAL, UnicycleState.field_names(), ("v", "omega")),
        },
        {
            "if": {"properties": {"mode": {"const": HORIZONTAL}}},
            "then": _mode_schema(HORIZONTAL, PlanarState.field_names(), ("vx", "z")),
        },
    ],
}


@dataclass(frozen=True)
class ObstacleSpec:
    center: tuple
    semi_axes: tuple
    velocity: tuple = (0.0, 0.0)


@dataclass(frozen=True)
class PDGains:
    kp: float = 2.0
    kd: float = 0.0


@dataclass(frozen=True)
class ScenarioConfig:
    mode: str
    initial_state: object
    target: dict
    obstacles: tuple
    duration: float
    ego: EgoParams = field(default_factory=EgoParams)
    gamma: float = 1.0
    dt: float = 0.01
    pd_gains: PDGains = field(default_factory=PDGains)
    bounds: tuple = None  # ((lo0, lo1), (hi0, hi1)); None = unbounded
    seed: int = 0
    method: str = RK4
    name: str = ""

    @property
    def n_steps(self):
        return int(round(self.duration / self.dt))

    def input_bounds(self):
        if self.bounds is None:
            return None
        return InputBounds(self.bounds[0], self.bounds[1])

    def to_dict(self):
        d = {
            "schema_version": SCHEMA_VERSION,
            "name": self.name,
            "mode": self.mode,
            "ego": asdict(self.ego),
            "initial_state": asdict(self.initial_state),
            "target": dict(self.target),
            "obstacles": [
                {"center": list(o.center), "velocity": list(o.velocity), "semi_axes": list(o.semi_axes)}
                for o in self.obstacles
            ],
            "gamma": self.gamma,
            "dt": self.dt,
            "duration": self.duration,
            "pd_gains": asdict(self.pd_gains),
            "bounds": None,
            "seed": self.seed,
            "method": self.method,
        }
        if self.bounds is not None:
            d["bounds"] = {
                "lower": [None if math.isinf(x) else x for x in self.bounds[0]],
                "upper": [None if math.isinf(x) else x for x in self.bounds[1]],
            }
        return d

    def to_json(self):
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"


def _floats(seq):
    return tuple(float(x) for x in seq)


def config_from_dict(data):
    """Validate a decoded config document and build a ``ScenarioConfig``."""
    validator = jsonschema.Draft202012Validator(CONFIG_SCHEMA)
    errors = sorted(validator.iter_errors(data), key=lambda e: list(e.absolute_path))
    if errors:
        err = jsonschema.exceptions.best_match(errors)
        where = "/".join(str(p) for p in err.absolute_path) or "<root>"
        raise ConfigError(f"invalid config at field '{where}': {err.message}")

    mode = data["mode"]
    state_cls = UnicycleState if mode == VERTICAL else PlanarState
    obstacles = tuple(
        ObstacleSpec(
            center=_floats(o["center"]),
            semi_axes=_floats(o["semi_axes"]),
            velocity=_floats(o.get("velocity", (0.0, 0.0))),
        )
        for o in data["obstacles"]
    )
    bounds = data.get("bounds")
    if bounds is not None:
        lo = tuple(-math.inf if x is None else float(x) for x in bounds["lower"])
        hi = tuple(math.inf if x is None else float(x) for x in bounds["upper"])
        if any(a > b for a, b in zip(lo, hi)):
            raise ConfigError("invalid config at field 'bounds': lower exceeds upper")
        bounds = (lo, hi)
    kwargs = {}
    if "ego" in data:
        kwargs["ego"] = EgoParams(**{k: float(v) for k, v in data["ego"].items()})
    if "pd_gains" in data:
        kwargs["pd_gains"] = PDGains(**{k: float(v) for k, v in data["pd_gains"].items()})
    for key in ("gamma", "dt"):
        if key in data:
            kwargs[key] = float(data[key])
    if "seed" in data:
        kwargs["seed"] = int(data["seed"])
    if "method" in data:
        kwargs["method"] = data["method"]
    try:
        initial = state_cls(**{k: float(v) for k, v in data["initial_state"].items()})
    except ValueError as exc:
        raise ConfigError(f"invalid config at field 'initial_state': {exc}") from exc
    return ScenarioConfig(
        mode=mode,
        initial_state=initial,
        target={k: float(v) for k, v in data["target"].items()},
        obstacles=obstacles,
        duration=float(data["duration"]),
        bounds=bounds,
        name=data.get("name", ""),
        **kwargs,
    )


def loads_config(text, source="<string>"):
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{source}: line {exc.lineno} column {exc.colno}: {exc.msg}") from exc
    try:
        return config_from_dict(data)
    except ConfigError as exc:
        raise ConfigError(f"{source}: {exc}") from exc


def bundled_scenarios():
    root = resources.files("c3bf") / "scenarios"
    return sorted(p.name[: -len(".json")] for p in root.iterdir() if p.name.endswith(".json"))


def load_config(path_or_name):
    """Load a config from a file path, or from a bundled scenario name."""
    path = Path(path_or_name)
    if path.is_file():
        return loads_config(path.read_text(), source=str(path))
    name = str(path_or_name)
    if name in bundled_scenarios():
        res = resources.files("c3bf") / "scenarios" / f"{name}.json"
        return loads_config(res.read_text(), source=f"bundled:{name}")
    raise ConfigError(f"config not found: {path_or_name}")
