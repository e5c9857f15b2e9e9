"""Scenario files: JSON schema, defaults and conversion into typed parameters."""
import copy
import json
import math
import os
from dataclasses import dataclass, field

import jsonschema

from absim.colav import DEFAULT_OFFSETS, ObstacleState, SbmpcParams, SbmpcTuning
from absim.control import MpcParams, PidParams
from absim.guidance import LOSParams
from absim.ship import Ship, load_default_ship_dict


class ScenarioError(Exception):
    pass


_num = {"type": "number"}
_xy = {"type": "array", "items": _num, "minItems": 2, "maxItems": 2}

SCHEMA = {
    "type": "object",
    "required": ["version", "route"],
    "properties": {
        "version": {"const": 1},
        "name": {"type": "string"},
        "chart": {"type": "string"},
        "route": {
            "type": "object",
            "oneOf": [
                {"required": ["waypoints"], "not": {"anyOf": [{"required": ["start"]}, {"required": ["goal"]}]}},
                {"required": ["start", "goal"], "not": {"required": ["waypoints"]}},
            ],
            "properties": {
                "waypoints": {"type": "array", "items": _xy, "minItems": 2},
                "start": _xy,
                "goal": _xy,
                "min_depth": {"type": "number", "minimum": 0},
                "merge_tol": {"type": "number", "exclusiveMinimum": 0},
                "epsilon": {"type": "number", "exclusiveMinimum": 0},
                "dup_tol": {"type": "number", "minimum": 0},
                "window": {"type": "integer", "minimum": 1},
            },
            "additionalProperties": False,
        },
        "ship": {"type": "object"},
        "initial_state": {
            "type": "object",
            "properties": {k: _num for k in ("x", "y", "psi", "u", "v", "r")},
            "additionalProperties": False,
        },
        "guidance": {
            "type": "object",
            "properties": {
                "D_los": {"type": "number", "exclusiveMinimum": 0},
                "R_a": {"type": "number", "exclusiveMinimum": 0},
                "pass_angle_threshold": {"type": "number", "exclusiveMinimum": 0, "maximum": math.pi},
                "nominal_speed": {"oneOf": [{"type": "number", "exclusiveMinimum": 0},
                                            {"type": "array", "items": {"type": "number", "exclusiveMinimum": 0},
                                             "minItems": 1}]},
                "r_d_tau": {"type": "number", "minimum": 0},
            },
            "additionalProperties": False,
        },
        "controller": {
            "type": "object",
            "properties": {
                "type": {"enum": ["pid", "mpc"]},
                "pid_output_sign": {"enum": [-1, 1]},
                "pid": {
                    "type": "object",
                    "properties": {
                        "K_p": {"type": "number", "exclusiveMinimum": 0},
                        "T_i": {"type": ["number", "null"], "exclusiveMinimum": 0},
                        "T_d": {"type": "number", "minimum": 0},
                        "integral_limit": {"type": ["number", "null"], "minimum": 0},
                    },
                    "additionalProperties": False,
                },
                "mpc": {
                    "type": "object",
                    "properties": {
                        "T_s": {"type": "number", "exclusiveMinimum": 0},
                        "N": {"type": "integer", "minimum": 1},
                        "headingGain": {"type": "number", "minimum": 0},
                        "rateGain": {"type": "number", "minimum": 0},
                        "rudderGain": {"type": "number", "minimum": 0},
                        "max_iter": {"type": "integer", "minimum": 1},
                        "deltaMAX": {"type": "number", "exclusiveMinimum": 0},
                        "nomoto_K": {"oneOf": [_num, {"const": "auto"}]},
                        "nomoto_T": {"oneOf": [{"type": "number", "exclusiveMinimum": 0}, {"const": "auto"}]},
                        "r_max": {"type": "number", "exclusiveMinimum": 0},
                        "w_pen": {"type": "number", "minimum": 0},
                    },
                    "additionalProperties": False,
                },
            },
            "additionalProperties": False,
        },
        "colav": {
            "type": "object",
            "properties": {
                "enabled": {"type": "boolean"},
                "sbmpc": {
                    "type": "object",
                    "properties": {
                        "T": {"type": "number", "exclusiveMinimum": 0},
                        "dt": {"type": "number", "exclusiveMinimum": 0},
                        "T_chi": {"type": "number", "exclusiveMinimum": 0},
                        "T_U": {"type": "number", "exclusiveMinimum": 0},
                        "chi_offsets_deg": {"type": "array", "items": _num, "minItems": 1},
                        "U_mults": {"type": "array", "items": {"type": "number", "minimum": 0}, "minItems": 1},
                        "tuning": {"type": "object",
                                   "properties": {k: _num for k in SbmpcTuning.__dataclass_fields__},
                                   "additionalProperties": False},
                    },
                    "additionalProperties": False,
                },
                "targets": {
                    "type": "array",
                    "items": {
                        "type": "object",
                        "required": ["x", "y", "course", "speed"],
                        "properties": {
                            "x": _num, "y": _num, "course": _num,
                            "speed": {"type": "number", "minimum": 0},
                            "length": {"type": "number", "exclusiveMinimum": 0},
                            "mode": {"enum": ["constant_velocity", "waypoints"]},
                            "waypoints": {"type": "array", "items": _xy, "minItems": 2},
                            "D_los": {"type": "number", "exclusiveMinimum": 0},
                            "R_a": {"type": "number", "exclusiveMinimum": 0},
                        },
                        "additionalProperties": False,
                    },
                },
            },
            "additionalProperties": False,
        },
        "sim": {
            "type": "object",
            "properties": {
                "dt": {"type": "number", "exclusiveMinimum": 0},
                "max_steps": {"type": "integer", "minimum": 1},
                "v_ref": {"type": "number", "exclusiveMinimum": 0},
                "current": _xy,
                "water_depth": {"type": "number", "exclusiveMinimum": 0},
                "seed": {"type": "integer"},
            },
            "additionalProperties": False,
        },
    },
    "additionalProperties": False,
}


@dataclass
class TargetSpec:
    obstacle: ObstacleState
    mode: str = "constant_velocity"
    waypoints: tuple = ()
    D_los: float = 100.0
    R_a: float = 30.0


@dataclass
class ScenarioConfig:
    name: str
    base_dir: str
    chart_path: str = None
    waypoints: tuple = None
    start: tuple = None
    goal: tuple = None
    min_depth: float = 0.0
    planner: dict = field(default_factory=dict)
    ship: Ship = None
    initial_state: dict = None
    los: LOSParams = None
    r_d_tau: float = 2.0
    controller: str = "pid"
    pid_output_sign: int = -1
    pid: PidParams = None
    mpc: MpcParams = None
    mpc_auto: tuple = (False, False)
    colav_enabled: bool = False
    sbmpc: SbmpcParams = None
    targets: list = field(default_factory=list)
    dt: float = 1.0
    max_steps: int = 5000
    v_ref: float = 3.0
    current: tuple = (0.0, 0.0)
    water_depth: float = math.inf
    seed: int = 0
    raw: dict = field(default=None, repr=False)

    def with_overrides(self, **kw):
        out = copy.copy(self)
        for k, v in kw.items():
            setattr(out, k, v)
        return out


def validate_doc(doc):
    try:
        jsonschema.validate(doc, SCHEMA)
    except jsonschema.ValidationError as exc:
        where = "/".join(str(p) for p in exc.absolute_path) or "<root>"
        raise ScenarioError(f"{where}: {exc.message}") from None


def _merge(base, over):
    out = dict(base)
    for k, v in over.items():
        out[k] = _merge(out[k], v) if isinstance(v, dict) and isinstance(out.get(k), dict) else v
    return out


def from_dict(doc, base_dir="."):
    validate_doc(doc)
    route = doc["route"]
    sim = doc.get("sim", {})
    dt = float(sim.get("dt", 1.0))
    cfg = ScenarioConfig(name=doc.get("name", "scenario"), base_dir=base_dir, raw=doc)
    if "chart" in doc:
        cfg.chart_path = os.path.normpath(os.path.join(base_dir, doc["chart"]))
    if "waypoints" in route:
        cfg.waypoints = tuple((float(a), float(b)) for a, b in route["waypoints"])
    else:
        if cfg.chart_path is None:
            raise ScenarioError("route: start/goal routes need a 'chart'")
        cfg.start = tuple(map(float, route["start"]))
        cfg.goal = tuple(map(float, route["goal"]))
        cfg.min_depth = float(route.get("min_depth", 0.0))
        cfg.planner = {k: route[k] for k in ("merge_tol", "epsilon", "dup_tol", "window") if k in route}
        if cfg.planner.get("window", 5) % 2 == 0:
            raise ScenarioError("route/window: must be odd")
    cfg.dt = dt
    cfg.max_steps = int(sim.get("max_steps", 5000))
    cfg.current = tuple(map(float, sim.get("current", (0.0, 0.0))))
    cfg.water_depth = float(sim.get("water_depth", math.inf))
    cfg.seed = int(sim.get("seed", 0))

    try:
        ship_doc = _merge(load_default_ship_dict(), doc.get("ship", {}))
        cfg.ship = Ship.from_dict(ship_doc, water_depth=cfg.water_depth, current=cfg.current)
    except (TypeError, ValueError, KeyError) as exc:
        raise ScenarioError(f"ship: {exc}") from None
    cfg.initial_state = doc.get("initial_state")

    g = doc.get("guidance", {})
    speeds = g.get("nominal_speed", 3.0)
    speeds = tuple(speeds) if isinstance(speeds, list) else (float(speeds),)
    cfg.los = LOSParams(D_los=float(g.get("D_los", 150.0)), R_a=float(g.get("R_a", 40.0)),
                        pass_angle_threshold=float(g.get("pass_angle_threshold", math.pi / 2)),
                        nominal_speeds=speeds)
    cfg.r_d_tau = float(g.get("r_d_tau", 2.0))
    cfg.v_ref = float(sim.get("v_ref", max(speeds)))

    c = doc.get("controller", {})
    cfg.controller = c.get("type", "pid")
    cfg.pid_output_sign = int(c.get("pid_output_sign", -1))
    dmax = cfg.ship.rudder.delta_max
    pd = c.get("pid", {})
    T_i = pd.get("T_i", 500.0)
    inv = 0.0 if T_i is None else 1.0 / float(T_i)
    lim = pd.get("integral_limit")
    if lim is None:
        lim = dmax / inv if inv > 0 else math.inf
    cfg.pid = PidParams(K_p=float(pd.get("K_p", 2.5)), inv_T_i=inv, T_d=float(pd.get("T_d", 30.0)),
                        delta_max=dmax, integral_limit=float(lim))
    md = dict(c.get("mpc", {}))
    auto = (md.get("nomoto_K") == "auto", md.get("nomoto_T") == "auto")
    md = {k: v for k, v in md.items() if v != "auto"}
    md.setdefault("deltaMAX", dmax)
    md.setdefault("T_s", dt)
    md.setdefault("nomoto_K", 0.035)
    md.setdefault("nomoto_T", 15.5)
    try:
        cfg.mpc = MpcParams(**md)
    except ValueError as exc:
        raise ScenarioError(f"controller/mpc: {exc}") from None
    cfg.mpc_auto = auto

    cv = doc.get("colav", {})
    cfg.colav_enabled = bool(cv.get("enabled", False))
    sb = cv.get("sbmpc", {})
    offs = tuple(math.radians(d) for d in sb["chi_offsets_deg"]) if "chi_offsets_deg" in sb else DEFAULT_OFFSETS
    try:
        cfg.sbmpc = SbmpcParams(T=float(sb.get("T", 300.0)), dt=float(sb.get("dt", 5.0)),
                                T_chi=float(sb.get("T_chi", 15.0)), T_U=float(sb.get("T_U", 30.0)),
                                chi_offsets=offs, U_mults=tuple(sb.get("U_mults", (1.0, 0.5, 0.0))),
                                tuning=SbmpcTuning(**sb.get("tuning", {})))
    except ValueError as exc:
        raise ScenarioError(f"colav/sbmpc: {exc}") from None
    for i, t in enumerate(cv.get("targets", [])):
        mode = t.get("mode", "constant_velocity")
        if mode == "waypoints" and "waypoints" not in t:
            raise ScenarioError(f"colav/targets/{i}: waypoint mode needs 'waypoints'")
        cfg.targets.append(TargetSpec(
            ObstacleState(float(t["x"]), float(t["y"]), float(t["course"]), float(t["speed"]),
                          float(t.get("length", 80.0))),
            mode, tuple(tuple(map(float, w)) for w in t.get("waypoints", ())),
            float(t.get("D_los", 100.0)), float(t.get("R_a", 30.0))))
    if cfg.dt <= 0 or cfg.max_steps < 1:
        raise ScenarioError("sim: need dt > 0 and max_steps >= 1")
    return cfg


def load_scenario(path):
    try:
        with open(path, encoding="utf-8") as f:
            doc = json.load(f)
    except OSError as exc:
        raise ScenarioError(f"{path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise ScenarioError(f"{path}: invalid JSON: {exc}") from None
    return from_dict(doc, os.path.dirname(os.path.abspath(path)))
