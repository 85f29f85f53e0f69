"""YAML run configuration: schema, defaults, validation and echo.

Angles are radians and lengths meters everywhere; nothing is converted.
Unknown keys are rejected so typos surface at load time.
"""
from dataclasses import dataclass
import copy
import hashlib
import math

import numpy as np
import yaml

from .dexterity import DexterityConfig
from .ehem import EhemModel
from .errors import ConfigError, ErgoscopeError
from .interaction import DualArmLayout
from .kinematics import CONVENTIONS, DEFAULT_LIMITS, DhLink, ManipulatorModel, N_JOINTS, Pose
from .optimizer import STRATEGIES, DesignPoint, EvalConfig, OptimizationProblem

MESH_FORMATS = ("ply", "obj")
_DEG30 = math.radians(30.0)


def _float(v, path):
    if isinstance(v, bool):
        raise ConfigError(f"expected a number, got {v!r}", path)
    if isinstance(v, str):
        try:
            return float(v)
        except ValueError:
            raise ConfigError(f"expected a number, got {v!r}", path) from None
    if isinstance(v, (int, float)):
        return float(v)
    raise ConfigError(f"expected a number, got {type(v).__name__}", path)


def _int(v, path):
    if isinstance(v, bool) or not isinstance(v, (int, float)) or int(v) != v:
        raise ConfigError(f"expected an integer, got {v!r}", path)
    return int(v)


def _bool(v, path):
    if not isinstance(v, bool):
        raise ConfigError(f"expected true/false, got {v!r}", path)
    return v


def _str(v, path):
    if not isinstance(v, str):
        raise ConfigError(f"expected a string, got {v!r}", path)
    return v


def _vec(n):
    def parse(v, path):
        if not isinstance(v, (list, tuple)) or len(v) != n:
            raise ConfigError(f"expected a list of {n} numbers", path)
        return [_float(x, f"{path}[{i}]") for i, x in enumerate(v)]
    return parse


def _interval(v, path):
    lo, hi = _vec(2)(v, path)
    if lo > hi:
        raise ConfigError(f"lower bound {lo} exceeds upper bound {hi}", path, kind="invariant")
    return [lo, hi]


def _matrix3(v, path):
    if not isinstance(v, (list, tuple)) or len(v) != 3:
        raise ConfigError("expected a 3x3 nested list", path)
    return [_vec(3)(row, f"{path}[{i}]") for i, row in enumerate(v)]


def _choice(options):
    def parse(v, path):
        v = _str(v, path)
        if v not in options:
            raise ConfigError(f"expected one of {', '.join(options)}, got {v!r}", path)
        return v
    return parse


def _formats(v, path):
    if not isinstance(v, (list, tuple)):
        raise ConfigError("expected a list of mesh formats", path)
    return [_choice(MESH_FORMATS)(x, f"{path}[{i}]") for i, x in enumerate(v)]


_LINK = {
    "alpha": (_float, None),
    "a": (_float, None),
    "d": (_float, 0.0),
    "theta_offset": (_float, 0.0),
    "theta_down": (_float, None),
    "theta_up": (_float, None),
}

SCHEMA = {
    "manipulator": {
        "convention": (_choice(CONVENTIONS), "modified"),
        "base_position": (_vec(3), [0.0, 0.0, 0.0]),
        "base_rotation": (_matrix3, [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]]),
        "links": (None, None),
    },
    "dexterity": {
        "K": (_float, 1e5),
        "tau": (_float, 0.3),
    },
    "sampling": {
        "n_samples": (_int, 200_000),
        "seed": (_int, 0),
        "r": (_float, 0.02),
        "r_auto": (_bool, False),
        "workers": (_int, 1),
    },
    "ehem": {
        "fulcrum": (_vec(3), [-0.20, 0.0, 0.0]),
        "desk_slide_range": (_interval, [-0.10, 0.10]),
        "reach_range": (_interval, [-0.10, 0.10]),
        "pitch_range": (_interval, [-_DEG30, _DEG30]),
        "roll_range": (_interval, [-_DEG30, _DEG30]),
        "forearm_length": (_float, 0.25),
        "wrist_radius": (_float, 0.08),
        "mirror_plane": (_float, 0.0),
        "n_samples": (_int, 200_000),
    },
    "layout": {
        "R": (_vec(3), [0.10, 0.60, 0.0]),
        "D": (_float, 0.20),
        "alpha": (_float, 0.5),
        "binarize": (_bool, False),
        "interaction_tau": (_float, 0.0),
    },
    "isosurface": {
        "isovalue": (_float, 0.3),
    },
    "optimize": {
        "bounds": (None, None),
        "strategy": (_choice(STRATEGIES), "grid_then_nelder_mead"),
        "budget": (_int, 1000),
        "grid_points": (_int, 9),
        "n_seeds": (_int, 1),
        "xatol": (_float, 1e-4),
        "fatol": (_float, 1e-10),
    },
    "output": {
        "directory": (_str, "out"),
        "mesh_formats": (_formats, ["ply", "obj"]),
    },
}

_BOUNDS_DEFAULT = {"a3": [0.05, 0.40], "a4": [0.05, 0.40], "D": [0.05, 0.50]}


def _check_keys(data, allowed, path):
    if not isinstance(data, dict):
        raise ConfigError("expected a mapping", path or "<root>")
    for key in data:
        if key not in allowed:
            where = f"{path}.{key}" if path else str(key)
            raise ConfigError("unknown key", where, kind="unknown-key")


def _links(v, path):
    if not isinstance(v, list) or len(v) != N_JOINTS:
        raise ConfigError(f"expected a list of exactly {N_JOINTS} links", path)
    out = []
    for j, link in enumerate(v):
        lp = f"{path}[{j}]"
        _check_keys(link, _LINK, lp)
        parsed = {}
        for key, (parse, default) in _LINK.items():
            if key in link:
                parsed[key] = parse(link[key], f"{lp}.{key}")
            elif key in ("theta_down", "theta_up"):
                parsed[key] = DEFAULT_LIMITS[j][0 if key == "theta_down" else 1]
            elif default is None:
                raise ConfigError("missing required key", f"{lp}.{key}")
            else:
                parsed[key] = default
        if parsed["theta_down"] > parsed["theta_up"]:
            raise ConfigError(
                f"theta_down ({parsed['theta_down']}) exceeds theta_up ({parsed['theta_up']}) on link {j + 1}",
                lp, kind="invariant")
        if parsed["a"] < 0:
            raise ConfigError(f"link length must be >= 0 on link {j + 1}", f"{lp}.a", kind="invariant")
        out.append(parsed)
    return out


def _bounds(v, path):
    _check_keys(v, _BOUNDS_DEFAULT, path)
    out = {}
    for key, default in _BOUNDS_DEFAULT.items():
        lo, hi = _interval(v[key], f"{path}.{key}") if key in v else list(default)
        if lo < 0:
            raise ConfigError("bounds must be nonnegative", f"{path}.{key}", kind="invariant")
        out[key] = [lo, hi]
    return out


def normalize(data):
    """Validate a raw mapping and fill in every default. Returns a new dict."""
    if data is None:
        data = {}
    _check_keys(data, SCHEMA, "")
    if "manipulator" not in data:
        raise ConfigError("missing required section", "manipulator")
    out = {}
    for section, fields in SCHEMA.items():
        raw = data.get(section, {}) or {}
        _check_keys(raw, fields, section)
        sec = {}
        for key, (parse, default) in fields.items():
            path = f"{section}.{key}"
            if key == "links":
                if key not in raw:
                    raise ConfigError("missing required key", path)
                sec[key] = _links(raw[key], path)
            elif key == "bounds":
                sec[key] = _bounds(raw.get(key, {}) or {}, path)
            elif key in raw:
                sec[key] = parse(raw[key], path)
            else:
                sec[key] = copy.deepcopy(default)
        out[section] = sec
    _check_invariants(out)
    return out


def _check_invariants(d):
    def need(cond, message, path):
        if not cond:
            raise ConfigError(message, path, kind="invariant")

    need(d["dexterity"]["K"] > 0, "must be positive", "dexterity.K")
    need(0 <= d["dexterity"]["tau"] <= 1, "must lie in [0, 1]", "dexterity.tau")
    need(d["sampling"]["n_samples"] >= 1, "must be >= 1", "sampling.n_samples")
    need(d["sampling"]["r"] > 0, "must be positive", "sampling.r")
    need(d["sampling"]["workers"] >= 1, "must be >= 1", "sampling.workers")
    need(d["ehem"]["forearm_length"] > 0, "must be positive", "ehem.forearm_length")
    need(d["ehem"]["wrist_radius"] >= 0, "must be >= 0", "ehem.wrist_radius")
    need(d["ehem"]["n_samples"] >= 1, "must be >= 1", "ehem.n_samples")
    need(d["layout"]["D"] >= 0, "must be >= 0", "layout.D")
    need(0 < d["layout"]["alpha"] <= 1, "must lie in (0, 1]", "layout.alpha")
    need(0 <= d["layout"]["interaction_tau"] <= 1, "must lie in [0, 1]", "layout.interaction_tau")
    need(0 < d["isosurface"]["isovalue"] < 1, "must lie in (0, 1)", "isosurface.isovalue")
    need(d["optimize"]["budget"] >= 1, "must be >= 1", "optimize.budget")
    need(d["optimize"]["grid_points"] >= 1, "must be >= 1", "optimize.grid_points")
    need(d["optimize"]["n_seeds"] >= 1, "must be >= 1", "optimize.n_seeds")
    R = np.array(d["manipulator"]["base_rotation"])
    need(np.abs(R @ R.T - np.eye(3)).max() < 1e-9 and abs(np.linalg.det(R) - 1) < 1e-9,
         "must be a proper rotation matrix", "manipulator.base_rotation")


@dataclass(frozen=True, eq=False)
class RunConfig:
    """A validated, fully defaulted configuration."""

    data: dict

    def __eq__(self, other):
        return isinstance(other, RunConfig) and self.data == other.data

    def section(self, name):
        return self.data[name]

    def manipulator(self):
        m = self.data["manipulator"]
        links = tuple(DhLink(**link) for link in m["links"])
        pose = Pose(np.array(m["base_position"]), np.array(m["base_rotation"]))
        return ManipulatorModel(links=links, base_pose=pose, convention=m["convention"])

    def dexterity(self):
        return DexterityConfig(K=self.data["dexterity"]["K"])

    def ehem(self):
        e = self.data["ehem"]
        return EhemModel(
            fulcrum=tuple(e["fulcrum"]),
            desk_slide_range=tuple(e["desk_slide_range"]),
            reach_range=tuple(e["reach_range"]),
            pitch_range=tuple(e["pitch_range"]),
            roll_range=tuple(e["roll_range"]),
            forearm_length=e["forearm_length"],
            wrist_radius=e["wrist_radius"],
        )

    def layout(self):
        lay = self.data["layout"]
        return DualArmLayout(R=tuple(lay["R"]), D=lay["D"], alpha=lay["alpha"])

    def design(self):
        links = self.data["manipulator"]["links"]
        return DesignPoint(links[2]["a"], links[3]["a"], self.data["layout"]["D"])

    def eval_config(self):
        s, e, lay = self.data["sampling"], self.data["ehem"], self.data["layout"]
        return EvalConfig(
            template=self.manipulator(),
            dexterity=self.dexterity(),
            n_samples=s["n_samples"],
            seed=s["seed"],
            tau=self.data["dexterity"]["tau"],
            r=s["r"],
            r_auto=s["r_auto"],
            ehem=self.ehem(),
            mirror_plane=e["mirror_plane"],
            ehem_samples=e["n_samples"],
            R=tuple(lay["R"]),
            alpha=lay["alpha"],
            binarize=lay["binarize"],
            interaction_tau=lay["interaction_tau"],
            n_seeds=self.data["optimize"]["n_seeds"],
            workers=s["workers"],
        )

    def problem(self):
        o = self.data["optimize"]
        b = o["bounds"]
        return OptimizationProblem(
            bounds=(tuple(b["a3"]), tuple(b["a4"]), tuple(b["D"])),
            eval_config=self.eval_config(),
            strategy=o["strategy"],
            budget=o["budget"],
            grid_points=o["grid_points"],
            xatol=o["xatol"],
            fatol=o["fatol"],
        )

    def with_overrides(self, seed=None, out=None, workers=None):
        data = copy.deepcopy(self.data)
        if seed is not None:
            data["sampling"]["seed"] = int(seed)
        if out is not None:
            data["output"]["directory"] = str(out)
        if workers is not None:
            data["sampling"]["workers"] = int(workers)
        return RunConfig(normalize(data))

    def dump(self):
        return dump_yaml(self.data)

    def digest(self):
        """Hash of everything that can change results (worker count and output paths excluded)."""
        data = copy.deepcopy(self.data)
        data["sampling"].pop("workers")
        data.pop("output")
        return hashlib.sha256(dump_yaml(data).encode()).hexdigest()[:16]


def dump_yaml(data):
    return yaml.safe_dump(data, sort_keys=False, default_flow_style=None)


def parse_config(text):
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigError(str(exc).replace("\n", " "), kind="parse") from None
    return RunConfig(normalize(data))


def load_config(path):
    try:
        with open(path) as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(str(exc), str(path), kind="io") from None
    try:
        return parse_config(text)
    except ConfigError:
        raise
    except ErgoscopeError as exc:
        raise ConfigError(str(exc), kind="invariant") from None
