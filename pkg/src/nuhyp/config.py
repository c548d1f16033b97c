"""Experiment configuration: defaults, TOML loading, overrides and validation."""
from __future__ import annotations

import copy
import sys
from pathlib import Path

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .errors import ParameterError

DEFAULTS = {
    "seed": 12345,
    "output": "results",
    "pliss": {"A": 1.0, "c0": 0.0, "c1": 0.2, "c2": 0.5},
    "hyperbolicity": {"chi": 0.9624236501192069, "gamma": 0.3, "N": 1},
    "measure": {"family": "torus", "K": None},
    "budgets": {"arclength": 10.0, "tol": 1e-6, "h_max": 0.05, "h_min": 1e-9, "angle_min": 1e-3},
    "catmap": {
        "matrix": [[2, 1], [1, 1]],
        "q_max": 30,
        "classes_q_max": 5,
        "exponent_tol": 1e-10,
        "angle_tol": 1e-6,
        "eta": 0.05,
        "delta": 0.1,
        "domination_N_max": 20,
    },
    "blowup": {
        "matrix": [[2, 1], [1, 1]],
        "qs": [5, 11, 23, 47, 97],
        "radius": 0.1,
        "ratio_min": 0.8,
        "ratio_max": 1.25,
        "slope_tol": 1e-10,
        "eigen_tol": 1e-9,
        "conjugacy_tol": 1e-12,
        "conjugacy_points": 10000,
        "exponent_tol": 1e-10,
        "arclength": 50.0,
        "angle_min": 1e-3,
    },
    "figure8": {
        "M": 64,
        "T": 100000,
        "eps": [1e-2, 1e-3, 1e-4],
        "family": "cylinder",
        "K": None,
        "distance_max": 0.05,
        "exponent_eps": 1e-3,
        "exponent_max": 0.1,
        "drift_max": 1e-8,
        "det_tol": 1e-10,
        "symplectic_points": 1000,
        "y_range": [-1.5, 1.5],
        "domination_N_max": 20,
        "domination_sample": 2000,
        "warmup": 200,
    },
}


def _merge(base: dict, extra: dict) -> dict:
    out = copy.deepcopy(base)
    for k, v in extra.items():
        if isinstance(v, dict) and isinstance(out.get(k), dict):
            out[k] = _merge(out[k], v)
        else:
            out[k] = v
    return out


def _parse_value(text: str):
    """Parse an override value with TOML rules, falling back to a bare string."""
    try:
        return tomllib.loads(f"v = {text}")["v"]
    except tomllib.TOMLDecodeError:
        return text


def apply_override(cfg: dict, assignment: str) -> None:
    """Apply ``section.key=value`` in place."""
    if "=" not in assignment:
        raise ParameterError(f"override {assignment!r} is not of the form key=value")
    key, text = assignment.split("=", 1)
    parts = key.strip().split(".")
    node = cfg
    for p in parts[:-1]:
        node = node.setdefault(p, {})
        if not isinstance(node, dict):
            raise ParameterError(f"{key} does not name a config section")
    node[parts[-1]] = _parse_value(text.strip())


def _unknown_keys(cfg: dict, ref: dict, prefix: str = "") -> list:
    out = []
    for k, v in cfg.items():
        if k not in ref:
            out.append(prefix + k)
        elif isinstance(ref[k], dict):
            if not isinstance(v, dict):
                out.append(prefix + k)
            else:
                out += _unknown_keys(v, ref[k], f"{prefix}{k}.")
    return out


def validate(cfg: dict) -> dict:
    unknown = _unknown_keys(cfg, DEFAULTS)
    if unknown:
        raise ParameterError(f"unknown config keys: {', '.join(unknown)}")
    p = cfg["pliss"]
    if not p["A"] >= p["c2"] > p["c1"]:
        raise ParameterError("pliss: need A >= c2 > c1")
    if p["c0"] > p["c1"]:
        raise ParameterError("pliss: need c0 <= c1")
    h = cfg["hyperbolicity"]
    if not 0 < h["gamma"] < h["chi"]:
        raise ParameterError("hyperbolicity: need 0 < gamma < chi")
    if int(h["N"]) != h["N"] or h["N"] < 1:
        raise ParameterError("hyperbolicity: N must be a positive integer")
    b = cfg["budgets"]
    if not (b["arclength"] > 0 and b["tol"] > 0 and 0 < b["h_min"] < b["h_max"] and b["angle_min"] > 0):
        raise ParameterError("budgets: need arclength, tol, angle_min > 0 and 0 < h_min < h_max")
    bl = cfg["blowup"]
    if not 0 < bl["ratio_min"] <= 1 <= bl["ratio_max"]:
        raise ParameterError("blowup: need 0 < ratio_min <= 1 <= ratio_max")
    if sorted(bl["qs"]) != list(bl["qs"]) or not bl["qs"]:
        raise ParameterError("blowup: qs must be a nonempty increasing list")
    f8 = cfg["figure8"]
    if any(not 0 < e < 1 for e in f8["eps"]):
        raise ParameterError("figure8: every eps must lie in (0, 1)")
    if int(f8["T"]) != f8["T"] or f8["T"] < 1 or int(f8["M"]) != f8["M"] or f8["M"] < 1:
        raise ParameterError("figure8: T and M must be positive integers")
    if cfg["catmap"]["q_max"] < 1 or cfg["catmap"]["classes_q_max"] < 1:
        raise ParameterError("catmap: q_max and classes_q_max must be >= 1")
    return cfg


def load_config(path: str | Path | None = None, overrides=()) -> dict:
    """Defaults, then the TOML file, then ``key=value`` overrides; validated."""
    cfg = copy.deepcopy(DEFAULTS)
    if path is not None:
        with open(path, "rb") as fh:
            try:
                cfg = _merge(cfg, tomllib.load(fh))
            except tomllib.TOMLDecodeError as exc:
                raise ParameterError(f"{path}: {exc}") from None
    for item in overrides:
        apply_override(cfg, item)
    return validate(cfg)
