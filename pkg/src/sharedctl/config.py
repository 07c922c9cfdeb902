"""Scenario and population configuration.

Scenario files are flat YAML mappings; the same keys arrive as JSON when a
session is created over the network, so validation reports field-level
messages usable by both the CLI and the service.
"""

from __future__ import annotations

import math
import os
from typing import Any

import yaml

from .geometry import DEFAULT_SAMPLES, PathError, PathSpec, circle_path, load_path_file
from .operator import OperatorProfile, default_population
from .params import ControllerParams, ImpedanceParams, Mode, ParamError
from .session import Scenario, ScenarioError


class ConfigError(ValueError):
    """Invalid configuration; message names the offending field."""


_SCENARIO_KEYS = {
    "mode", "M", "B", "K_a", "w1", "w2", "C1", "C2", "lambda", "rho_min",
    "v_max", "filter_cutoff_hz", "dt", "activity_threshold_n", "gate_enabled",
    "imp.deadband", "imp.k_n", "imp.v_tangent",
    "loops", "discard_loops", "timeout_s", "plane_lock", "path",
}


def _parse_inline_circle(spec: str) -> PathSpec:
    kv = {}
    for tok in spec.split()[1:]:
        if "=" not in tok:
            raise ConfigError(f"path: bad circle token {tok!r}")
        k, v = tok.split("=", 1)
        kv[k.strip().lower()] = v.strip()
    try:
        center = tuple(float(c) for c in kv.get("center", "0,0,0").split(","))
        radius = float(kv.get("radius", "0.05"))
        n = int(kv.get("samples", str(DEFAULT_SAMPLES)))
        return circle_path(center, radius, kv.get("plane", "xy"),
                           kv.get("direction", "cw"), n)
    except (TypeError, ValueError, PathError) as exc:
        raise ConfigError(f"path: {exc}") from exc


def _resolve_path(value: Any, base_dir: str | None) -> PathSpec:
    if value is None:
        return circle_path()  # the standard 5 cm tracing circle
    if isinstance(value, PathSpec):
        return value
    if not isinstance(value, str):
        raise ConfigError("path: expected a file name or an inline 'circle ...' spec")
    if value.split()[0].lower() == "circle":
        return _parse_inline_circle(value)
    candidate = value if os.path.isabs(value) or base_dir is None \
        else os.path.join(base_dir, value)
    try:
        return load_path_file(candidate)
    except (OSError, PathError) as exc:
        raise ConfigError(f"path: {exc}") from exc


def scenario_from_dict(cfg: dict, base_dir: str | None = None) -> Scenario:
    """Build a validated Scenario from flat config keys."""
    if not isinstance(cfg, dict):
        raise ConfigError("scenario config must be a mapping")
    unknown = set(cfg) - _SCENARIO_KEYS
    if unknown:
        raise ConfigError(f"unknown keys: {', '.join(sorted(unknown))}")

    def num(key, default, kind=float):
        val = cfg.get(key, default)
        try:
            out = kind(val)
        except (TypeError, ValueError):
            raise ConfigError(f"{key}: expected {kind.__name__}, got {val!r}") from None
        if isinstance(out, float) and not math.isfinite(out):
            raise ConfigError(f"{key}: must be finite")
        return out

    mode_raw = str(cfg.get("mode", "shared")).lower()
    try:
        mode = Mode(mode_raw)
    except ValueError:
        raise ConfigError(
            f"mode: {mode_raw!r} is not one of "
            f"{[m.value for m in Mode]}") from None

    try:
        params = ControllerParams(
            M=cfg.get("M", 1.0),
            B=cfg.get("B", 83.3),
            K_a=cfg.get("K_a", 1.0),
            w=(num("w1", 0.5), num("w2", 0.5)),
            C=(num("C1", 1.0), num("C2", 1.0)),
            lam=num("lambda", 1.02),
            rho_min=num("rho_min", 0.015),
            v_max=num("v_max", 0.25),
            filter_cutoff=num("filter_cutoff_hz", 2.0),
            dt=num("dt", 0.001),
            activity_threshold=num("activity_threshold_n", 0.5),
            gate_enabled=bool(cfg.get("gate_enabled", True)),
        )
        imp = ImpedanceParams(
            deadband=num("imp.deadband", 0.001),
            k_n=num("imp.k_n", 100.0),
            v_tangent=num("imp.v_tangent", 0.003),
        )
    except ParamError as exc:
        raise ConfigError(str(exc)) from exc

    plane_lock = cfg.get("plane_lock", "z")
    if plane_lock in ("", "none", "null", False):
        plane_lock = None

    try:
        return Scenario(
            path=_resolve_path(cfg.get("path"), base_dir),
            mode=mode,
            params=params,
            imp=imp,
            loops_required=num("loops", 4, int),
            discard_loops=num("discard_loops", 1, int),
            timeout=num("timeout_s", 120.0),
            plane_lock=plane_lock,
        )
    except ScenarioError as exc:
        raise ConfigError(str(exc)) from exc


def load_scenario(path: str) -> Scenario:
    try:
        with open(path) as fh:
            cfg = yaml.safe_load(fh) or {}
    except OSError as exc:
        raise ConfigError(f"cannot read scenario file: {exc}") from exc
    except yaml.YAMLError as exc:
        raise ConfigError(f"{path}: invalid YAML: {exc}") from exc
    return scenario_from_dict(cfg, base_dir=os.path.dirname(os.path.abspath(path)))


_PROFILE_FIELDS = {
    "skill", "reaction_delay", "preview", "k_track", "f_max",
    "noise_std", "tremor_hz", "hand_penalty", "seed", "name",
}


def load_population(path: str) -> list[OperatorProfile]:
    """Load operator profiles; the literal name 'default' yields the
    built-in ten-operator cohort."""
    if path == "default":
        return default_population()
    try:
        with open(path) as fh:
            data = yaml.safe_load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read population file: {exc}") from exc
    except yaml.YAMLError as exc:
        raise ConfigError(f"{path}: invalid YAML: {exc}") from exc
    if not isinstance(data, dict) or "profiles" not in data:
        raise ConfigError(f"{path}: expected a top-level 'profiles' list")
    profiles = []
    for i, entry in enumerate(data["profiles"]):
        if not isinstance(entry, dict):
            raise ConfigError(f"profiles[{i}]: expected a mapping")
        unknown = set(entry) - _PROFILE_FIELDS
        if unknown:
            raise ConfigError(f"profiles[{i}]: unknown keys {sorted(unknown)}")
        try:
            profiles.append(OperatorProfile(**entry))
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"profiles[{i}]: {exc}") from exc
    if not profiles:
        raise ConfigError(f"{path}: no profiles defined")
    return profiles


def save_population(profiles: list[OperatorProfile], path: str) -> None:
    data = {"profiles": [
        {k: getattr(p, k) for k in
         ("name", "skill", "reaction_delay", "preview", "k_track", "f_max",
          "noise_std", "tremor_hz", "hand_penalty", "seed")}
        for p in profiles
    ]}
    with open(path, "w") as fh:
        yaml.safe_dump(data, fh, sort_keys=False)
