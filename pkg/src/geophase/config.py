"""YAML experiment configuration: schema, defaults and validation.

Schema (every key optional)::

    system:
      preset: phase | algorithms      # default chosen by the experiment
      labels: [13C, 1H]
      offsets_hz: [0, 0]
      j_hz: 210
      gamma_weights: [1, 4]
    backend:
      kind: ideal | shaped
      duration_s: 0.0132
      shape: gaussian | <two-column file: time_fraction amplitude>
      n_slices: 4096
      truncation: 2.5
      refocus: true                   # algorithms on the shaped backend
      calibrate: true
    experiment:
      phi: [0, 0.3927, ...]           # or {start, stop, n}
      theta: 4.71238898
      circuit: slice | triangle       # bloch experiments
      tau_s: null                     # echo period, default 1/(2J) steps
      n_samples: 400
    readout:
      n_points: 1000
      dwell_s: 0.001
      t2_s: null
    output_dir: geophase-out
    seed: 0
"""

from __future__ import annotations

import copy
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np
import yaml

from .algos import DJ_TABLES
from .gates import BASIS_LABELS
from .prep import GAMMA_WEIGHTS
from .pulse import MIN_SLICES, Backend, check_slicing, load_envelope
from .spinsys import SpinSystem, SpinSystemError, build_system, transition_frequencies

OUTPUT_ENV = "GEOPHASE_OUTPUT_DIR"

EXPERIMENTS = (
    ["sweep-slice", "sweep-triangle"]
    + [f"dj:{f}" for f in DJ_TABLES]
    + [f"grover:{x}" for x in BASIS_LABELS]
    + ["bloch:slice", "bloch:triangle"]
)

DEFAULTS: dict[str, Any] = {
    "system": {
        "preset": None,
        "labels": None,
        "offsets_hz": None,
        "j_hz": 210.0,
        "gamma_weights": None,
    },
    "backend": {
        "kind": "ideal",
        "duration_s": 13.2e-3,
        "shape": "gaussian",
        "n_slices": 4096,
        "truncation": 2.5,
        "refocus": True,
        "calibrate": True,
    },
    "experiment": {
        "phi": {"start": 0.0, "stop": float(np.pi), "n": 9},
        "theta": float(3 * np.pi / 2),
        "circuit": "slice",
        "tau_s": None,
        "n_samples": 400,
    },
    "readout": {"n_points": 1000, "dwell_s": 1e-3, "t2_s": None},
    "output_dir": "geophase-out",
    "seed": 0,
}

PRESET_LABELS = {"phase": ["13C", "1H"], "algorithms": ["1H", "13C"]}


class ConfigError(ValueError):
    pass


def _merge(base: dict, extra: dict, path: str, problems: list[str]) -> dict:
    out = copy.deepcopy(base)
    for key, value in extra.items():
        where = f"{path}{key}"
        if key not in base:
            problems.append(f"unknown key '{where}'")
            continue
        if isinstance(base[key], dict) and key != "phi":
            if not isinstance(value, dict):
                problems.append(f"'{where}' must be a mapping")
                continue
            out[key] = _merge(base[key], value, where + ".", problems)
        else:
            out[key] = value
    return out


@dataclass
class ExperimentConfig:
    data: dict
    source: Path | None = None
    problems: list[str] = field(default_factory=list)

    def section(self, name: str) -> dict:
        return self.data[name]

    @property
    def output_dir(self) -> Path:
        return Path(os.environ.get(OUTPUT_ENV) or self.data["output_dir"])

    def phis(self) -> np.ndarray:
        spec = self.data["experiment"]["phi"]
        if isinstance(spec, dict):
            return np.linspace(float(spec.get("start", 0.0)), float(spec.get("stop", np.pi)), int(spec.get("n", 9)))
        return np.array([float(v) for v in spec])

    def system(self, experiment: str | None = None) -> SpinSystem:
        s = self.data["system"]
        preset = s["preset"] or ("algorithms" if experiment and experiment.split(":")[0] in ("dj", "grover") else "phase")
        labels = s["labels"] or PRESET_LABELS[preset]
        offsets = s["offsets_hz"] or [0.0] * len(labels)
        couplings = {(0, 1): float(s["j_hz"])} if len(labels) > 1 else {}
        return build_system(list(labels), offsets=[float(v) for v in offsets], couplings=couplings)

    def gamma_weights(self) -> tuple[float, ...] | None:
        w = self.data["system"]["gamma_weights"]
        return None if w is None else tuple(float(v) for v in w)

    def backend(self) -> Backend:
        b = self.data["backend"]
        if b["kind"] == "ideal":
            return Backend()
        envelope = None
        if b["shape"] not in (None, "gaussian"):
            path = Path(b["shape"])
            if not path.is_absolute() and self.source is not None:
                path = self.source.parent / path
            envelope = tuple(load_envelope(path))
        return Backend("shaped", float(b["duration_s"]), int(b["n_slices"]), float(b["truncation"]), envelope)


def load_config(path: str | Path | None) -> ExperimentConfig:
    """Read a YAML file (or use defaults when ``path`` is None) and merge it with the defaults."""
    raw: Any = {}
    source = None
    if path is not None:
        source = Path(path)
        try:
            raw = yaml.safe_load(source.read_text()) or {}
        except OSError as exc:
            raise ConfigError(f"cannot read config: {exc}") from None
        except yaml.YAMLError as exc:
            raise ConfigError(f"invalid YAML: {exc}") from None
    if not isinstance(raw, dict):
        raise ConfigError("config must be a mapping at the top level")
    problems: list[str] = []
    data = _merge(DEFAULTS, raw, "", problems)
    return ExperimentConfig(data, source, problems)


def _number(value, name, problems, positive=False, integer=False):
    try:
        v = int(value) if integer else float(value)
    except (TypeError, ValueError):
        problems.append(f"{name} must be a number, got {value!r}")
        return None
    if integer and float(value) != v:
        problems.append(f"{name} must be an integer")
        return None
    if not np.isfinite(v):
        problems.append(f"{name} must be finite")
        return None
    if positive and v <= 0:
        problems.append(f"{name} must be positive")
        return None
    return v


def validate_config(cfg: ExperimentConfig, experiment: str | None = None) -> list[str]:
    """All problems preventing a run; empty when the config is runnable."""
    problems = list(cfg.problems)
    d = cfg.data
    if experiment is not None and experiment not in EXPERIMENTS:
        problems.append(f"unknown experiment '{experiment}'")

    s = d["system"]
    if s["preset"] is not None and s["preset"] not in PRESET_LABELS:
        problems.append(f"system.preset must be one of {sorted(PRESET_LABELS)}")
    j = _number(s["j_hz"], "system.j_hz", problems)
    system = None
    try:
        if s["preset"] in (None, *PRESET_LABELS):
            system = cfg.system(experiment)
    except (SpinSystemError, TypeError, ValueError) as exc:
        problems.append(f"system: {exc}")
    if system is not None:
        if system.n_spins != 2:
            problems.append("experiments need exactly two spins")
        w = s["gamma_weights"]
        if w is None:
            missing = [lab for lab in system.labels if lab not in GAMMA_WEIGHTS]
            if missing:
                problems.append(f"system.gamma_weights required for nuclei {missing}")
        elif len(w) != system.n_spins or any((_number(v, "gamma weight", problems) or 0) <= 0 for v in w):
            problems.append("system.gamma_weights must hold one positive weight per spin")
    if j == 0:
        problems.append("system.j_hz = 0: the 1/(2J) preparation delay is undefined")

    b = d["backend"]
    if b["kind"] not in ("ideal", "shaped"):
        problems.append(f"backend.kind must be 'ideal' or 'shaped', got {b['kind']!r}")
    n_slices = _number(b["n_slices"], "backend.n_slices", problems, positive=True, integer=True)
    duration = _number(b["duration_s"], "backend.duration_s", problems, positive=True)
    truncation = _number(b["truncation"], "backend.truncation", problems, positive=True)
    for flag in ("refocus", "calibrate"):
        if not isinstance(b[flag], bool):
            problems.append(f"backend.{flag} must be true or false")
    if b["kind"] == "shaped" and None not in (n_slices, duration, truncation):
        if system is not None:
            problems.extend(f"backend: {p}" for p in check_slicing(system, duration, n_slices, np.pi, truncation))
        elif n_slices < MIN_SLICES:
            problems.append(f"backend.n_slices={n_slices} is below the minimum of {MIN_SLICES}")
        if b["shape"] not in (None, "gaussian"):
            path = Path(b["shape"])
            if not path.is_absolute() and cfg.source is not None:
                path = cfg.source.parent / path
            if not path.exists():
                problems.append(f"backend.shape file {str(path)!r} not found")

    e = d["experiment"]
    try:
        phis = cfg.phis()
        if len(phis) == 0:
            problems.append("experiment.phi grid is empty")
        elif not np.all(np.isfinite(phis)):
            problems.append("experiment.phi values must be finite")
    except (TypeError, ValueError):
        problems.append("experiment.phi must be a list of numbers or {start, stop, n}")
    _number(e["theta"], "experiment.theta", problems)
    if e["circuit"] not in ("slice", "triangle"):
        problems.append("experiment.circuit must be 'slice' or 'triangle'")
    if e["tau_s"] is not None:
        _number(e["tau_s"], "experiment.tau_s", problems, positive=True)
    n_samples = _number(e["n_samples"], "experiment.n_samples", problems, positive=True, integer=True)
    if n_samples is not None and n_samples < 3:
        problems.append("experiment.n_samples must be at least 3")

    r = d["readout"]
    n_points = _number(r["n_points"], "readout.n_points", problems, positive=True, integer=True)
    if n_points is not None and n_points < 2:
        problems.append("readout.n_points must be at least 2")
    dwell = _number(r["dwell_s"], "readout.dwell_s", problems, positive=True)
    if r["t2_s"] is not None:
        _number(r["t2_s"], "readout.t2_s", problems, positive=True)
    if dwell is not None and system is not None:
        nyq = 0.5 / dwell
        for spin in range(system.n_spins):
            for _, f in transition_frequencies(system, spin):
                if abs(f) >= nyq:
                    problems.append(f"readout: line at {f:g} Hz exceeds the Nyquist limit {nyq:g} Hz")
                    break
    _number(d["seed"], "seed", problems, integer=True)
    return problems
