"""Declarative experiment configuration.

A config is a key-value tree (YAML or JSON).  Every section has a fixed set
of keys with defaults below; unknown keys are rejected so that typos never
silently fall back to a default.  The master ``seed`` has no default.

Schema (defaults in brackets)::

    kind            phase-diagram | correlations | trajectories | ipc |
                    ipc-vs-correlations | stationary-stats
    seed            master seed, required
    n_realizations  disorder realizations per cell [10]
    scale           desk (L = 10^4) | paper (L = 10^5) [desk]
    model           n_qubits [5], h [1.0], eps [0.0]
    regimes         list of disorder widths W [[0.0, 10.0]]
    run             delta_t [10.0], washout [1000], length [null: from scale],
                    readout_sigma [0.001], eta [50]
    encodings       list of input encodings [[mixed_z]]
    observables     list of {name, multiplex} [[{name: ZZ, multiplex: 1}]]
    noise           axes [[x, z]], p_grid [[0, 0.001, 0.005, 0.01, 0.05]],
                    reference_eta [50]: sub-step count at which p_grid is quoted
    ipc             d_max [6], stop_after [5], n_surrogates [20],
                    min_shift [100], n_sigma [3.0], max_delay [per degree]
    correlations    washout [500], window [100]
    phase_diagram   h, W [grid], realizations [100], coherence_realizations [10],
                    washout [1000], window [100], edge_fraction [0.1]
    trajectories    window [4], realization [0], cells [list of {W, axis, p_err}]
    stationary_stats steps [7000], p_grid [[0.0]], ipc_p_grid [[0.0, 0.005]]
"""

from __future__ import annotations

import copy
import hashlib
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .ipc import DEFAULT_MAX_DELAY
from .reservoir import ENCODINGS

KINDS = ("phase-diagram", "correlations", "trajectories", "ipc", "ipc-vs-correlations", "stationary-stats")
SCALES = {"desk": 10_000, "paper": 100_000}

DEFAULTS = {
    "kind": None,
    "seed": None,
    "n_realizations": 10,
    "scale": "desk",
    "model": {"n_qubits": 5, "h": 1.0, "eps": 0.0},
    "regimes": [0.0, 10.0],
    "run": {"delta_t": 10.0, "washout": 1000, "length": None, "readout_sigma": 0.001, "eta": 50},
    "encodings": ["mixed_z"],
    "observables": [{"name": "ZZ", "multiplex": 1}],
    "noise": {"axes": ["x", "z"], "p_grid": [0.0, 0.001, 0.005, 0.01, 0.05], "reference_eta": 50},
    "ipc": {
        "d_max": 6,
        "stop_after": 5,
        "n_surrogates": 20,
        "min_shift": 100,
        "n_sigma": 3.0,
        "max_delay": {str(k): v for k, v in DEFAULT_MAX_DELAY.items()},
    },
    "correlations": {"washout": 500, "window": 100},
    "phase_diagram": {
        "h": [round(0.1 * k, 10) for k in range(1, 21)],
        "W": [0.5 * k for k in range(21)],
        "realizations": 100,
        "coherence_realizations": 10,
        "washout": 1000,
        "window": 100,
        "edge_fraction": 0.1,
    },
    "trajectories": {
        "window": 4,
        "realization": 0,
        "cells": [
            {"W": 0.0, "axis": "none", "p_err": 0.0},
            {"W": 10.0, "axis": "none", "p_err": 0.0},
            {"W": 0.0, "axis": "x", "p_err": 0.05},
            {"W": 0.0, "axis": "z", "p_err": 0.05},
            {"W": 10.0, "axis": "x", "p_err": 0.05},
            {"W": 10.0, "axis": "z", "p_err": 0.05},
        ],
    },
    "stationary_stats": {"steps": 7000, "p_grid": [0.0], "ipc_p_grid": [0.0, 0.005]},
}

# sections whose value is a free-form dict or list and is not key-checked
_OPAQUE = {("ipc", "max_delay")}


class ConfigError(ValueError):
    pass


def _merge(default, given, path=()):
    if isinstance(default, dict) and path not in _OPAQUE:
        if not isinstance(given, dict):
            raise ConfigError(f"{'.'.join(path) or 'config'} must be a mapping")
        unknown = set(given) - set(default)
        if unknown:
            raise ConfigError(f"unknown key(s) in {'.'.join(path) or 'config'}: {sorted(unknown)}")
        out = copy.deepcopy(default)
        for k, v in given.items():
            out[k] = _merge(default[k], v, path + (k,))
        return out
    return copy.deepcopy(given)


@dataclass(frozen=True)
class ExperimentConfig:
    tree: dict

    def __getitem__(self, key):
        return self.tree[key]

    @property
    def kind(self) -> str:
        return self.tree["kind"]

    @property
    def seed(self) -> int:
        return int(self.tree["seed"])

    @property
    def length(self) -> int:
        """Rows per train and per test half of the readout."""
        L = self.tree["run"]["length"]
        return int(L) if L is not None else SCALES[self.tree["scale"]]

    def to_json(self) -> str:
        return json.dumps(self.tree, sort_keys=True)

    def config_hash(self) -> str:
        return hashlib.sha256(self.to_json().encode()).hexdigest()[:16]


def make_config(tree: dict | None = None, **overrides) -> ExperimentConfig:
    """Validate ``tree`` (plus top-level ``overrides``) against the schema."""
    given = dict(tree or {})
    for k, v in overrides.items():
        if v is not None:
            given[k] = v
    cfg = _merge(DEFAULTS, given)
    _validate(cfg)
    return ExperimentConfig(cfg)


def load_config(path: str | Path, **overrides) -> ExperimentConfig:
    path = Path(path)
    text = path.read_text(encoding="utf-8")
    if path.suffix == ".json":
        tree = json.loads(text)
    else:
        import yaml

        tree = yaml.safe_load(text)
    return make_config(tree or {}, **overrides)


def _validate(cfg: dict) -> None:
    if cfg["kind"] not in KINDS:
        raise ConfigError(f"kind must be one of {KINDS}, got {cfg['kind']!r}")
    if cfg["seed"] is None:
        raise ConfigError("a master seed is required")
    if not isinstance(cfg["seed"], (int, np.integer)) or cfg["seed"] < 0:
        raise ConfigError("seed must be a non-negative integer")
    if cfg["scale"] not in SCALES:
        raise ConfigError(f"scale must be one of {sorted(SCALES)}")
    if int(cfg["n_realizations"]) < 1:
        raise ConfigError("n_realizations must be >= 1")
    for enc in cfg["encodings"]:
        if enc not in ENCODINGS:
            raise ConfigError(f"unknown encoding {enc!r}")
    for obs in cfg["observables"]:
        if not isinstance(obs, dict) or set(obs) - {"name", "multiplex"} or "name" not in obs:
            raise ConfigError("each observables entry needs 'name' and optional 'multiplex'")
    for ax in cfg["noise"]["axes"]:
        if ax not in ("x", "z"):
            raise ConfigError(f"noise axis must be x or z, got {ax!r}")
    for p in cfg["noise"]["p_grid"]:
        if not 0.0 <= float(p) < 0.5:
            raise ConfigError("p_err values must lie in [0, 0.5)")
    for cell in cfg["trajectories"]["cells"]:
        if set(cell) != {"W", "axis", "p_err"}:
            raise ConfigError("trajectory cells need exactly W, axis and p_err")
