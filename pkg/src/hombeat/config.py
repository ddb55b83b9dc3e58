"""Run configuration: YAML file + command-line overrides.

Schema (every key optional; defaults shown)::

    state:
      detuning: 5.34        # in `unit`
      bandwidth: 0.253      # RMS bandwidth, in `unit`
      unit: thz             # thz (ordinary frequency) | rad_ps (angular)
      phi: 0.0              # rad
    channel:
      gamma: 0.0
      alpha: 1.0
    grid:                   # delay axis, ps
      tau_min: -1.0
      tau_max: 1.0
      points: 401
    fisher:
      n_trials: 10000
      ideal: false          # add ideal-interferometer overlay columns
      bracket: [0.0, 0.5]   # ps, used to locate the working point
    trials:
      n_events: 10000
      n_repetitions: 500
      seed: 12345
      tau_true: null        # ps; null -> Fisher-optimal point in fisher.bracket
      estimator: closed_form  # closed_form | numeric
      trials_per_point: 1000  # fringe simulation
    estimate:
      tau_s: null           # ps, coarse working position (required by `estimate`)
      slack: 0.05
    fiber:
      center_nm: 810.0
      lambda_s: null        # nm; null -> derived from detuning around center_nm
      lambda_i: null
      length_0: null        # m; null -> must be calibrated
      n_group_s: 1.45
      n_group_i: 1.45
      dn_dt: 1.0e-5
      dl_dt: 4.8e-7
      calibrate_coefficient: null    # rad/deg measured at calibrate_detuning_thz
      calibrate_detuning_thz: null   # null -> the state's detuning
    sweep:
      t_min: 0.0            # deg
      t_max: 30.0
      points: 121
      tau_s: 0.0            # ps, working point of the coincidence sweep
      delta_tau: null       # ps, delay precision for the resolution line
    output:
      path: null            # relative paths resolve under $HOMBEAT_OUTPUT_DIR
      json: false
      plot: null            # figure file written next to the table
"""

from __future__ import annotations

import copy
import math
import os
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Optional

import yaml

from .physics import BiphotonState, ChannelParams, angular_from_thz

OUTPUT_DIR_ENV = "HOMBEAT_OUTPUT_DIR"

DEFAULTS: dict[str, dict[str, Any]] = {
    "state": {"detuning": 5.34, "bandwidth": 0.253, "unit": "thz", "phi": 0.0},
    "channel": {"gamma": 0.0, "alpha": 1.0},
    "grid": {"tau_min": -1.0, "tau_max": 1.0, "points": 401},
    "fisher": {"n_trials": 10000, "ideal": False, "bracket": [0.0, 0.5]},
    "trials": {
        "n_events": 10000,
        "n_repetitions": 500,
        "seed": 12345,
        "tau_true": None,
        "estimator": "closed_form",
        "trials_per_point": 1000,
    },
    "estimate": {"tau_s": None, "slack": 0.05},
    "fiber": {
        "center_nm": 810.0,
        "lambda_s": None,
        "lambda_i": None,
        "length_0": None,
        "n_group_s": 1.45,
        "n_group_i": 1.45,
        "dn_dt": 1e-5,
        "dl_dt": 4.8e-7,
        "calibrate_coefficient": None,
        "calibrate_detuning_thz": None,
    },
    "sweep": {"t_min": 0.0, "t_max": 30.0, "points": 121, "tau_s": 0.0, "delta_tau": None},
    "output": {"path": None, "json": False, "plot": None},
}


class ConfigError(ValueError):
    pass


def _line_index(text: str) -> dict[tuple[str, ...], int]:
    """Map each key path in a YAML document to its 1-based line number."""
    lines: dict[tuple[str, ...], int] = {}

    def walk(node, path):
        if isinstance(node, yaml.MappingNode):
            for k, v in node.value:
                p = path + (str(k.value),)
                lines[p] = k.start_mark.line + 1
                walk(v, p)

    try:
        root = yaml.compose(text)
    except yaml.YAMLError:
        return lines
    if root is not None:
        walk(root, ())
    return lines


@dataclass
class RunConfig:
    values: dict
    source: Optional[str] = None
    lines: Optional[dict] = None

    def where(self, section: str, key: str) -> str:
        line = (self.lines or {}).get((section, key))
        loc = f"{self.source}:{line}: " if self.source and line else ""
        return f"{loc}{section}.{key}"

    def get(self, section: str, key: str):
        return self.values[section][key]

    def number(self, section: str, key: str, *, integer=False, positive=False, nonneg=False):
        v = self.get(section, key)
        if isinstance(v, bool) or not isinstance(v, (int, float)):
            raise ConfigError(f"{self.where(section, key)}: expected a number, got {v!r}")
        if integer and int(v) != v:
            raise ConfigError(f"{self.where(section, key)}: expected an integer, got {v!r}")
        if not math.isfinite(v):
            raise ConfigError(f"{self.where(section, key)}: must be finite")
        if positive and not v > 0:
            raise ConfigError(f"{self.where(section, key)}: must be > 0, got {v}")
        if nonneg and v < 0:
            raise ConfigError(f"{self.where(section, key)}: must be >= 0, got {v}")
        return int(v) if integer else float(v)

    def optional_number(self, section: str, key: str, **kw):
        return None if self.get(section, key) is None else self.number(section, key, **kw)

    def _angular(self, value: float) -> float:
        return angular_from_thz(value) if self.get("state", "unit") == "thz" else value

    @property
    def detuning_thz(self) -> float:
        d = self.number("state", "detuning")
        return d if self.get("state", "unit") == "thz" else d / (2.0 * math.pi)

    def state(self) -> BiphotonState:
        unit = self.get("state", "unit")
        if unit not in ("thz", "rad_ps"):
            raise ConfigError(f"{self.where('state', 'unit')}: must be 'thz' or 'rad_ps', got {unit!r}")
        delta = self._angular(self.number("state", "detuning"))
        sigma = self._angular(self.number("state", "bandwidth", positive=True))
        return BiphotonState(delta, sigma, self.number("state", "phi"))

    def channel(self) -> ChannelParams:
        g = self.number("channel", "gamma")
        a = self.number("channel", "alpha")
        if not 0 <= g < 1:
            raise ConfigError(f"{self.where('channel', 'gamma')}: must satisfy 0 <= gamma < 1, got {g}")
        if not 0 <= a <= 1:
            raise ConfigError(f"{self.where('channel', 'alpha')}: must satisfy 0 <= alpha <= 1, got {a}")
        return ChannelParams(g, a)

    def tau_grid(self):
        import numpy as np

        lo = self.number("grid", "tau_min")
        hi = self.number("grid", "tau_max")
        n = self.number("grid", "points", integer=True, positive=True)
        if not hi > lo:
            raise ConfigError(f"{self.where('grid', 'tau_max')}: must exceed grid.tau_min")
        if n < 2:
            raise ConfigError(f"{self.where('grid', 'points')}: need at least 2 points")
        return np.linspace(lo, hi, n)

    def bracket(self, section="fisher", key="bracket") -> tuple[float, float]:
        b = self.get(section, key)
        if not (isinstance(b, (list, tuple)) and len(b) == 2):
            raise ConfigError(f"{self.where(section, key)}: expected [lo, hi]")
        lo, hi = (float(x) for x in b)
        if not hi > lo:
            raise ConfigError(f"{self.where(section, key)}: hi must exceed lo")
        return lo, hi

    def validate(self):
        """Check every section that has a typed counterpart."""
        self.state()
        self.channel()
        self.tau_grid()
        self.bracket()
        self.number("fisher", "n_trials", positive=True)
        for key in ("n_events", "n_repetitions", "trials_per_point"):
            self.number("trials", key, integer=True, positive=True)
        seed = self.number("trials", "seed", integer=True, nonneg=True)
        if seed >= 2**64:
            raise ConfigError(f"{self.where('trials', 'seed')}: must fit in 64 bits")
        if self.get("trials", "estimator") not in ("closed_form", "numeric"):
            raise ConfigError(f"{self.where('trials', 'estimator')}: must be closed_form or numeric")
        self.optional_number("trials", "tau_true")
        self.optional_number("estimate", "tau_s")
        self.number("estimate", "slack", nonneg=True)
        return self

    def output_path(self) -> Optional[Path]:
        return _resolve_output(self.get("output", "path"))

    def plot_path(self) -> Optional[Path]:
        return _resolve_output(self.get("output", "plot"))


def _resolve_output(p) -> Optional[Path]:
    if p is None:
        return None
    path = Path(p)
    base = os.environ.get(OUTPUT_DIR_ENV)
    if base and not path.is_absolute():
        path = Path(base) / path
    return path


def load_config(path=None, overrides: Optional[dict] = None) -> RunConfig:
    """Merge defaults, an optional YAML file and ``{(section, key): value}`` overrides."""
    values = copy.deepcopy(DEFAULTS)
    lines = None
    source = None
    if path is not None:
        source = str(path)
        try:
            text = Path(path).read_text()
        except OSError as exc:
            raise ConfigError(f"{path}: cannot read config: {exc}") from exc
        try:
            data = yaml.safe_load(text) or {}
        except yaml.YAMLError as exc:
            raise ConfigError(f"{path}: invalid YAML: {exc}") from exc
        lines = _line_index(text)
        if not isinstance(data, dict):
            raise ConfigError(f"{path}: top level must be a mapping of sections")
        for section, body in data.items():
            if section not in values:
                raise ConfigError(f"{path}:{lines.get((str(section),), '?')}: unknown section {section!r}")
            if not isinstance(body, dict):
                raise ConfigError(f"{path}:{lines.get((section,), '?')}: section {section!r} must be a mapping")
            for key, v in body.items():
                if key not in values[section]:
                    raise ConfigError(
                        f"{path}:{lines.get((section, str(key)), '?')}: unknown key {section}.{key}"
                    )
                values[section][key] = v
    for (section, key), v in (overrides or {}).items():
        if v is not None:
            values[section][key] = v
    return RunConfig(values, source, lines)
