"""Run configuration: flat ``section.key = value`` files.

The format is the subset of TOML made of dotted keys, one per line::

    system.k_exp = 4
    system.V0 = 1.0
    drive.lambda = 0.05
    sweep.axis = "drive.lambda"

Every key is validated, and unknown keys are rejected, before any
computation starts.
"""

from __future__ import annotations

import hashlib
import sys
from dataclasses import dataclass, field
from typing import Any, Optional

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .revival import DriveParams
from .spectra import PowerLawSystem


class ConfigError(ValueError):
    """Invalid configuration; the message names the offending line or field."""


COUPLINGS = {
    "dipole": lambda z: z,
    "quadratic": lambda z: z * z,
}

# key -> (type, default); REQUIRED marks mandatory keys
REQUIRED = object()
SCHEMA: dict[str, tuple[type, Any]] = {
    "system.V0": (float, REQUIRED),
    "system.k_exp": (float, REQUIRED),
    "system.a": (float, 1.0),
    "system.mass": (float, 1.0),
    "system.hbar": (float, 1.0),
    "system.r": (float, 10.0),
    "drive.lambda": (float, 0.0),
    "drive.N": (int, 1),
    "drive.V": (object, "auto"),
    "drive.coupling": (str, "dipole"),
    "spectrum.n_levels": (int, 31),
    "spectrum.n_points": (int, 4096),
    "spectrum.method": (str, "fd"),
    "spectrum.rtol": (float, 1e-4),
    "times.spectrum": (str, "analytic"),
    "regime.weak_mu": (float, 0.1),
    "regime.weak_q": (float, 1.0),
    "regime.strong_q": (float, 1.0),
    "regime.strong_beta": (float, 0.1),
    "packet.n0": (float, None),
    "packet.width": (float, 1.0),
    "grid.n_points": (int, 2048),
    "grid.n_levels": (int, 40),
    "grid.dt": (float, None),
    "grid.extent": (float, 1.6),
    "grid.cap_factor": (float, 5.0),
    "simulate.t_end": (float, None),
    "simulate.sample_every": (int, 1),
    "simulate.frame": (str, "lab"),
    "sweep.axis": (str, None),
    "sweep.start": (float, None),
    "sweep.stop": (float, None),
    "sweep.count": (int, None),
    "mathieu.nu_start": (float, 0.0),
    "mathieu.nu_stop": (float, 3.0),
    "mathieu.nu_count": (int, 13),
    "mathieu.q_start": (float, 0.0),
    "mathieu.q_stop": (float, 10.0),
    "mathieu.q_count": (int, 21),
    "mathieu.method": (str, "tridiagonal"),
    "mathieu.branch": (str, "even"),
    "verify.tol_cl": (float, 0.05),
    "verify.tol_Q": (float, 0.10),
    "verify.threshold": (float, 0.7),
    "verify.frame_cl": (str, "auto"),
    "verify.identity_draws": (int, 0),
    "output.path": (str, None),
}

CHOICES = {
    "drive.coupling": tuple(COUPLINGS),
    "spectrum.method": ("fd", "fourier"),
    "times.spectrum": ("analytic", "numeric"),
    "simulate.frame": ("lab", "rotating"),
    "mathieu.method": ("tridiagonal", "contfrac"),
    "mathieu.branch": ("even", "odd"),
    "verify.frame_cl": ("auto", "lab", "rotating"),
}

POSITIVE = {"system.V0", "system.k_exp", "system.a", "system.mass", "system.hbar", "system.r",
            "spectrum.n_levels", "spectrum.n_points", "spectrum.rtol", "grid.n_points", "grid.n_levels",
            "grid.dt", "grid.extent", "grid.cap_factor", "simulate.t_end", "simulate.sample_every",
            "drive.N", "sweep.count", "mathieu.nu_count", "mathieu.q_count", "verify.tol_cl", "verify.tol_Q",
            "verify.threshold"}

# parameters a sweep may vary
SWEEPABLE = ("system.V0", "system.k_exp", "system.a", "system.mass", "system.hbar", "system.r",
             "drive.lambda", "drive.V")


def _flatten(table, prefix=""):
    out = {}
    for key, value in table.items():
        name = f"{prefix}{key}"
        if isinstance(value, dict):
            out.update(_flatten(value, name + "."))
        else:
            out[name] = value
    return out


def _line_of(text: str, key: str) -> Optional[int]:
    leaf = key.split(".")[-1]
    for i, line in enumerate(text.splitlines(), 1):
        stripped = line.split("#", 1)[0]
        if "=" in stripped and stripped.split("=", 1)[0].strip().endswith(leaf):
            return i
    return None


def _where(text, key):
    line = _line_of(text, key)
    return f"line {line}: {key}" if line else key


def _coerce(key, value, kind, text):
    if kind is object:
        return value
    if kind is float:
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(f"{_where(text, key)}: expected a number, got {value!r}")
        return float(value)
    if kind is int:
        if isinstance(value, bool) or not isinstance(value, int):
            raise ConfigError(f"{_where(text, key)}: expected an integer, got {value!r}")
        return value
    if not isinstance(value, str):
        raise ConfigError(f"{_where(text, key)}: expected a string, got {value!r}")
    return value


@dataclass
class RunConfig:
    values: dict
    sha256: str
    text: str = field(repr=False, default="")

    def __getitem__(self, key):
        return self.values[key]

    def system(self, overrides: Optional[dict] = None) -> PowerLawSystem:
        v = {**self.values, **(overrides or {})}
        return PowerLawSystem(V0=v["system.V0"], a=v["system.a"], k_exp=v["system.k_exp"],
                              mass=v["system.mass"], hbar=v["system.hbar"])

    def drive(self, V: Optional[float] = None) -> DriveParams:
        return DriveParams(lam=self["drive.lambda"], N=self["drive.N"], V=V,
                           coupling=COUPLINGS[self["drive.coupling"]])

    @property
    def n0(self) -> float:
        n0 = self["packet.n0"]
        return self["system.r"] if n0 is None else n0

    def sweep_points(self) -> list[Optional[float]]:
        axis = self["sweep.axis"]
        if axis is None:
            return [None]
        import numpy as np

        return [float(x) for x in np.linspace(self["sweep.start"], self["sweep.stop"], self["sweep.count"])]


def parse_config(text: str) -> RunConfig:
    """Parse and validate configuration text."""
    try:
        raw = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"parse error: {exc}") from None
    flat = _flatten(raw)
    unknown = sorted(set(flat) - set(SCHEMA))
    if unknown:
        raise ConfigError(f"{_where(text, unknown[0])}: unknown key")

    values = {}
    for key, (kind, default) in SCHEMA.items():
        if key not in flat:
            if default is REQUIRED:
                raise ConfigError(f"{key}: missing required field")
            values[key] = default
            continue
        value = _coerce(key, flat[key], kind, text)
        if key in CHOICES and value not in CHOICES[key]:
            raise ConfigError(f"{_where(text, key)}: must be one of {', '.join(CHOICES[key])}, got {value!r}")
        if key in POSITIVE and not value > 0:
            raise ConfigError(f"{_where(text, key)}: must be positive, got {value!r}")
        values[key] = value

    V = values["drive.V"]
    if V != "auto":
        if isinstance(V, bool) or not isinstance(V, (int, float)) or V < 0:
            raise ConfigError(f"{_where(text, 'drive.V')}: must be a non-negative number or \"auto\", got {V!r}")
        values["drive.V"] = float(V)
    if values["drive.lambda"] < 0:
        raise ConfigError(f"{_where(text, 'drive.lambda')}: must be non-negative")
    if values["packet.width"] < 0:
        raise ConfigError(f"{_where(text, 'packet.width')}: must be non-negative")
    n = values["grid.n_points"]
    if n < 256 or n & (n - 1):
        raise ConfigError(f"{_where(text, 'grid.n_points')}: must be a power of two >= 256, got {n}")

    sweep_keys = ("sweep.axis", "sweep.start", "sweep.stop", "sweep.count")
    given = [k for k in sweep_keys if values[k] is not None]
    if given and len(given) != 4:
        missing = [k for k in sweep_keys if values[k] is None]
        raise ConfigError(f"{missing[0]}: required when a sweep is configured")
    if given:
        if values["sweep.axis"] not in SWEEPABLE:
            raise ConfigError(f"{_where(text, 'sweep.axis')}: cannot sweep {values['sweep.axis']!r}; "
                              f"choose from {', '.join(SWEEPABLE)}")
        if not values["sweep.start"] < values["sweep.stop"]:
            raise ConfigError(f"{_where(text, 'sweep.stop')}: sweep range must be strictly increasing")
    for axis in ("nu", "q"):
        if not values[f"mathieu.{axis}_start"] <= values[f"mathieu.{axis}_stop"]:
            raise ConfigError(f"mathieu.{axis}_stop: range must be ordered")

    cfg = RunConfig(values=values, sha256=hashlib.sha256(text.encode()).hexdigest(), text=text)
    try:
        cfg.system()
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    return cfg


def load_config(path) -> RunConfig:
    try:
        with open(path, "rb") as fh:
            data = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}") from None
    try:
        text = data.decode("utf-8")
    except UnicodeDecodeError:
        raise ConfigError("config is not UTF-8 text") from None
    return parse_config(text)
