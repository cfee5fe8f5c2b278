"""Run configuration: defaults, file parsing, and validation.

Config files are flat ``key = value`` text. Keys use dotted lowercase
names (``task.dim``, ``pid.alpha``); ``#`` starts a comment. Values on
the command line override values from the file.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, fields
from pathlib import Path

from fedsim.aggregation import DEFAULT_CW_ALPHA, DEFAULT_PID_COEFFS, DEFAULT_WINDOW, STRATEGIES
from fedsim.errors import ConfigError
from fedsim.selection import MODE_POISSON_DROPOUT, SELECTION_MODES
from fedsim.sim import TASK_KINDS, TASK_LEAST_SQUARES

DEFAULT_SEED = 1234

# Config-file key -> dataclass field. Argparse flags reuse the same
# spellings with dots swapped for dashes.
KEY_TO_FIELD = {
    "task.kind": "task_kind",
    "task.dim": "dim",
    "task.client_shift": "client_shift",
    "task.noise_sigma": "noise_sigma",
    "clients": "clients",
    "lambda": "lam",
    "strategy": "strategy",
    "cw.alpha": "cw_alpha",
    "pid.alpha": "alpha",
    "pid.beta": "beta",
    "pid.gamma": "gamma",
    "pid.window": "window",
    "pid.k_abs": "k_abs",
    "selection.mode": "selection_mode",
    "selection.full_participation_period": "full_participation_period",
    "rounds": "rounds",
    "epochs": "epochs",
    "lr": "lr",
    "seed": "seed",
    "out_dir": "out_dir",
    "patience": "patience",
    "tol": "tol",
}
FIELD_TO_KEY = {v: k for k, v in KEY_TO_FIELD.items()}


@dataclass
class SimulationConfig:
    task_kind: str = TASK_LEAST_SQUARES
    dim: int = 8
    client_shift: float = 0.0
    noise_sigma: float = 0.1
    clients: int = 8
    lam: float = 20.0
    strategy: str = "fedpidavg"
    cw_alpha: float = DEFAULT_CW_ALPHA
    alpha: float = DEFAULT_PID_COEFFS[0]
    beta: float = DEFAULT_PID_COEFFS[1]
    gamma: float = DEFAULT_PID_COEFFS[2]
    window: int = DEFAULT_WINDOW
    k_abs: bool = False
    selection_mode: str = MODE_POISSON_DROPOUT
    full_participation_period: int = 5
    rounds: int = 50
    epochs: int = 1
    lr: float = 0.1
    seed: int = DEFAULT_SEED
    out_dir: str | None = None
    patience: int = 10
    tol: float = 1e-6

    def validate(self) -> "SimulationConfig":
        def bad(field_name: str, message: str) -> ConfigError:
            return ConfigError(f"{FIELD_TO_KEY[field_name]}: {message}")

        if self.task_kind not in TASK_KINDS:
            raise bad("task_kind", f"unknown task {self.task_kind!r}; expected one of {TASK_KINDS}")
        if self.dim < 1:
            raise bad("dim", f"must be >= 1, got {self.dim}")
        if self.client_shift < 0 or not math.isfinite(self.client_shift):
            raise bad("client_shift", f"must be a finite value >= 0, got {self.client_shift!r}")
        if self.noise_sigma < 0 or not math.isfinite(self.noise_sigma):
            raise bad("noise_sigma", f"must be a finite value >= 0, got {self.noise_sigma!r}")
        if self.clients < 1:
            raise bad("clients", f"must be >= 1, got {self.clients}")
        if not (math.isfinite(self.lam) and self.lam > 0):
            raise bad("lam", f"must be positive, got {self.lam!r}")
        if self.strategy not in STRATEGIES:
            raise bad("strategy", f"unknown strategy {self.strategy!r}; expected one of {STRATEGIES}")
        if not (0.0 <= self.cw_alpha <= 1.0):
            raise bad("cw_alpha", f"must be in [0, 1], got {self.cw_alpha}")
        for name in ("alpha", "beta", "gamma"):
            value = getattr(self, name)
            if not (0.0 <= value <= 1.0):
                raise bad(name, f"must be in [0, 1], got {value}")
        if abs(self.alpha + self.beta + self.gamma - 1.0) > 1e-12:
            raise ConfigError(
                "pid.alpha/pid.beta/pid.gamma: must sum to 1, got "
                f"{self.alpha} + {self.beta} + {self.gamma} = "
                f"{self.alpha + self.beta + self.gamma!r}"
            )
        if self.window < 1:
            raise bad("window", f"must be >= 1, got {self.window}")
        if self.selection_mode not in SELECTION_MODES:
            raise bad(
                "selection_mode",
                f"unknown mode {self.selection_mode!r}; expected one of {SELECTION_MODES}",
            )
        if self.full_participation_period < 1:
            raise bad(
                "full_participation_period",
                f"must be >= 1, got {self.full_participation_period}",
            )
        if self.rounds < 0:
            raise bad("rounds", f"must be >= 0, got {self.rounds}")
        if self.epochs < 0:
            raise bad("epochs", f"must be >= 0, got {self.epochs}")
        if not (math.isfinite(self.lr) and self.lr > 0):
            raise bad("lr", f"must be positive, got {self.lr!r}")
        if self.patience < 0:
            raise bad("patience", f"must be >= 0, got {self.patience}")
        if self.tol < 0 or not math.isfinite(self.tol):
            raise bad("tol", f"must be a finite value >= 0, got {self.tol!r}")
        return self


_FIELD_TYPES = {f.name: f.type for f in fields(SimulationConfig)}

_TRUE_WORDS = {"true", "1", "yes", "on"}
_FALSE_WORDS = {"false", "0", "no", "off"}


def _coerce(key: str, field_name: str, raw: str):
    kind = _FIELD_TYPES[field_name]
    text = raw.strip()
    try:
        if kind == "bool":
            low = text.lower()
            if low in _TRUE_WORDS:
                return True
            if low in _FALSE_WORDS:
                return False
            raise ValueError(f"not a boolean: {text!r}")
        if kind == "int":
            return int(text)
        if kind == "float":
            return float(text)
        return text
    except ValueError as exc:
        raise ConfigError(f"{key}: {exc}") from None


def parse_config(path: str | Path | None = None, overrides: dict | None = None) -> SimulationConfig:
    """Build a validated config from an optional file plus overrides.

    ``overrides`` maps dataclass field names to already-typed values
    (typically what argparse produced); ``None`` values are ignored.
    """
    values: dict = {}
    if path is not None:
        text = Path(path).read_text(encoding="utf-8")
        for lineno, line in enumerate(text.splitlines(), start=1):
            stripped = line.split("#", 1)[0].strip()
            if not stripped:
                continue
            if "=" not in stripped:
                raise ConfigError(f"{path}:{lineno}: expected 'key = value', got {line.strip()!r}")
            key, raw = (part.strip() for part in stripped.split("=", 1))
            if key not in KEY_TO_FIELD:
                raise ConfigError(f"{path}:{lineno}: unknown key {key!r}")
            values[KEY_TO_FIELD[key]] = _coerce(key, KEY_TO_FIELD[key], raw)
    if overrides:
        for field_name, value in overrides.items():
            if field_name not in _FIELD_TYPES:
                raise ConfigError(f"unknown config field {field_name!r}")
            if value is not None:
                values[field_name] = value
    return SimulationConfig(**values).validate()
