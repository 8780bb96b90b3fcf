"""Insertion-loss parameters and the total-loss model of an optical path.

The total loss of a path is the plain sum of five contributions: propagation
(dB/cm times length), same-layer crossings, same-layer drops, cross-layer drops
and vertical-coupler traversals.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, fields, replace
from pathlib import Path
from typing import Optional

from onoc_xbar.errors import MissingCoefficient

COEFFICIENTS = ("p_propagation", "p_crossing", "p_drop1", "p_drop2", "p_coupler")

# Typical multi-layer values used when a preset does not publish them:
# 1 dB cross-layer drop and 0.1 dB per optical via.
ML_DEFAULTS = {"p_drop2": 1.0, "p_coupler": 0.1}

# Drop values held fixed for break-even frontier studies.
FRONTIER_DROPS = {"p_drop1": 0.5, "p_drop2": 1.0, "p_coupler": 0.1}

_FILE_KEYS = {
    "p_propagation_db_per_cm": "p_propagation",
    "p_crossing_db": "p_crossing",
    "p_drop1_db": "p_drop1",
    "p_drop2_db": "p_drop2",
    "p_coupler_db": "p_coupler",
}


@dataclass(frozen=True)
class LossParams:
    """Per-event insertion-loss coefficients. ``None`` marks an unpublished value."""

    p_propagation: float
    p_crossing: float
    p_drop1: Optional[float] = None
    p_drop2: Optional[float] = None
    p_coupler: Optional[float] = None
    name: str = "custom"

    def __post_init__(self):
        for key in COEFFICIENTS:
            value = getattr(self, key)
            if value is None:
                if key in ("p_propagation", "p_crossing"):
                    raise ValueError(f"{key} is required")
                continue
            value = float(value)
            if not math.isfinite(value) or value < 0:
                raise ValueError(f"{key} must be finite and non-negative, got {value}")
            object.__setattr__(self, key, value)

    def coefficient(self, key: str) -> float:
        value = getattr(self, key)
        if value is None:
            raise MissingCoefficient(key, self.name)
        return value

    def with_overrides(self, **values) -> "LossParams":
        """Return a copy with the given coefficients replaced (``None`` values ignored)."""
        values = {k: v for k, v in values.items() if v is not None}
        unknown = set(values) - set(COEFFICIENTS) - {"name"}
        if unknown:
            raise ValueError(f"unknown coefficients: {sorted(unknown)}")
        return replace(self, **values)

    def with_defaults(self, defaults: dict = ML_DEFAULTS) -> "LossParams":
        """Fill absent coefficients from ``defaults``; published values are kept."""
        missing = {k: v for k, v in defaults.items() if getattr(self, k) is None}
        return replace(self, **missing) if missing else self

    def as_dict(self) -> dict:
        return {f.name: getattr(self, f.name) for f in fields(self)}


@dataclass(frozen=True)
class PathCharacteristics:
    """Counters describing one source-to-destination optical path."""

    length_cm: float = 0.0
    n_crossing: int = 0
    n_drop1: int = 0
    n_drop2: int = 0
    n_coupler: int = 0

    def __post_init__(self):
        if not (self.length_cm >= 0 and math.isfinite(self.length_cm)):
            raise ValueError(f"length must be finite and non-negative, got {self.length_cm}")
        for key in ("n_crossing", "n_drop1", "n_drop2", "n_coupler"):
            value = getattr(self, key)
            if int(value) != value or value < 0:
                raise ValueError(f"{key} must be a non-negative integer, got {value}")
            object.__setattr__(self, key, int(value))

    def __add__(self, other: "PathCharacteristics") -> "PathCharacteristics":
        return PathCharacteristics(
            self.length_cm + other.length_cm,
            self.n_crossing + other.n_crossing,
            self.n_drop1 + other.n_drop1,
            self.n_drop2 + other.n_drop2,
            self.n_coupler + other.n_coupler,
        )

    def counters(self) -> tuple:
        return (self.length_cm, self.n_crossing, self.n_drop1, self.n_drop2, self.n_coupler)


def compute_total_loss(path: PathCharacteristics, params: LossParams) -> float:
    """Total insertion loss in dB of ``path`` under ``params``.

    Terms with a zero counter are skipped, so a preset lacking a coefficient is
    usable as long as the path never needs it.
    """
    total = 0.0
    for key, count in zip(COEFFICIENTS, path.counters()):
        if count:
            total += params.coefficient(key) * count
    return total


_PRESETS = (
    LossParams(p_crossing=0.05, p_propagation=0.5, p_drop1=0.5, p_coupler=0.1, name="Biberman"),
    LossParams(p_crossing=0.05, p_propagation=1.0, p_drop2=1.0, name="Zhang"),
    LossParams(p_crossing=0.05, p_propagation=1.0, p_drop1=1.5, name="Pan"),
    LossParams(p_crossing=0.12, p_propagation=1.0, p_drop1=1.0, name="Kirman"),
    LossParams(p_crossing=0.2, p_propagation=0.1, p_drop1=1.5, name="Koka"),
)


def builtin_presets() -> list[LossParams]:
    """The five published insertion-loss parameter sets."""
    return list(_PRESETS)


def get_preset(name: str) -> LossParams:
    for preset in _PRESETS:
        if preset.name.lower() == name.lower():
            return preset
    raise KeyError(f"unknown preset {name!r}; choose from {[p.name for p in _PRESETS]}")


def load_params(path) -> LossParams:
    """Read a ``key=value`` parameter file. Blank lines and ``#`` comments are ignored."""
    values = {}
    name = Path(path).stem
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"{path}:{lineno}: expected key=value")
        key, value = (part.strip() for part in line.split("=", 1))
        if key == "name":
            name = value
        elif key in _FILE_KEYS:
            values[_FILE_KEYS[key]] = float(value)
        else:
            raise ValueError(f"{path}:{lineno}: unknown key {key!r}")
    for key in ("p_propagation", "p_crossing"):
        if key not in values:
            raise ValueError(f"{path}: {key} is required")
    return LossParams(name=name, **values)


def dump_params(params: LossParams) -> str:
    lines = [f"name={params.name}"]
    for file_key, attr in _FILE_KEYS.items():
        value = getattr(params, attr)
        if value is not None:
            lines.append(f"{file_key}={value!r}")
    return "\n".join(lines) + "\n"
