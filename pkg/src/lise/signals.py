"""Deterministic scalar signal specifications for scenario inputs.

Each spec turns into a sequence ``value[0..count-1]``; signals are zero
outside their active window.  ``Samples`` shorter than the requested count
are zero-padded at the end.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence, Union

import numpy as np

from .errors import InvalidInputError

__all__ = ["Step", "Ramp", "SquareWave", "Constant", "Samples", "SignalSpec",
           "sample_signal", "sample_signals"]


def _check_window(k_on: int, k_off: int):
    if k_on > k_off:
        raise InvalidInputError(f"signal window must satisfy k_on <= k_off, got [{k_on}, {k_off}]")


@dataclass(frozen=True)
class Step:
    """Constant amplitude on [k_on, k_off], zero elsewhere."""

    amplitude: float
    k_on: int
    k_off: int

    def __post_init__(self):
        _check_window(self.k_on, self.k_off)
        if not np.isfinite(self.amplitude):
            raise InvalidInputError("step amplitude must be finite")

    def at(self, k: int) -> float:
        return self.amplitude if self.k_on <= k <= self.k_off else 0.0


@dataclass(frozen=True)
class Ramp:
    """Linear growth ``slope * (k - k_on)`` on [k_on, k_off], zero elsewhere."""

    slope: float
    k_on: int
    k_off: int

    def __post_init__(self):
        _check_window(self.k_on, self.k_off)
        if not np.isfinite(self.slope):
            raise InvalidInputError("ramp slope must be finite")

    def at(self, k: int) -> float:
        return self.slope * (k - self.k_on) if self.k_on <= k <= self.k_off else 0.0


@dataclass(frozen=True)
class SquareWave:
    """Alternating +/- amplitude on [k_on, k_off], switching every half_period
    steps, starting positive at k_on."""

    amplitude: float
    half_period: int
    k_on: int
    k_off: int

    def __post_init__(self):
        _check_window(self.k_on, self.k_off)
        if self.half_period < 1:
            raise InvalidInputError("square wave half_period must be >= 1")
        if not np.isfinite(self.amplitude):
            raise InvalidInputError("square wave amplitude must be finite")

    def at(self, k: int) -> float:
        if not (self.k_on <= k <= self.k_off):
            return 0.0
        phase = (k - self.k_on) // self.half_period
        return self.amplitude if phase % 2 == 0 else -self.amplitude


@dataclass(frozen=True)
class Constant:
    value: float

    def __post_init__(self):
        if not np.isfinite(self.value):
            raise InvalidInputError("constant value must be finite")

    def at(self, k: int) -> float:
        return self.value


@dataclass(frozen=True)
class Samples:
    """Explicit sequence; indices beyond the end read as zero."""

    values: tuple

    def __init__(self, values: Sequence[float]):
        arr = tuple(float(v) for v in values)
        if any(not np.isfinite(v) for v in arr):
            raise InvalidInputError("sample values must be finite")
        object.__setattr__(self, "values", arr)

    def at(self, k: int) -> float:
        return self.values[k] if 0 <= k < len(self.values) else 0.0


SignalSpec = Union[Step, Ramp, SquareWave, Constant, Samples]


def sample_signal(spec: SignalSpec, count: int) -> np.ndarray:
    return np.array([spec.at(k) for k in range(count)], dtype=float)


def sample_signals(specs: Sequence[SignalSpec], count: int) -> np.ndarray:
    """Stack several specs into a (count, len(specs)) array; empty spec list
    yields a (count, 0) array."""
    if not specs:
        return np.zeros((count, 0))
    return np.column_stack([sample_signal(s, count) for s in specs])
