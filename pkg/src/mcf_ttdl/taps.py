"""Tap sets: the interchange format between delay engines and the filter core."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

UNIFORM_RTOL = 1e-3


@dataclass(frozen=True)
class TapSet:
    """Ordered (delay, amplitude) samples of the RF signal.

    Delays are in ps and strictly increasing; amplitudes are non-negative.
    ``labels`` records which core/wavelength produced each tap.
    """

    delays: tuple[float, ...]
    amplitudes: tuple[float, ...]
    labels: tuple[str, ...] = ()
    label: str = ""

    def __post_init__(self):
        d = tuple(float(x) for x in self.delays)
        a = tuple(float(x) for x in self.amplitudes)
        object.__setattr__(self, "delays", d)
        object.__setattr__(self, "amplitudes", a)
        if not d:
            raise ValueError("a TapSet needs at least one tap")
        if len(a) != len(d):
            raise ValueError("delays and amplitudes differ in length")
        if not all(map(math.isfinite, d + a)):
            raise ValueError("tap delays and amplitudes must be finite")
        if any(x < 0 for x in a):
            raise ValueError("tap amplitudes must be >= 0")
        if any(d1 <= d0 for d0, d1 in zip(d, d[1:])):
            raise ValueError("tap delays must be strictly increasing")
        labels = tuple(self.labels) or tuple(f"tap {k}" for k in range(len(d)))
        if len(labels) != len(d):
            raise ValueError("one label per tap required")
        object.__setattr__(self, "labels", labels)

    @classmethod
    def from_unsorted(cls, delays, amplitudes, labels=None, label=""):
        order = sorted(range(len(delays)), key=lambda k: delays[k])
        labels = labels if labels is not None else [f"tap {k}" for k in range(len(delays))]
        return cls(tuple(delays[k] for k in order), tuple(amplitudes[k] for k in order),
                   tuple(labels[k] for k in order), label)

    @classmethod
    def uniform(cls, n: int, spacing: float, amplitudes=None, offset: float = 0.0):
        amps = amplitudes if amplitudes is not None else [1.0] * n
        return cls(tuple(offset + k * spacing for k in range(n)), tuple(amps))

    def __len__(self) -> int:
        return len(self.delays)

    @property
    def taps(self) -> list[tuple[float, float]]:
        return list(zip(self.delays, self.amplitudes))

    def differences(self) -> np.ndarray:
        return np.diff(np.asarray(self.delays))

    def mean_spacing(self) -> float:
        if len(self) < 2:
            raise ValueError("spacing needs at least two taps")
        return (self.delays[-1] - self.delays[0]) / (len(self) - 1)

    def is_uniform(self, rtol: float = UNIFORM_RTOL) -> bool:
        """Adjacent delay differences spread by at most ``rtol`` of their mean."""
        if len(self) < 2:
            return False
        diffs = self.differences()
        return float(np.ptp(diffs)) <= rtol * abs(float(np.mean(diffs)))

    def shifted(self, offset: float) -> "TapSet":
        return TapSet(tuple(t + offset for t in self.delays), self.amplitudes,
                      self.labels, self.label)

    def scaled(self, factor: float) -> "TapSet":
        return TapSet(self.delays, tuple(a * factor for a in self.amplitudes),
                      self.labels, self.label)
