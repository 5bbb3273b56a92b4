"""Deterministic per-axis waveform descriptions for rates, biases and disturbances."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from numpy.typing import NDArray

__all__ = ["SignalSpec", "ZERO_SIGNAL"]


@dataclass(frozen=True)
class SignalSpec:
    """Three-axis signal: offset + ramp + sum of sinusoids, optionally windowed.

    Per axis the value is ``offset + ramp * t + sum_j amp_j * sin(2 pi f_j t
    + phase_j)``. If a window (t_start, t_end) is set, the signal is zero
    outside it (inclusive bounds); this is how additive disturbances are
    confined to an interval.

    sinusoids is a 3-element sequence (one per axis) of lists of
    (amplitude, frequency_hz, phase_rad) terms.
    """

    offset: tuple[float, float, float] = (0.0, 0.0, 0.0)
    ramp: tuple[float, float, float] = (0.0, 0.0, 0.0)
    sinusoids: tuple[tuple[tuple[float, float, float], ...], ...] = ((), (), ())
    window: tuple[float, float] | None = None

    def __post_init__(self):
        if len(self.offset) != 3 or len(self.ramp) != 3 or len(self.sinusoids) != 3:
            raise ValueError("offset, ramp and sinusoids must have one entry per axis")
        for axis_terms in self.sinusoids:
            for term in axis_terms:
                if len(term) != 3:
                    raise ValueError("sinusoid terms are (amplitude, frequency, phase)")
                if term[1] < 0:
                    raise ValueError("sinusoid frequency must be >= 0")
        if self.window is not None and not self.window[0] <= self.window[1]:
            raise ValueError("window must satisfy t_start <= t_end")

    def evaluate(self, t) -> NDArray[np.float64]:
        """Signal value at time(s) t; shape (3,) for scalar t, else (n, 3)."""
        t = np.asarray(t, dtype=np.float64)
        scalar = t.ndim == 0
        t = np.atleast_1d(t)
        out = np.zeros((t.shape[0], 3))
        for axis in range(3):
            v = self.offset[axis] + self.ramp[axis] * t
            for amp, freq, phase in self.sinusoids[axis]:
                v = v + amp * np.sin(2.0 * np.pi * freq * t + phase)
            out[:, axis] = v
        if self.window is not None:
            t0, t1 = self.window
            out[(t < t0) | (t > t1)] = 0.0
        return out[0] if scalar else out

    @property
    def is_zero(self) -> bool:
        return (
            self.offset == (0.0, 0.0, 0.0)
            and self.ramp == (0.0, 0.0, 0.0)
            and all(len(terms) == 0 for terms in self.sinusoids)
        )


ZERO_SIGNAL = SignalSpec()
