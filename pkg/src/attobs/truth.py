"""Ground-truth rigid-body trajectories and biased, noisy sensor streams.

The truth model is the rotation kinematics dR/dt = R skew(omega) with body
vectors alpha = R.T alpha_i and beta = R.T beta_i for inertial references
alpha_i, beta_i. Sensors deliver omega_m = omega + b + noise and the two body
vectors plus noise; the noise is the band-limited-white-noise convention of
simulation blocks, i.e. i.i.d. Gaussian samples of variance power / Ts held
over each sample interval Ts.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.typing import NDArray

from . import _kernels
from .signals import ZERO_SIGNAL, SignalSpec
from .so3 import rotate_exp

__all__ = [
    "TruthState",
    "TruthSignals",
    "NoiseSpec",
    "Measurement",
    "propagate_truth",
    "sample_sensors",
    "truth_trajectory",
    "noise_stream",
]


@dataclass(frozen=True)
class TruthState:
    """Truth at one instant: attitude, body rate, gyro bias and references."""

    t: float
    R: NDArray[np.float64]
    omega: NDArray[np.float64]
    b: NDArray[np.float64]
    alpha_i: NDArray[np.float64]
    beta_i: NDArray[np.float64]

    @property
    def alpha(self) -> NDArray[np.float64]:
        return self.R.T @ self.alpha_i

    @property
    def beta(self) -> NDArray[np.float64]:
        return self.R.T @ self.beta_i


@dataclass(frozen=True)
class TruthSignals:
    """Waveforms driving the truth: body rate, gyro bias, reference disturbance.

    beta_disturbance is added to the nominal beta_i; it models a "constant"
    inertial vector that in reality wanders (e.g. a disturbed magnetic field).
    """

    omega: SignalSpec = ZERO_SIGNAL
    bias: SignalSpec = ZERO_SIGNAL
    beta_disturbance: SignalSpec = ZERO_SIGNAL


@dataclass(frozen=True)
class NoiseSpec:
    """Sensor noise powers (band-limited white noise) and sample time."""

    sample_time: float = 1e-3
    power_alpha: float = 0.0
    power_beta: float = 0.0
    power_omega: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if self.sample_time <= 0:
            raise ValueError("sample_time must be > 0")
        if min(self.power_alpha, self.power_beta, self.power_omega) < 0:
            raise ValueError("noise powers must be >= 0")

    def stds(self) -> tuple[float, float, float]:
        """Per-axis standard deviations (alpha, beta, omega) of one sample."""
        ts = self.sample_time
        return (
            float(np.sqrt(self.power_alpha / ts)),
            float(np.sqrt(self.power_beta / ts)),
            float(np.sqrt(self.power_omega / ts)),
        )


@dataclass(frozen=True)
class Measurement:
    """One synchronized sensor sample."""

    t: float
    omega_m: NDArray[np.float64]
    alpha_m: NDArray[np.float64]
    beta_m: NDArray[np.float64]


def propagate_truth(
    state: TruthState,
    signals: TruthSignals,
    dt: float,
    beta_i_nominal=None,
) -> TruthState:
    """Advance the truth by dt.

    The attitude is advanced by the exact rotation step with the body rate
    evaluated at the step midpoint; omega, b and beta_i are re-evaluated from
    their waveforms at t + dt. beta_i_nominal defaults to the current beta_i
    minus the disturbance at t (i.e. a constant nominal reference).
    """
    if dt <= 0:
        raise ValueError("dt must be > 0")
    if beta_i_nominal is None:
        beta_i_nominal = state.beta_i - signals.beta_disturbance.evaluate(state.t)
    t1 = state.t + dt
    omega_mid = signals.omega.evaluate(state.t + 0.5 * dt)
    return TruthState(
        t=t1,
        R=rotate_exp(state.R, omega_mid, dt),
        omega=signals.omega.evaluate(t1),
        b=signals.bias.evaluate(t1),
        alpha_i=np.asarray(state.alpha_i, dtype=np.float64),
        beta_i=np.asarray(beta_i_nominal, dtype=np.float64)
        + signals.beta_disturbance.evaluate(t1),
    )


def sample_sensors(state: TruthState, noise: NoiseSpec, rng: np.random.Generator) -> Measurement:
    """Draw one noisy sensor sample at the state's time instant."""
    sa, sb, so = noise.stds()
    return Measurement(
        t=state.t,
        omega_m=state.omega + state.b + so * rng.standard_normal(3),
        alpha_m=state.alpha + sa * rng.standard_normal(3),
        beta_m=state.beta + sb * rng.standard_normal(3),
    )


def truth_trajectory(
    signals: TruthSignals,
    alpha_i,
    beta_i_nominal,
    duration: float,
    dt: float,
    R0=None,
) -> dict[str, NDArray[np.float64]]:
    """Generate the full truth over [0, duration] at step dt.

    Returns arrays keyed t (N,), R (N,3,3), omega, b, beta_i, alpha, beta
    (N,3 each) with N = floor(duration/dt) + 1. alpha/beta are the body-frame
    references R.T alpha_i and R.T beta_i(t).
    """
    if dt <= 0 or duration <= 0:
        raise ValueError("duration and dt must be > 0")
    alpha_i = np.asarray(alpha_i, dtype=np.float64)
    beta_i_nominal = np.asarray(beta_i_nominal, dtype=np.float64)
    n = int(np.floor(duration / dt + 1e-9))
    t = np.arange(n + 1) * dt
    omega = signals.omega.evaluate(t)
    b = signals.bias.evaluate(t)
    beta_i = beta_i_nominal + signals.beta_disturbance.evaluate(t)
    omega_mid = signals.omega.evaluate(t[:-1] + 0.5 * dt)
    R0 = np.eye(3) if R0 is None else np.asarray(R0, dtype=np.float64)
    R = _kernels.rotation_history(R0, np.ascontiguousarray(omega_mid), dt)
    alpha = np.einsum("kji,j->ki", R, alpha_i)
    beta = np.einsum("kji,kj->ki", R, beta_i)
    return {"t": t, "R": R, "omega": omega, "b": b, "beta_i": beta_i,
            "alpha": alpha, "beta": beta}


def noise_stream(noise: NoiseSpec, n: int) -> dict[str, NDArray[np.float64]]:
    """Pre-generate n noise samples per sensor, reproducibly from noise.seed.

    Draw order is fixed (alpha, beta, omega) so streams are bit-identical for
    a given spec.
    """
    rng = np.random.default_rng(noise.seed)
    sa, sb, so = noise.stds()
    return {
        "alpha": sa * rng.standard_normal((n, 3)),
        "beta": sb * rng.standard_normal((n, 3)),
        "omega": so * rng.standard_normal((n, 3)),
    }
