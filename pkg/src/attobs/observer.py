"""Geometry-free attitude/bias observer.

The estimator state (alpha_hat, beta_hat, b_hat) lives in R^9; no projection
or normalization is ever applied. Continuous-time dynamics, per measurement
channel v with gains (k, l):

    d v_hat / dt = v_hat x (omega_m - b_hat) - k (v_hat - v_m)      (filtered)
    d b_hat / dt = sum over channels of  l * (v_hat x v_m)

The "linear" injection variant replaces v_hat x (omega_m - b_hat) by
v_hat x omega_m - v_m x b_hat, which makes the error dynamics linear in the
measured signals. Gains may be positive scalars or symmetric positive-definite
3x3 matrices. The observer never uses the inertial reference vectors; they
enter only in downstream attitude reconstruction.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.typing import NDArray

from . import _kernels
from .truth import Measurement

__all__ = [
    "ObserverState",
    "Gains",
    "VectorChannel",
    "gain_matrix",
    "observer_derivative",
    "observer_step",
    "observer_step_n",
]

MODES = ("filtered", "linear")


def gain_matrix(g, allow_zero: bool = False) -> NDArray[np.float64]:
    """Normalize a scalar or 3x3 gain to a 3x3 matrix, validating positivity.

    With ``allow_zero`` the gain may be zero (positive semidefinite), which
    makes the corresponding injection term inert.
    """
    g = np.asarray(g, dtype=np.float64)
    if g.ndim == 0:
        if g < 0 or (g == 0 and not allow_zero):
            raise ValueError("scalar gains must be strictly positive")
        return float(g) * np.eye(3)
    if g.shape != (3, 3):
        raise ValueError("gain must be a scalar or a 3x3 matrix")
    if not np.allclose(g, g.T, atol=1e-12):
        raise ValueError("matrix gains must be symmetric")
    lam = np.linalg.eigvalsh(g).min()
    if lam < 0 or (lam == 0 and not allow_zero):
        raise ValueError("matrix gains must be positive definite")
    return g


@dataclass(frozen=True)
class ObserverState:
    """Estimates of the two body vectors and the gyro bias."""

    alpha_hat: NDArray[np.float64]
    beta_hat: NDArray[np.float64]
    b_hat: NDArray[np.float64]

    @staticmethod
    def zero() -> "ObserverState":
        return ObserverState(np.zeros(3), np.zeros(3), np.zeros(3))

    def as_array(self) -> NDArray[np.float64]:
        return np.concatenate([self.alpha_hat, self.beta_hat, self.b_hat]).astype(np.float64)

    @staticmethod
    def from_array(y) -> "ObserverState":
        y = np.asarray(y, dtype=np.float64)
        return ObserverState(y[0:3].copy(), y[3:6].copy(), y[6:9].copy())


@dataclass(frozen=True)
class Gains:
    """Observer gains; each entry is a positive scalar or an SPD 3x3 matrix."""

    k_alpha: object = 10.0
    k_beta: object = 10.0
    l_alpha: object = 0.15
    l_beta: object = 0.15

    def matrices(self):
        """(K_alpha, K_beta, L_alpha, L_beta) as validated 3x3 matrices."""
        return (
            gain_matrix(self.k_alpha),
            gain_matrix(self.k_beta),
            gain_matrix(self.l_alpha),
            gain_matrix(self.l_beta),
        )

    @property
    def is_scalar(self) -> bool:
        return all(
            np.ndim(g) == 0 for g in (self.k_alpha, self.k_beta, self.l_alpha, self.l_beta)
        )

    def scalars(self) -> tuple[float, float, float, float]:
        if not self.is_scalar:
            raise ValueError("gains are matrix-valued")
        return (
            float(self.k_alpha),
            float(self.k_beta),
            float(self.l_alpha),
            float(self.l_beta),
        )


@dataclass(frozen=True)
class VectorChannel:
    """One measurement channel of the n-vector observer."""

    v_m: NDArray[np.float64]
    v_hat: NDArray[np.float64]
    k: object
    l: object


def _check_mode(mode: str) -> bool:
    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}")
    return mode == "linear"


def _stack_two(s: ObserverState, m: Measurement, g: Gains):
    ka, kb, la, lb = g.matrices()
    y = s.as_array()
    v_m = np.ascontiguousarray(np.stack([m.alpha_m, m.beta_m]).astype(np.float64))
    K = np.ascontiguousarray(np.stack([ka, kb]))
    L = np.ascontiguousarray(np.stack([la, lb]))
    return y, v_m, K, L


def observer_derivative(
    s: ObserverState, m: Measurement, g: Gains, mode: str = "filtered"
) -> ObserverState:
    """Continuous-time derivative of the observer state at measurement m."""
    linear = _check_mode(mode)
    y, v_m, K, L = _stack_two(s, m, g)
    dy = np.empty(9)
    _kernels.observer_deriv_flat(y, v_m, np.asarray(m.omega_m, dtype=np.float64),
                                 K, L, linear, dy)
    return ObserverState.from_array(dy)


def observer_step(
    s: ObserverState, m: Measurement, g: Gains, mode: str = "filtered", dt: float = 1e-3
) -> ObserverState:
    """One RK4 step with the measurement held constant over the step."""
    linear = _check_mode(mode)
    if dt <= 0:
        raise ValueError("dt must be > 0")
    y, v_m, K, L = _stack_two(s, m, g)
    om = np.asarray(m.omega_m, dtype=np.float64)
    if not (np.all(np.isfinite(y)) and np.all(np.isfinite(v_m)) and np.all(np.isfinite(om))):
        raise ValueError("non-finite observer state or measurement")
    return ObserverState.from_array(
        _kernels.observer_rk4_flat(y, v_m, om, K, L, linear, dt)
    )


def observer_step_n(
    channels: list[VectorChannel],
    omega_m,
    b_hat,
    mode: str = "filtered",
    dt: float = 1e-3,
) -> tuple[list[VectorChannel], NDArray[np.float64]]:
    """One RK4 step of the n-channel observer; returns updated channels and bias."""
    linear = _check_mode(mode)
    if dt <= 0:
        raise ValueError("dt must be > 0")
    if not channels:
        raise ValueError("at least one channel is required")
    C = len(channels)
    y = np.empty(3 * C + 3)
    v_m = np.empty((C, 3))
    K = np.empty((C, 3, 3))
    L = np.empty((C, 3, 3))
    for c, ch in enumerate(channels):
        y[3 * c : 3 * c + 3] = ch.v_hat
        v_m[c] = ch.v_m
        K[c] = gain_matrix(ch.k)
        L[c] = gain_matrix(ch.l, allow_zero=True)
    y[3 * C :] = b_hat
    om = np.asarray(omega_m, dtype=np.float64)
    if not (np.all(np.isfinite(y)) and np.all(np.isfinite(v_m)) and np.all(np.isfinite(om))):
        raise ValueError("non-finite observer state or measurement")
    out = _kernels.observer_rk4_flat(y, v_m, om, K, L, linear, dt)
    new_channels = [
        VectorChannel(v_m=ch.v_m, v_hat=out[3 * c : 3 * c + 3].copy(), k=ch.k, l=ch.l)
        for c, ch in enumerate(channels)
    ]
    return new_channels, out[3 * C :].copy()


def observer_history(
    initial: ObserverState,
    alpha_m: NDArray[np.float64],
    beta_m: NDArray[np.float64],
    omega_m: NDArray[np.float64],
    g: Gains,
    mode: str = "filtered",
    dt: float = 1e-3,
    reinit_idx=None,
    reinit_states=None,
) -> NDArray[np.float64]:
    """Run the two-vector observer over whole measurement arrays (N, 3).

    Returns the (N, 9) state history [alpha_hat | beta_hat | b_hat]; the state
    is recorded at every sample, reinitializations applied at the listed sample
    indices before stepping.
    """
    linear = _check_mode(mode)
    ka, kb, la, lb = g.matrices()
    N = omega_m.shape[0]
    v_m = np.ascontiguousarray(np.stack([alpha_m, beta_m], axis=1).astype(np.float64))
    K = np.ascontiguousarray(np.stack([ka, kb]))
    L = np.ascontiguousarray(np.stack([la, lb]))
    om = np.ascontiguousarray(omega_m, dtype=np.float64)
    if not (np.all(np.isfinite(v_m)) and np.all(np.isfinite(om))):
        raise ValueError("non-finite measurement stream")
    if reinit_idx is None:
        ridx = np.empty(0, dtype=np.int64)
        rstate = np.empty((0, 9))
    else:
        ridx = np.asarray(reinit_idx, dtype=np.int64)
        rstate = np.ascontiguousarray(
            np.stack([s.as_array() for s in reinit_states])
        )
        order = np.argsort(ridx)
        ridx, rstate = ridx[order], rstate[order]
    return _kernels.observer_history(
        initial.as_array(), v_m, om, K, L, linear, dt, ridx, rstate
    )
