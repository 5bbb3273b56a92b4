"""Strict-Lyapunov certification of the observer error dynamics.

For scalar gains (ka, kb, la, lb) and independent references the candidate

    V = sigma1 * V1 + sigma2 * V1**2 + V3
    V1 = 0.5 * (la |E_a|^2 + lb |E_s|^2 + |E_b|^2)
    V3 = 0.5 * |E_b - (la/ka) alpha_i x E_a - (lb/kb) beta_i x E_s|^2

is a strict Lyapunov function whenever the bias-channel matrix

    M = -(la/ka) skew(alpha_i)^2 - (lb/kb) skew(beta_i)^2

is positive definite (mu = lambda_min(M) > 0) and the eight strictness
coefficients below are all positive; along any error trajectory with
|omega| <= c_omega,

    dV/dt <= - mu' |E_b|^2 - s1a |E_a|^2 - s1b |E_s|^2 - s2a |E_a|^4
             - s2b |E_s|^4 - s2ab |E_a|^2 |E_s|^2
             - s2a' |E_a|^2 |E_b|^2 - s2b' |E_s|^2 |E_b|^2.

This module evaluates every quantity numerically, searches feasible
(epsilon, sigma1, sigma2), and checks the decrease inequality on sampled
trajectories by central finite differences.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.typing import NDArray

from . import _kernels
from .observer import Gains
from .signals import ZERO_SIGNAL, SignalSpec
from .so3 import skew

__all__ = [
    "ErrorState",
    "LyapunovParams",
    "StrictnessCoefficients",
    "DecreaseReport",
    "compute_mu",
    "lyapunov_pieces",
    "lyapunov_value",
    "strictness_coefficients",
    "find_certificate",
    "verify_decrease",
    "simulate_error_system",
]


@dataclass(frozen=True)
class ErrorState:
    """Rotated error variables (inertial-frame errors)."""

    E_alpha: NDArray[np.float64]
    E_beta: NDArray[np.float64]
    E_b: NDArray[np.float64]

    def as_array(self) -> NDArray[np.float64]:
        return np.concatenate([self.E_alpha, self.E_beta, self.E_b]).astype(np.float64)

    @staticmethod
    def from_array(E) -> "ErrorState":
        E = np.asarray(E, dtype=np.float64)
        return ErrorState(E[0:3].copy(), E[3:6].copy(), E[6:9].copy())


@dataclass(frozen=True)
class LyapunovParams:
    """Certificate parameters: rate bound, Young's epsilon, weights, and mu."""

    c_omega: float
    epsilon: float
    sigma1: float
    sigma2: float
    mu: float

    def __post_init__(self):
        if not (0 < self.epsilon < self.mu):
            raise ValueError("epsilon must satisfy 0 < epsilon < mu")
        if self.sigma1 <= 0 or self.sigma2 <= 0:
            raise ValueError("sigma1 and sigma2 must be > 0")


@dataclass(frozen=True)
class StrictnessCoefficients:
    """The eight coefficients of the decrease bound; valid iff all positive."""

    mu_prime: float
    sigma_1alpha: float
    sigma_1beta: float
    sigma_2alpha: float
    sigma_2beta: float
    sigma_2alphabeta: float
    sigma_2alpha_prime: float
    sigma_2beta_prime: float

    def as_dict(self) -> dict[str, float]:
        return {
            "mu_prime": self.mu_prime,
            "sigma_1alpha": self.sigma_1alpha,
            "sigma_1beta": self.sigma_1beta,
            "sigma_2alpha": self.sigma_2alpha,
            "sigma_2beta": self.sigma_2beta,
            "sigma_2alphabeta": self.sigma_2alphabeta,
            "sigma_2alpha_prime": self.sigma_2alpha_prime,
            "sigma_2beta_prime": self.sigma_2beta_prime,
        }

    @property
    def all_positive(self) -> bool:
        return all(v > 0 for v in self.as_dict().values())


def bias_channel_matrix(alpha_i, beta_i, g: Gains) -> NDArray[np.float64]:
    """M = -(la/ka) skew(alpha_i)^2 - (lb/kb) skew(beta_i)^2."""
    ka, kb, la, lb = g.scalars()
    Sa = skew(alpha_i)
    Sb = skew(beta_i)
    return -(la / ka) * (Sa @ Sa) - (lb / kb) * (Sb @ Sb)


def compute_mu(alpha_i, beta_i, g: Gains) -> float:
    """Smallest eigenvalue of the bias-channel matrix; raises if not positive."""
    mu = float(np.linalg.eigvalsh(bias_channel_matrix(alpha_i, beta_i, g)).min())
    if mu <= 0:
        raise ValueError(
            "bias-channel matrix is not positive definite "
            "(references collinear or degenerate gains); no certificate exists"
        )
    return mu


def _split(E):
    E = np.asarray(E, dtype=np.float64)
    return E[..., 0:3], E[..., 3:6], E[..., 6:9]


def lyapunov_pieces(E, alpha_i, beta_i, g: Gains):
    """(V1, V3, u_ab) for an error state (9,) or a stack (..., 9)."""
    ka, kb, la, lb = g.scalars()
    alpha_i = np.asarray(alpha_i, dtype=np.float64)
    beta_i = np.asarray(beta_i, dtype=np.float64)
    Ea, Es, Eb = _split(E)
    V1 = 0.5 * (
        la * np.sum(Ea * Ea, axis=-1)
        + lb * np.sum(Es * Es, axis=-1)
        + np.sum(Eb * Eb, axis=-1)
    )
    u_ab = (la / ka) * np.cross(alpha_i, Ea) + (lb / kb) * np.cross(beta_i, Es)
    diff = Eb - u_ab
    V3 = 0.5 * np.sum(diff * diff, axis=-1)
    return V1, V3, u_ab


def lyapunov_value(E, p: LyapunovParams, g: Gains, alpha_i, beta_i):
    """V = sigma1 V1 + sigma2 V1^2 + V3, vectorized over stacked error states."""
    V1, V3, _ = lyapunov_pieces(E, alpha_i, beta_i, g)
    return p.sigma1 * V1 + p.sigma2 * V1 * V1 + V3


def strictness_coefficients(
    p: LyapunovParams, g: Gains, alpha_i, beta_i
) -> StrictnessCoefficients:
    """Evaluate the eight decrease-bound coefficients for given parameters."""
    ka, kb, la, lb = g.scalars()
    na2 = float(np.dot(alpha_i, alpha_i))
    nb2 = float(np.dot(beta_i, beta_i))
    eps = p.epsilon
    common = p.c_omega**2 + 2 * la**2 * na2**2 / ka**2 + 2 * lb**2 * nb2**2 / kb**2
    return StrictnessCoefficients(
        mu_prime=p.mu - eps,
        sigma_1alpha=p.sigma1 * ka * la - (4 / eps) * common * la**2 * na2 / ka**2,
        sigma_1beta=p.sigma1 * kb * lb - (4 / eps) * common * lb**2 * nb2 / kb**2,
        sigma_2alpha=p.sigma2 * ka * la**2 - 4 * la**4 * na2**2 / (eps * ka**4),
        sigma_2beta=p.sigma2 * kb * lb**2 - 4 * lb**4 * nb2**2 / (eps * kb**4),
        sigma_2alphabeta=p.sigma2 * (ka + kb) * la * lb
        - 8 * la**2 * lb**2 * na2 * nb2 / (eps * ka**2 * kb**2),
        sigma_2alpha_prime=p.sigma2 * ka * la - la**2 * na2 / (eps * ka**2),
        sigma_2beta_prime=p.sigma2 * kb * lb - lb**2 * nb2 / (eps * kb**2),
    )


def find_certificate(c_omega: float, g: Gains, alpha_i, beta_i) -> LyapunovParams:
    """Deterministic feasible certificate: epsilon = mu/2, factor-2 sigma margins.

    sigma1 (resp. sigma2) is set to twice the smallest value making the
    corresponding coefficients positive. Raises ValueError when mu <= 0 or for
    matrix gains (the certificate machinery is scalar-gain only).
    """
    if not g.is_scalar:
        raise ValueError("certificates are only defined for scalar gains")
    mu = compute_mu(alpha_i, beta_i, g)
    ka, kb, la, lb = g.scalars()
    na2 = float(np.dot(alpha_i, alpha_i))
    nb2 = float(np.dot(beta_i, beta_i))
    eps = 0.5 * mu
    common = c_omega**2 + 2 * la**2 * na2**2 / ka**2 + 2 * lb**2 * nb2**2 / kb**2
    sigma1 = 2.0 * max(
        (4 / eps) * common * la**2 * na2 / ka**2 / (ka * la),
        (4 / eps) * common * lb**2 * nb2 / kb**2 / (kb * lb),
    )
    sigma2 = 2.0 * max(
        4 * la**4 * na2**2 / (eps * ka**4) / (ka * la**2),
        4 * lb**4 * nb2**2 / (eps * kb**4) / (kb * lb**2),
        8 * la**2 * lb**2 * na2 * nb2 / (eps * ka**2 * kb**2) / ((ka + kb) * la * lb),
        la**2 * na2 / (eps * ka**2) / (ka * la),
        lb**2 * nb2 / (eps * kb**2) / (kb * lb),
    )
    p = LyapunovParams(c_omega=c_omega, epsilon=eps, sigma1=sigma1, sigma2=sigma2, mu=mu)
    coeffs = strictness_coefficients(p, g, alpha_i, beta_i)
    if not coeffs.all_positive:
        raise ValueError(f"certificate search failed: {coeffs.as_dict()}")
    return p


@dataclass(frozen=True)
class DecreaseReport:
    """Result of checking the decrease inequality along a sampled trajectory."""

    max_vdot: float
    violations: int
    first_violation_index: int  # -1 when none
    tolerance: float
    v1_slope_max_rel_err: float
    passed: bool


def verify_decrease(
    E_traj: NDArray[np.float64],
    dt: float,
    p: LyapunovParams,
    g: Gains,
    alpha_i,
    beta_i,
    tol_scale: float = 1e-6,
) -> DecreaseReport:
    """Check dV/dt against the certified quadratic bound on a trajectory.

    E_traj is an (N, 9) noiseless error trajectory sampled at dt whose driving
    rate satisfied |omega| <= p.c_omega. Central differences approximate dV/dt
    at interior samples; the check is

        dV/dt <= -(quadratic bound from the strictness coefficients) + tol,

    tol = tol_scale * max(V). Also reports how well the finite-difference
    slope of V1 matches its closed form -ka la |E_a|^2 - kb lb |E_s|^2
    (relative to the closed form's peak magnitude).
    """
    ka, kb, la, lb = g.scalars()
    coeffs = strictness_coefficients(p, g, alpha_i, beta_i)
    V1, V3, _ = lyapunov_pieces(E_traj, alpha_i, beta_i, g)
    V = p.sigma1 * V1 + p.sigma2 * V1 * V1 + V3
    tol = tol_scale * float(V.max())

    Ea, Es, Eb = _split(E_traj)
    a2 = np.sum(Ea * Ea, axis=-1)
    s2 = np.sum(Es * Es, axis=-1)
    b2 = np.sum(Eb * Eb, axis=-1)
    bound = -(
        coeffs.mu_prime * b2
        + coeffs.sigma_1alpha * a2
        + coeffs.sigma_1beta * s2
        + coeffs.sigma_2alpha * a2 * a2
        + coeffs.sigma_2beta * s2 * s2
        + coeffs.sigma_2alphabeta * a2 * s2
        + coeffs.sigma_2alpha_prime * a2 * b2
        + coeffs.sigma_2beta_prime * s2 * b2
    )

    vdot = (V[2:] - V[:-2]) / (2.0 * dt)
    excess = vdot - bound[1:-1] - tol
    bad = np.flatnonzero(excess > 0)

    v1dot_fd = (V1[2:] - V1[:-2]) / (2.0 * dt)
    v1dot_cf = -(ka * la * a2 + kb * lb * s2)[1:-1]
    scale = float(np.abs(v1dot_cf).max())
    rel = float(np.abs(v1dot_fd - v1dot_cf).max() / scale) if scale > 0 else 0.0

    return DecreaseReport(
        max_vdot=float(vdot.max()) if vdot.size else 0.0,
        violations=int(bad.size),
        first_violation_index=int(bad[0] + 1) if bad.size else -1,
        tolerance=tol,
        v1_slope_max_rel_err=rel,
        passed=bad.size == 0,
    )


def simulate_error_system(
    E0,
    duration: float,
    dt: float,
    g: Gains,
    alpha_i,
    beta_i,
    omega_signal: SignalSpec = ZERO_SIGNAL,
    bias_signal: SignalSpec = ZERO_SIGNAL,
    mode: str = "filtered",
) -> NDArray[np.float64]:
    """RK4-integrate the rotated error system; returns the (n+1, 9) history.

    omega_signal drives the rotated angular velocity term; bias_signal is the
    rotated true gyro bias, which only enters the linear-injection variant.
    """
    if mode not in ("filtered", "linear"):
        raise ValueError("mode must be 'filtered' or 'linear'")
    ka, kb, la, lb = g.scalars()
    n = int(round(duration / dt))
    t_half = np.arange(2 * n + 1) * (0.5 * dt)
    omega_half = np.ascontiguousarray(omega_signal.evaluate(t_half))
    bias_half = np.ascontiguousarray(bias_signal.evaluate(t_half))
    return _kernels.error_history(
        np.asarray(E0, dtype=np.float64).copy(),
        np.asarray(alpha_i, dtype=np.float64),
        np.asarray(beta_i, dtype=np.float64),
        omega_half,
        bias_half,
        ka,
        kb,
        la,
        lb,
        mode == "linear",
        dt,
    )
