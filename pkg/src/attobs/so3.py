"""Rotation-matrix utilities: skew maps, exact integration, Euler conversions.

All rotations follow the convention ``v_inertial = R @ v_body`` with kinematics
``dR/dt = R @ skew(omega)`` for the body-frame angular velocity ``omega``.
Body-frame coordinates of an inertial direction ``u`` are therefore ``R.T @ u``.
"""

from __future__ import annotations

import math

import numpy as np
from numpy.typing import NDArray

from ._kernels import rodrigues

__all__ = [
    "skew",
    "rotate_exp",
    "euler_to_rot",
    "rot_to_euler",
    "rot_to_euler_batch",
    "random_rotation",
    "random_rotation_batch",
    "is_rotation",
    "GIMBAL_LOCK_TOL",
]

GIMBAL_LOCK_TOL = 1e-9


def skew(v) -> NDArray[np.float64]:
    """Return the matrix S such that S @ x == cross(v, x) for every x."""
    x, y, z = v
    return np.array([[0.0, -z, y], [z, 0.0, -x], [-y, x, 0.0]])


def rotate_exp(R, omega, dt: float) -> NDArray[np.float64]:
    """Advance R by a constant body rate omega over dt seconds.

    Uses the closed-form matrix exponential of skew(omega) * dt, so the result
    stays orthonormal to machine precision regardless of step size.
    """
    R = np.asarray(R, dtype=np.float64)
    omega = np.asarray(omega, dtype=np.float64)
    return R @ rodrigues(omega, dt)


def is_rotation(R, tol: float = 1e-9) -> bool:
    """Check orthonormality (Frobenius) and det == +1 within tol."""
    R = np.asarray(R, dtype=np.float64)
    if R.shape != (3, 3) or not np.all(np.isfinite(R)):
        return False
    ortho = np.linalg.norm(R.T @ R - np.eye(3))
    return ortho <= tol and abs(np.linalg.det(R) - 1.0) <= tol


def euler_to_rot(phi: float, theta: float, psi: float) -> NDArray[np.float64]:
    """Rotation matrix from ZYX Euler angles (yaw psi, pitch theta, roll phi)."""
    cph, sph = math.cos(phi), math.sin(phi)
    cth, sth = math.cos(theta), math.sin(theta)
    cps, sps = math.cos(psi), math.sin(psi)
    return np.array(
        [
            [cps * cth, cps * sth * sph - sps * cph, cps * sth * cph + sps * sph],
            [sps * cth, sps * sth * sph + cps * cph, sps * sth * cph - cps * sph],
            [-sth, cth * sph, cth * cph],
        ]
    )


def rot_to_euler(R) -> tuple[float, float, float]:
    """ZYX Euler angles (phi, theta, psi) of a rotation matrix.

    At gimbal lock (|R[2,0]| > 1 - 1e-9, i.e. |theta| = pi/2) yaw and roll are
    not separately observable; the convention psi := 0 is applied and roll
    absorbs the remaining rotation.
    """
    R = np.asarray(R, dtype=np.float64)
    s = -R[2, 0]
    if abs(s) > 1.0 - GIMBAL_LOCK_TOL:
        theta = math.copysign(math.pi / 2, s)
        psi = 0.0
        # at theta = +/- pi/2 only phi -/+ psi is observable; with psi := 0
        # the residual appears in the (0,1)/(1,1) entries with a theta-dependent sign
        phi = math.atan2(R[0, 1] if s > 0 else -R[0, 1], R[1, 1])
        return phi, theta, psi
    theta = math.asin(min(1.0, max(-1.0, s)))
    phi = math.atan2(R[2, 1], R[2, 2])
    psi = math.atan2(R[1, 0], R[0, 0])
    return phi, theta, psi


def rot_to_euler_batch(R: NDArray[np.float64]) -> NDArray[np.float64]:
    """Vectorized rot_to_euler over an (n, 3, 3) stack; returns (n, 3).

    Columns are (phi, theta, psi). Gimbal-lock rows follow the same psi := 0
    convention as the scalar version.
    """
    R = np.asarray(R, dtype=np.float64)
    s = -R[:, 2, 0]
    out = np.empty((R.shape[0], 3))
    locked = np.abs(s) > 1.0 - GIMBAL_LOCK_TOL
    free = ~locked
    out[free, 0] = np.arctan2(R[free, 2, 1], R[free, 2, 2])
    out[free, 1] = np.arcsin(np.clip(s[free], -1.0, 1.0))
    out[free, 2] = np.arctan2(R[free, 1, 0], R[free, 0, 0])
    if np.any(locked):
        out[locked, 0] = np.arctan2(np.sign(s[locked]) * R[locked, 0, 1], R[locked, 1, 1])
        out[locked, 1] = np.copysign(np.pi / 2, s[locked])
        out[locked, 2] = 0.0
    return out


def random_rotation(rng: np.random.Generator) -> NDArray[np.float64]:
    """Draw one rotation matrix, uniform w.r.t. the Haar measure on SO(3)."""
    return random_rotation_batch(rng, 1)[0]


def random_rotation_batch(rng: np.random.Generator, n: int) -> NDArray[np.float64]:
    """Draw n Haar-uniform rotation matrices as an (n, 3, 3) array.

    A normalized 4D Gaussian is a uniform unit quaternion, which maps to a
    Haar-uniform rotation.
    """
    q = rng.normal(size=(n, 4))
    q /= np.linalg.norm(q, axis=1, keepdims=True)
    w, x, y, z = q[:, 0], q[:, 1], q[:, 2], q[:, 3]
    R = np.empty((n, 3, 3))
    R[:, 0, 0] = 1 - 2 * (y * y + z * z)
    R[:, 0, 1] = 2 * (x * y - z * w)
    R[:, 0, 2] = 2 * (x * z + y * w)
    R[:, 1, 0] = 2 * (x * y + z * w)
    R[:, 1, 1] = 1 - 2 * (x * x + z * z)
    R[:, 1, 2] = 2 * (y * z - x * w)
    R[:, 2, 0] = 2 * (x * z - y * w)
    R[:, 2, 1] = 2 * (y * z + x * w)
    R[:, 2, 2] = 1 - 2 * (x * x + y * y)
    return R
