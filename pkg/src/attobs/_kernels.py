"""Hot numeric loops: truth rotation propagation, observer integration, error dynamics.

Every kernel is plain numpy code compiled with numba's ``@njit`` when available.
Setting the environment variable ``ATTOBS_NO_NUMBA=1`` before import skips the
compilation and runs the identical source as ordinary Python/numpy, which is
useful for debugging and as a dependency-light fallback. ``benchmarks/``
compares the two paths.

State layout used by the observer kernels: a flat float64 vector
``y = [v_hat[0], ..., v_hat[C-1], b_hat]`` of length 3*C + 3 for C measurement
channels. The error-system kernel uses ``E = [E_alpha, E_beta, E_b]`` (9,).
"""

from __future__ import annotations

import math
import os

import numpy as np

NUMBA_ENABLED = os.environ.get("ATTOBS_NO_NUMBA", "0") not in ("1", "true", "yes")
if NUMBA_ENABLED:
    try:
        from numba import njit as _njit
    except ImportError:  # pragma: no cover
        NUMBA_ENABLED = False

if NUMBA_ENABLED:
    def _jit(f):
        return _njit(cache=True)(f)
else:
    def _jit(f):
        return f


@_jit
def rodrigues(omega, dt):
    """Closed-form exp(skew(omega) * dt); exact for constant omega."""
    wx, wy, wz = omega[0] * dt, omega[1] * dt, omega[2] * dt
    theta = math.sqrt(wx * wx + wy * wy + wz * wz)
    A = np.empty((3, 3))
    if theta == 0.0:
        A[0, 0] = 1.0; A[0, 1] = 0.0; A[0, 2] = 0.0
        A[1, 0] = 0.0; A[1, 1] = 1.0; A[1, 2] = 0.0
        A[2, 0] = 0.0; A[2, 1] = 0.0; A[2, 2] = 1.0
        return A
    ux, uy, uz = wx / theta, wy / theta, wz / theta
    c = math.cos(theta)
    s = math.sin(theta)
    t = 1.0 - c
    A[0, 0] = c + ux * ux * t
    A[0, 1] = ux * uy * t - uz * s
    A[0, 2] = ux * uz * t + uy * s
    A[1, 0] = ux * uy * t + uz * s
    A[1, 1] = c + uy * uy * t
    A[1, 2] = uy * uz * t - ux * s
    A[2, 0] = ux * uz * t - uy * s
    A[2, 1] = uy * uz * t + ux * s
    A[2, 2] = c + uz * uz * t
    return A


@_jit
def rotation_history(R0, omega_mid, dt):
    """Propagate dR/dt = R skew(omega) over n steps with midpoint rates.

    omega_mid[k] is the body rate at the midpoint of step k. Returns the
    (n+1, 3, 3) stack of rotations, R0 included.
    """
    n = omega_mid.shape[0]
    out = np.empty((n + 1, 3, 3))
    out[0] = R0
    for k in range(n):
        A = rodrigues(omega_mid[k], dt)
        R = out[k]
        for i in range(3):
            for j in range(3):
                out[k + 1, i, j] = (
                    R[i, 0] * A[0, j] + R[i, 1] * A[1, j] + R[i, 2] * A[2, j]
                )
    return out


@_jit
def observer_deriv_flat(y, v_m, omega_m, K, L, linear, dy):
    """Time derivative of the flat observer state into dy.

    Channel c (filtered):  d v_hat = v_hat x (omega_m - b_hat) - K_c (v_hat - v_m)
    Channel c (linear):    d v_hat = v_hat x omega_m - v_m x b_hat - K_c (v_hat - v_m)
    Bias:                  d b_hat = sum_c L_c (v_hat x v_m)
    """
    C = v_m.shape[0]
    ib = 3 * C
    bx, by, bz = y[ib], y[ib + 1], y[ib + 2]
    dbx = 0.0
    dby = 0.0
    dbz = 0.0
    for c in range(C):
        i = 3 * c
        vx, vy, vz = y[i], y[i + 1], y[i + 2]
        mx, my, mz = v_m[c, 0], v_m[c, 1], v_m[c, 2]
        if linear:
            wx, wy, wz = omega_m[0], omega_m[1], omega_m[2]
        else:
            wx = omega_m[0] - bx
            wy = omega_m[1] - by
            wz = omega_m[2] - bz
        cx = vy * wz - vz * wy
        cy = vz * wx - vx * wz
        cz = vx * wy - vy * wx
        if linear:
            cx -= my * bz - mz * by
            cy -= mz * bx - mx * bz
            cz -= mx * by - my * bx
        ex, ey, ez = vx - mx, vy - my, vz - mz
        dy[i] = cx - (K[c, 0, 0] * ex + K[c, 0, 1] * ey + K[c, 0, 2] * ez)
        dy[i + 1] = cy - (K[c, 1, 0] * ex + K[c, 1, 1] * ey + K[c, 1, 2] * ez)
        dy[i + 2] = cz - (K[c, 2, 0] * ex + K[c, 2, 1] * ey + K[c, 2, 2] * ez)
        qx = vy * mz - vz * my
        qy = vz * mx - vx * mz
        qz = vx * my - vy * mx
        dbx += L[c, 0, 0] * qx + L[c, 0, 1] * qy + L[c, 0, 2] * qz
        dby += L[c, 1, 0] * qx + L[c, 1, 1] * qy + L[c, 1, 2] * qz
        dbz += L[c, 2, 0] * qx + L[c, 2, 1] * qy + L[c, 2, 2] * qz
    dy[ib] = dbx
    dy[ib + 1] = dby
    dy[ib + 2] = dbz


@_jit
def observer_rk4_flat(y, v_m, omega_m, K, L, linear, dt):
    """One RK4 step of the observer with the measurement held over the step."""
    m = y.shape[0]
    k1 = np.empty(m)
    k2 = np.empty(m)
    k3 = np.empty(m)
    k4 = np.empty(m)
    tmp = np.empty(m)
    observer_deriv_flat(y, v_m, omega_m, K, L, linear, k1)
    for i in range(m):
        tmp[i] = y[i] + 0.5 * dt * k1[i]
    observer_deriv_flat(tmp, v_m, omega_m, K, L, linear, k2)
    for i in range(m):
        tmp[i] = y[i] + 0.5 * dt * k2[i]
    observer_deriv_flat(tmp, v_m, omega_m, K, L, linear, k3)
    for i in range(m):
        tmp[i] = y[i] + dt * k3[i]
    observer_deriv_flat(tmp, v_m, omega_m, K, L, linear, k4)
    out = np.empty(m)
    for i in range(m):
        out[i] = y[i] + (dt / 6.0) * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i])
    return out


@_jit
def observer_history(y0, v_m, omega_m, K, L, linear, dt, reinit_idx, reinit_state):
    """Run the observer over a measurement stream.

    v_m has shape (N, C, 3) and omega_m (N, 3); the state is recorded at every
    sample, giving an (N, 3C+3) history. When sample k appears in reinit_idx
    the state is replaced by the matching row of reinit_state before the step
    out of sample k (and the replaced state is what gets recorded at k).
    """
    N = v_m.shape[0]
    m = y0.shape[0]
    hist = np.empty((N, m))
    y = y0.copy()
    r = 0
    nr = reinit_idx.shape[0]
    for k in range(N):
        if r < nr and reinit_idx[r] == k:
            y = reinit_state[r].copy()
            r += 1
        hist[k] = y
        if k < N - 1:
            y = observer_rk4_flat(y, v_m[k], omega_m[k], K, L, linear, dt)
    return hist


@_jit
def error_deriv(E, alpha_i, beta_i, Om, B, ka, kb, la, lb, linear, dE):
    """Rotated error dynamics into dE.

    Filtered observer:
        dE_a = E_b x (alpha_i + E_a) - ka E_a
        dE_s = E_b x (beta_i + E_s)  - kb E_s
    Linear-injection variant (B is the rotated true bias):
        dE_a = E_b x alpha_i - ka E_a + E_a x B
        dE_s = E_b x beta_i  - kb E_s + E_s x B
    Both:
        dE_b = Om x E_b + la (E_a x alpha_i) + lb (E_s x beta_i)
    """
    ax, ay, az = E[0], E[1], E[2]
    sx, sy, sz = E[3], E[4], E[5]
    bx, by, bz = E[6], E[7], E[8]
    if linear:
        tx, ty, tz = alpha_i[0], alpha_i[1], alpha_i[2]
    else:
        tx, ty, tz = alpha_i[0] + ax, alpha_i[1] + ay, alpha_i[2] + az
    dE[0] = by * tz - bz * ty - ka * ax
    dE[1] = bz * tx - bx * tz - ka * ay
    dE[2] = bx * ty - by * tx - ka * az
    if linear:
        dE[0] += ay * B[2] - az * B[1]
        dE[1] += az * B[0] - ax * B[2]
        dE[2] += ax * B[1] - ay * B[0]
    if linear:
        tx, ty, tz = beta_i[0], beta_i[1], beta_i[2]
    else:
        tx, ty, tz = beta_i[0] + sx, beta_i[1] + sy, beta_i[2] + sz
    dE[3] = by * tz - bz * ty - kb * sx
    dE[4] = bz * tx - bx * tz - kb * sy
    dE[5] = bx * ty - by * tx - kb * sz
    if linear:
        dE[3] += sy * B[2] - sz * B[1]
        dE[4] += sz * B[0] - sx * B[2]
        dE[5] += sx * B[1] - sy * B[0]
    dE[6] = (
        Om[1] * bz - Om[2] * by
        + la * (ay * alpha_i[2] - az * alpha_i[1])
        + lb * (sy * beta_i[2] - sz * beta_i[1])
    )
    dE[7] = (
        Om[2] * bx - Om[0] * bz
        + la * (az * alpha_i[0] - ax * alpha_i[2])
        + lb * (sz * beta_i[0] - sx * beta_i[2])
    )
    dE[8] = (
        Om[0] * by - Om[1] * bx
        + la * (ax * alpha_i[1] - ay * alpha_i[0])
        + lb * (sx * beta_i[1] - sy * beta_i[0])
    )


@_jit
def error_history(E0, alpha_i, beta_i, omega_half, bias_half, ka, kb, la, lb, linear, dt):
    """RK4-integrate the rotated error system over n steps.

    omega_half and bias_half hold the rotated angular velocity and rotated true
    bias sampled on the half-step grid t = 0, dt/2, dt, ... with shape
    (2n+1, 3). Returns the (n+1, 9) error history.
    """
    n = (omega_half.shape[0] - 1) // 2
    hist = np.empty((n + 1, 9))
    hist[0] = E0
    E = E0.copy()
    k1 = np.empty(9)
    k2 = np.empty(9)
    k3 = np.empty(9)
    k4 = np.empty(9)
    tmp = np.empty(9)
    for k in range(n):
        error_deriv(E, alpha_i, beta_i, omega_half[2 * k], bias_half[2 * k],
                    ka, kb, la, lb, linear, k1)
        for i in range(9):
            tmp[i] = E[i] + 0.5 * dt * k1[i]
        error_deriv(tmp, alpha_i, beta_i, omega_half[2 * k + 1], bias_half[2 * k + 1],
                    ka, kb, la, lb, linear, k2)
        for i in range(9):
            tmp[i] = E[i] + 0.5 * dt * k2[i]
        error_deriv(tmp, alpha_i, beta_i, omega_half[2 * k + 1], bias_half[2 * k + 1],
                    ka, kb, la, lb, linear, k3)
        for i in range(9):
            tmp[i] = E[i] + dt * k3[i]
        error_deriv(tmp, alpha_i, beta_i, omega_half[2 * k + 2], bias_half[2 * k + 2],
                    ka, kb, la, lb, linear, k4)
        for i in range(9):
            E[i] = E[i] + (dt / 6.0) * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i])
        hist[k + 1] = E
    return hist
