"""Attitude reconstruction from the two vector estimates.

Given estimates (alpha_hat, beta_hat) and the nominal inertial references,
the raw reconstruction is

    R_tilde.T = [ alpha_hat/|alpha_i| ,
                  (alpha_hat x beta_hat)/|alpha_i x beta_i| ,
                  alpha_hat x (alpha_hat x beta_hat)/|alpha_i x (alpha_i x beta_i)| ] @ R_i.T

with R_i the orthonormal frame built the same way from the references.
R_tilde is generally not orthogonal; its nearest rotation (polar factor) has
the closed form obtained by normalizing the three columns instead of scaling
by the reference norms, so no SVD is needed away from the degenerate set.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.typing import NDArray

__all__ = [
    "ReferenceBasis",
    "ReconstructedAttitude",
    "reconstruct_tilde",
    "project_polar",
    "attitude_error_angle",
    "attitude_error_angle_batch",
]

DEGENERACY_TOL = 1e-9


def _triad(a, b) -> NDArray[np.float64]:
    """Columns (a, a x b, a x (a x b)), unnormalized, as a 3x3 matrix."""
    c = np.cross(a, b)
    return np.column_stack([a, c, np.cross(a, c)])


@dataclass(frozen=True)
class ReferenceBasis:
    """Nominal inertial references and the cached orthonormal frame R_i."""

    alpha_i: NDArray[np.float64]
    beta_i: NDArray[np.float64]
    R_i: NDArray[np.float64]

    @staticmethod
    def from_references(alpha_i, beta_i) -> "ReferenceBasis":
        alpha_i = np.asarray(alpha_i, dtype=np.float64)
        beta_i = np.asarray(beta_i, dtype=np.float64)
        cols = _triad(alpha_i, beta_i)
        norms = np.linalg.norm(cols, axis=0)
        if np.linalg.norm(np.cross(alpha_i, beta_i)) <= DEGENERACY_TOL:
            raise ValueError("reference vectors must be linearly independent")
        return ReferenceBasis(alpha_i, beta_i, cols / norms)

    @property
    def column_norms(self) -> NDArray[np.float64]:
        """|alpha_i|, |alpha_i x beta_i|, |alpha_i x (alpha_i x beta_i)|."""
        return np.linalg.norm(_triad(self.alpha_i, self.beta_i), axis=0)


@dataclass(frozen=True)
class ReconstructedAttitude:
    """Raw reconstruction R_tilde, its polar projection R_hat, degeneracy flag."""

    R_tilde: NDArray[np.float64]
    R_hat: NDArray[np.float64]
    degenerate_flag: str  # "none" | "alpha_zero" | "collinear"


def reconstruct_tilde(alpha_hat, beta_hat, basis: ReferenceBasis) -> NDArray[np.float64]:
    """Raw (non-orthogonal) attitude reconstruction.

    Exact estimates alpha_hat = R.T alpha_i, beta_hat = R.T beta_i give
    R_tilde = R. Degenerate estimates simply produce zero columns.
    """
    cols = _triad(np.asarray(alpha_hat, float), np.asarray(beta_hat, float))
    return (cols / basis.column_norms @ basis.R_i.T).T


def _complete_frame(u) -> NDArray[np.float64]:
    """Right-handed orthonormal frame (u, e2, e3) from a unit vector u.

    Deterministic rule: pair u with the coordinate axis it is least aligned
    with, then Gram-Schmidt.
    """
    axis = np.zeros(3)
    axis[np.argmin(np.abs(u))] = 1.0
    e2 = axis - (axis @ u) * u
    e2 /= np.linalg.norm(e2)
    e3 = np.cross(u, e2)
    return np.column_stack([u, e2, e3])


def project_polar(R_tilde, alpha_hat, beta_hat, basis: ReferenceBasis) -> ReconstructedAttitude:
    """Nearest rotation to R_tilde (Frobenius), via the closed form.

    Non-degenerate estimates: normalize the three columns built from
    (alpha_hat, beta_hat). |alpha_hat| below 1e-9 falls back to R_hat = R_i
    ("alpha_zero"); collinear estimates complete alpha_hat/|alpha_hat| to a
    deterministic right-handed frame ("collinear").
    """
    R_tilde = np.asarray(R_tilde, dtype=np.float64)
    alpha_hat = np.asarray(alpha_hat, dtype=np.float64)
    beta_hat = np.asarray(beta_hat, dtype=np.float64)
    na = np.linalg.norm(alpha_hat)
    if na <= DEGENERACY_TOL:
        return ReconstructedAttitude(R_tilde, basis.R_i.copy(), "alpha_zero")
    cross = np.cross(alpha_hat, beta_hat)
    if np.linalg.norm(cross) <= DEGENERACY_TOL * na * np.linalg.norm(beta_hat) or (
        np.linalg.norm(cross) == 0.0
    ):
        frame = _complete_frame(alpha_hat / na)
        return ReconstructedAttitude(R_tilde, (frame @ basis.R_i.T).T, "collinear")
    cols = _triad(alpha_hat, beta_hat)
    cols = cols / np.linalg.norm(cols, axis=0)
    return ReconstructedAttitude(R_tilde, (cols @ basis.R_i.T).T, "none")


def reconstruct(alpha_hat, beta_hat, basis: ReferenceBasis) -> ReconstructedAttitude:
    """Convenience: reconstruct_tilde followed by project_polar."""
    R_tilde = reconstruct_tilde(alpha_hat, beta_hat, basis)
    return project_polar(R_tilde, alpha_hat, beta_hat, basis)


def reconstruct_batch(alpha_hat, beta_hat, basis: ReferenceBasis) -> NDArray[np.float64]:
    """Vectorized polar reconstruction R_hat over (n, 3) estimate arrays.

    Degenerate rows are handled by the same rules as project_polar.
    """
    a = np.asarray(alpha_hat, dtype=np.float64)
    b = np.asarray(beta_hat, dtype=np.float64)
    c = np.cross(a, b)
    cols = np.stack([a, c, np.cross(a, c)], axis=2)  # (n, 3, 3) columns
    norms = np.linalg.norm(cols, axis=1, keepdims=True)
    na = norms[:, :, 0].ravel()
    nc = norms[:, :, 1].ravel()
    bad = (na <= DEGENERACY_TOL) | (nc <= DEGENERACY_TOL * na * np.linalg.norm(b, axis=1))
    safe_norms = np.where(norms == 0.0, 1.0, norms)
    out = np.einsum("nik,jk->nji", cols / safe_norms, basis.R_i)
    if np.any(bad):
        for i in np.flatnonzero(bad):
            out[i] = project_polar(np.zeros((3, 3)), a[i], b[i], basis).R_hat
    return out


def attitude_error_angle(R_hat, R_true) -> float:
    """Geodesic angle between two rotations, in [0, pi]."""
    c = 0.5 * (np.trace(np.asarray(R_hat).T @ np.asarray(R_true)) - 1.0)
    return float(np.arccos(np.clip(c, -1.0, 1.0)))


def attitude_error_angle_batch(R_hat, R_true) -> NDArray[np.float64]:
    """Vectorized attitude_error_angle over (n, 3, 3) stacks."""
    c = 0.5 * (np.einsum("nij,nij->n", np.asarray(R_hat), np.asarray(R_true)) - 1.0)
    return np.arccos(np.clip(c, -1.0, 1.0))
