"""Exact 2x2 complex linear algebra for single-qubit states and rotations.

States are amplitude 2-vectors (complex numpy arrays); Bloch-angle
constructors are convenience only. Everything downstream composes through
these functions.
"""

from __future__ import annotations

import numpy as np

ATOL = 1e-12

KET0 = np.array([1.0, 0.0], dtype=complex)
KET1 = np.array([0.0, 1.0], dtype=complex)


def rot_x(theta: float) -> np.ndarray:
    """exp(i * theta * sigma_x) as a 2x2 complex array."""
    c, s = np.cos(theta), np.sin(theta)
    return np.array([[c, 1j * s], [1j * s, c]])


def rot_z(phi: float) -> np.ndarray:
    """exp(i * phi * sigma_z) = diag(e^{i phi}, e^{-i phi})."""
    return np.array([[np.exp(1j * phi), 0.0], [0.0, np.exp(-1j * phi)]])


def bloch_state(polar: float, azimuthal: float) -> np.ndarray:
    """Pure state (cos(polar/2), e^{i azimuthal} sin(polar/2))."""
    return np.array(
        [np.cos(polar / 2), np.exp(1j * azimuthal) * np.sin(polar / 2)]
    )


def apply(u: np.ndarray, state: np.ndarray) -> np.ndarray:
    """Matrix-vector product u @ state."""
    return u @ state


def transition_prob(meas: np.ndarray, state: np.ndarray) -> float:
    """|<meas|state>|^2, clipped into [0, 1].

    Symmetric in its arguments and invariant under a global phase of
    either argument.
    """
    p = abs(np.vdot(meas, state)) ** 2
    return float(min(max(p, 0.0), 1.0))


def is_unitary(u: np.ndarray, atol: float = ATOL) -> bool:
    """Check U^dag U = I entrywise and |det U| = 1."""
    u = np.asarray(u)
    if u.shape != (2, 2):
        return False
    gram_ok = np.allclose(u.conj().T @ u, np.eye(2), rtol=0.0, atol=atol)
    det_ok = abs(abs(np.linalg.det(u)) - 1.0) <= atol
    return bool(gram_ok and det_ok)


def is_normalized(state: np.ndarray, atol: float = ATOL) -> bool:
    return abs(np.linalg.norm(state) - 1.0) <= atol
