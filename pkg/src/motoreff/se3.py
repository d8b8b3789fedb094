"""Minimal SO(3) helpers: skew operators and the rotation exponential."""

import numpy as np

# Below this angle the Rodrigues coefficients switch to their series form.
SMALL_ANGLE = 1e-6


def hat(v):
    """Skew-symmetric matrix [v]x, so that hat(v) @ w == np.cross(v, w)."""
    x, y, z = v
    return np.array([
        [0.0, -z, y],
        [z, 0.0, -x],
        [-y, x, 0.0],
    ])


def vee(m, tol=1e-9):
    """Inverse of :func:`hat`.

    Rejects matrices whose antisymmetry violation exceeds ``tol``.
    """
    m = np.asarray(m, dtype=float)
    if np.max(np.abs(m + m.T)) > tol:
        raise ValueError("vee: input is not skew-symmetric within tolerance")
    return np.array([m[2, 1], m[0, 2], m[1, 0]])


def so3_exp(w):
    """Rodrigues closed form of exp([w]x).

    For ||w|| < SMALL_ANGLE the sin(t)/t and (1-cos t)/t^2 coefficients use
    two-term series so hover-scale rates do not divide by ~0.
    """
    w = np.asarray(w, dtype=float)
    theta2 = float(w @ w)
    theta = np.sqrt(theta2)
    k = hat(w)
    if theta < SMALL_ANGLE:
        a = 1.0 - theta2 / 6.0
        b = 0.5 - theta2 / 24.0
    else:
        a = np.sin(theta) / theta
        b = (1.0 - np.cos(theta)) / theta2
    return np.eye(3) + a * k + b * (k @ k)


def so3_exp_first_order(w, dt):
    """First-order rotation increment I + [w]x*dt used by the predictor."""
    w = np.asarray(w, dtype=float)
    return np.eye(3) + hat(w * dt)
