"""Geometric tracking controller on SE(3) and the benchmark circle trajectory."""

from dataclasses import dataclass, field

import numpy as np

from .dynamics import E3, Wrench, cross3
from .se3 import hat, vee

_ORTHO_TOL = 1e-6


@dataclass(frozen=True)
class Gains:
    """Diagonal controller gains, stored as the diagonal 3-vectors."""

    k_x: np.ndarray = field(default_factory=lambda: np.array([9.0, 9.0, 12.0]))
    k_v: np.ndarray = field(default_factory=lambda: np.array([7.0, 7.0, 12.0]))
    k_R: np.ndarray = field(default_factory=lambda: np.array([10.0, 10.0, 10.0]))
    k_Omega: np.ndarray = field(default_factory=lambda: np.array([2.0, 2.0, 2.0]))

    def __post_init__(self):
        for name in ("k_x", "k_v", "k_R", "k_Omega"):
            g = np.asarray(getattr(self, name), dtype=float)
            if g.shape != (3,) or np.any(g <= 0):
                raise ValueError(f"{name} must be three strictly positive entries")
            object.__setattr__(self, name, g)


@dataclass
class DesiredState:
    """Reference trajectory sample; R_d is derived by the attitude planner."""

    x_d: np.ndarray
    v_d: np.ndarray
    a_d: np.ndarray
    b_1d: np.ndarray
    Omega_d: np.ndarray = field(default_factory=lambda: np.zeros(3))
    dOmega_d: np.ndarray = field(default_factory=lambda: np.zeros(3))
    R_d: np.ndarray | None = None

    def __post_init__(self):
        self.b_1d = np.asarray(self.b_1d, dtype=float)
        if abs(np.linalg.norm(self.b_1d) - 1.0) > 1e-9:
            raise ValueError("b_1d must be a unit vector")


def _check_rotation(r, name):
    if np.max(np.abs(r.T @ r - np.eye(3))) > _ORTHO_TOL:
        raise ValueError(f"{name} is not orthonormal")


def tracking_errors(state, des):
    """Position, velocity, attitude, and rate errors (e_x, e_v, e_R, e_Omega)."""
    _check_rotation(state.R, "R")
    _check_rotation(des.R_d, "R_d")
    e_x = state.x - des.x_d
    e_v = state.v - des.v_d
    m = des.R_d.T @ state.R - state.R.T @ des.R_d
    e_r = 0.5 * vee(m, tol=1e-9)
    e_omega = state.Omega - state.R.T @ des.R_d @ des.Omega_d
    return e_x, e_v, e_r, e_omega


def _thrust_vector(e_x, e_v, a_d, params, gains):
    return -gains.k_x * e_x - gains.k_v * e_v - params.m * params.g * E3 + params.m * a_d


def desired_attitude(e_x, e_v, a_d, b_1d, params, gains):
    """Desired rotation with columns [b_2d x b_3d, b_2d, b_3d].

    b_3d opposes the commanded total-force direction; b_2d completes the
    frame against the heading reference b_1d.
    """
    vec = _thrust_vector(e_x, e_v, a_d, params, gains)
    norm = np.linalg.norm(vec)
    if norm < 1e-9:
        raise ValueError("degenerate thrust direction: command vector is ~zero")
    b_3d = -vec / norm
    c = cross3(b_3d, b_1d)
    c_norm = np.linalg.norm(c)
    if c_norm < 1e-9:
        raise ValueError("b_1d is parallel to the desired thrust axis")
    b_2d = c / c_norm
    return np.column_stack([cross3(b_2d, b_3d), b_2d, b_3d])


def control_wrench(state, des, params, gains):
    """Collective thrust and body moment tracking the desired state.

    Fills des.R_d from the attitude planner as a side effect so callers can
    chain into tracking diagnostics.
    """
    e_x = state.x - des.x_d
    e_v = state.v - des.v_d
    des.R_d = desired_attitude(e_x, e_v, des.a_d, des.b_1d, params, gains)
    _, _, e_r, e_omega = tracking_errors(state, des)
    f_c = -float(_thrust_vector(e_x, e_v, des.a_d, params, gains) @ (state.R @ E3))
    j_diag = params.inertia_diag
    rtrd = state.R.T @ des.R_d
    moment = (
        -gains.k_R * e_r
        - gains.k_Omega * e_omega
        + cross3(state.Omega, j_diag * state.Omega)
        - j_diag * (hat(state.Omega) @ rtrd @ des.Omega_d - rtrd @ des.dOmega_d)
    )
    return Wrench(f_c, moment)


def circle_trajectory(t):
    """Benchmark reference: 3 m radius circle at constant depth with yaw sweep."""
    if t < 0:
        raise ValueError("t must be nonnegative")
    w = 0.2 * np.pi
    wy = 0.1 * np.pi
    c, s = np.cos(w * t), np.sin(w * t)
    return DesiredState(
        x_d=np.array([3.0 * c, 3.0 * s, -1.0]),
        v_d=np.array([-3.0 * w * s, 3.0 * w * c, 0.0]),
        a_d=np.array([-3.0 * w * w * c, -3.0 * w * w * s, 0.0]),
        b_1d=np.array([np.cos(wy * t), np.sin(wy * t), 0.0]),
    )
