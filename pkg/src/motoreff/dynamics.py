"""Quadrotor rigid-body truth model with per-motor efficiency injection.

Frame convention is down-positive (NED-style): e3 = [0, 0, 1] with gravity
along +z, so level flight has the body z-axis pointing down and collective
thrust enters the translational dynamics as -f_c * R @ e3 / m.
"""

from dataclasses import dataclass, field

import numpy as np

from .se3 import so3_exp

E3 = np.array([0.0, 0.0, 1.0])


def cross3(a, b):
    """Cross product of 3-vectors without np.cross's axis plumbing."""
    return np.array([
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ])


@dataclass(frozen=True)
class QuadParams:
    """Platform constants (F450-class defaults) and gravity."""

    m: float = 1.0
    J: tuple = (0.01466, 0.01466, 0.02848)
    d: float = 0.225
    c_tau_f: float = 0.009012
    g: float = 9.81

    def __post_init__(self):
        if self.m <= 0 or self.d <= 0 or self.c_tau_f <= 0 or self.g <= 0:
            raise ValueError("QuadParams entries must be strictly positive")
        if any(j <= 0 for j in self.J):
            raise ValueError("inertia diagonal must be strictly positive")

    @property
    def inertia(self):
        return np.diag(self.J)

    @property
    def inertia_diag(self):
        return np.asarray(self.J, dtype=float)


@dataclass
class QuadState:
    """Full rigid-body state; R maps body to inertial coordinates."""

    x: np.ndarray
    v: np.ndarray
    R: np.ndarray
    Omega: np.ndarray

    def __post_init__(self):
        self.x = np.asarray(self.x, dtype=float)
        self.v = np.asarray(self.v, dtype=float)
        self.R = np.asarray(self.R, dtype=float)
        self.Omega = np.asarray(self.Omega, dtype=float)

    def copy(self):
        return QuadState(self.x.copy(), self.v.copy(), self.R.copy(), self.Omega.copy())


@dataclass(frozen=True)
class Wrench:
    """Collective thrust (N) and body moment (N*m)."""

    f_c: float
    M: np.ndarray = field(default_factory=lambda: np.zeros(3))

    def __post_init__(self):
        object.__setattr__(self, "M", np.asarray(self.M, dtype=float))

    def as_vector(self):
        return np.array([self.f_c, self.M[0], self.M[1], self.M[2]])


def allocation_matrix(params):
    """4x4 map from per-motor thrusts to [f_c, M1, M2, M3]."""
    d = params.d
    c = params.c_tau_f
    return np.array([
        [1.0, 1.0, 1.0, 1.0],
        [-d, d, d, -d],
        [d, d, -d, -d],
        [-c, c, -c, c],
    ])


def thrusts_from_wrench(cmd, lam):
    """Invert the allocation: f_m = Lambda^-1 [f_c, M]."""
    return np.linalg.solve(lam, cmd.as_vector())


def apply_efficiency(f_m, s, lam):
    """Actual wrench Lambda @ diag(s) @ f_m delivered by degraded motors."""
    w = lam @ (np.asarray(s, dtype=float) * np.asarray(f_m, dtype=float))
    return Wrench(w[0], w[1:])


def perturb_thrusts(f_m, sigma_f, rng):
    """Multiplicative log-normal thrust noise f_i * exp(eps), eps ~ N(0, sigma_f).

    Draws come from the caller's seeded numpy Generator (ziggurat normals),
    four per call, so traces are reproducible for a fixed seed.
    """
    if sigma_f < 0:
        raise ValueError("sigma_f must be nonnegative")
    eps = rng.normal(0.0, sigma_f, 4)
    return np.asarray(f_m, dtype=float) * np.exp(eps)


def clip_thrusts(f_m, f_min, f_max):
    """Clamp per-motor thrusts to [f_min, f_max]; also report which clipped."""
    if f_min > f_max:
        raise ValueError("f_min must not exceed f_max")
    f_m = np.asarray(f_m, dtype=float)
    clipped = np.clip(f_m, f_min, f_max)
    return clipped, clipped != f_m


def step(state, actual, params, dt):
    """One explicit-Euler step of the rigid-body dynamics.

    Velocity/position use the constant-acceleration update, the angular rate
    uses the gyroscopic term at the current Omega, and the rotation advances
    by the exact exponential of the current body rate.
    """
    if dt <= 0:
        raise ValueError("dt must be positive")
    a = params.g * E3 - (actual.f_c / params.m) * (state.R @ E3)
    v_new = state.v + a * dt
    x_new = state.x + state.v * dt + 0.5 * a * dt * dt
    j_diag = params.inertia_diag
    omega = state.Omega
    domega = (actual.M - cross3(omega, j_diag * omega)) / j_diag
    omega_new = omega + domega * dt
    r_new = state.R @ so3_exp(omega * dt)
    return QuadState(x_new, v_new, r_new, omega_new)
