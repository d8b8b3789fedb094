"""22-state EKF baseline: pose, twist, flattened rotation, and random-walk efficiencies.

State ordering is [x(3), v(3), Omega(3), vec(R)(9, row-major), eta(4)]. The
mean propagates through the same discrete model as the sliding-window
predictor (first-order rotation increment with the propagated body rate);
vec(R) is filtered without manifold constraints. The transition Jacobian is
a central finite difference, evaluated in one batched call.
"""

from dataclasses import dataclass

import numpy as np

from .dynamics import allocation_matrix

N_STATE = 22
N_MEAS = 18
_IDX_X = slice(0, 3)
_IDX_V = slice(3, 6)
_IDX_OM = slice(6, 9)
_IDX_R = slice(9, 18)
_IDX_ETA = slice(18, 22)


@dataclass(frozen=True)
class EkfConfig:
    """Process/measurement noise conventions and the calibrated Q_eta.

    q_eta is the random-walk intensity of the efficiency block (per second);
    it is the single knob calibrated so the degradation-scenario RMSE
    matches the sliding-window estimator within 10%, then frozen.
    """

    q_x: float = 1e-8
    q_v: float = 1e-5
    q_omega: float = 1e-4
    q_r: float = 1e-8
    q_eta: float = 2e-5
    rm_sigma: float = 1e-3
    h_fd: float = 1e-6
    eta0: float = 0.5
    p0_state: float = 1e-6
    p0_eta: float = 0.25

    def __post_init__(self):
        if min(self.q_x, self.q_v, self.q_omega, self.q_r, self.q_eta) < 0:
            raise ValueError("process noise intensities must be nonnegative")
        if self.rm_sigma <= 0 or self.h_fd <= 0:
            raise ValueError("rm_sigma and h_fd must be positive")
        if self.p0_state < 0 or self.p0_eta < 0:
            raise ValueError("initial variances must be nonnegative")

    def q_diag(self):
        return np.concatenate([
            np.full(3, self.q_x),
            np.full(3, self.q_v),
            np.full(3, self.q_omega),
            np.full(9, self.q_r),
            np.full(4, self.q_eta),
        ])


@dataclass
class EkfState:
    mean: np.ndarray
    cov: np.ndarray


def pack_state(x, v, omega, rot, eta):
    return np.concatenate([x, v, omega, np.asarray(rot).reshape(9), eta])


def transition_batch(means, f_m_cmd, params, dt):
    """Discrete transition applied to a (22, K) batch of state columns."""
    means = np.atleast_2d(means.T).T if means.ndim == 1 else means
    x = means[_IDX_X]
    v = means[_IDX_V]
    om = means[_IDX_OM]
    rot = means[_IDX_R].reshape(3, 3, -1)
    eta = means[_IDX_ETA]

    lam = allocation_matrix(params)
    scaled = eta * f_m_cmd[:, None]
    wrench = lam @ scaled
    f_c = wrench[0]
    moments = wrench[1:]

    re3 = rot[:, 2, :]
    a = -re3 * (f_c / params.m)[None, :]
    a[2] += params.g
    v_new = v + a * dt
    x_new = x + v * dt + 0.5 * a * dt * dt

    j = params.inertia_diag
    om_j = om * j[:, None]
    gyro = np.stack([
        om[1] * om_j[2] - om[2] * om_j[1],
        om[2] * om_j[0] - om[0] * om_j[2],
        om[0] * om_j[1] - om[1] * om_j[0],
    ])
    om_new = om + (moments - gyro) / j[:, None] * dt

    # R (I + [om_new]x dt), batched over the trailing axis.
    k = np.zeros((3, 3, om.shape[1]))
    k[0, 1] = -om_new[2] * dt
    k[0, 2] = om_new[1] * dt
    k[1, 0] = om_new[2] * dt
    k[1, 2] = -om_new[0] * dt
    k[2, 0] = -om_new[1] * dt
    k[2, 1] = om_new[0] * dt
    rot_new = rot + np.einsum("ijk,jlk->ilk", rot, k)

    out = np.empty_like(means)
    out[_IDX_X] = x_new
    out[_IDX_V] = v_new
    out[_IDX_OM] = om_new
    out[_IDX_R] = rot_new.reshape(9, -1)
    out[_IDX_ETA] = eta
    return out


def transition(mean, f_m_cmd, params, dt):
    return transition_batch(mean[:, None], f_m_cmd, params, dt)[:, 0]


def transition_jacobian(mean, f_m_cmd, params, dt, h=1e-6):
    """Central-difference Jacobian of the transition, one batched evaluation."""
    eye = np.eye(N_STATE)
    pts = np.concatenate([mean[:, None] + h * eye, mean[:, None] - h * eye], axis=1)
    prop = transition_batch(pts, f_m_cmd, params, dt)
    return (prop[:, :N_STATE] - prop[:, N_STATE:]) / (2.0 * h)


def ekf_predict(state, f_m_cmd, params, dt, cfg):
    """Mean propagation plus F P F^T + Q dt with re-symmetrization."""
    f_mat = transition_jacobian(state.mean, f_m_cmd, params, dt, cfg.h_fd)
    mean = transition(state.mean, f_m_cmd, params, dt)
    cov = f_mat @ state.cov @ f_mat.T + np.diag(cfg.q_diag()) * dt
    cov = 0.5 * (cov + cov.T)
    return EkfState(mean, cov)


def joseph_update(mean, cov, z, h_mat, rm):
    """Generic Kalman measurement update in Joseph form (PSD-preserving)."""
    innov = z - h_mat @ mean
    s_mat = h_mat @ cov @ h_mat.T + rm
    try:
        chol = np.linalg.cholesky(s_mat)
    except np.linalg.LinAlgError as exc:
        raise ValueError("innovation covariance is singular; check Rm") from exc
    gain = np.linalg.solve(chol.T, np.linalg.solve(chol, h_mat @ cov)).T
    mean_new = mean + gain @ innov
    ikh = np.eye(cov.shape[0]) - gain @ h_mat
    cov_new = ikh @ cov @ ikh.T + gain @ rm @ gain.T
    return mean_new, 0.5 * (cov_new + cov_new.T)


_H_FULL = np.hstack([np.eye(N_MEAS), np.zeros((N_MEAS, N_STATE - N_MEAS))])


def ekf_update(state, measurement, rm):
    """Full-state measurement update: z = [x, v, Omega, vec(R)]."""
    mean, cov = joseph_update(state.mean, state.cov, measurement, _H_FULL, rm)
    return EkfState(mean, cov)


class EkfEstimator:
    """Streaming predict/update filter emitting per-motor efficiency estimates."""

    def __init__(self, params, cfg, initial_state):
        self.params = params
        self.cfg = cfg
        mean = pack_state(
            initial_state.x, initial_state.v, initial_state.Omega, initial_state.R, np.full(4, cfg.eta0)
        )
        p0 = np.concatenate([np.full(N_MEAS, cfg.p0_state), np.full(4, cfg.p0_eta)])
        self.state = EkfState(mean, np.diag(p0))
        self.rm = np.eye(N_MEAS) * cfg.rm_sigma**2

    @property
    def eta(self):
        return self.state.mean[_IDX_ETA].copy()

    @property
    def eta_clamped(self):
        """Reporting-only clamp; the filter state itself is unconstrained."""
        return np.clip(self.eta, 0.0, 1.2)

    def step(self, f_m_cmd, measured_state, dt):
        """Predict with the commanded thrusts, then update on the measured state."""
        self.state = ekf_predict(self.state, f_m_cmd, self.params, dt, self.cfg)
        z = np.concatenate([measured_state.x, measured_state.v, measured_state.Omega, measured_state.R.reshape(9)])
        self.state = ekf_update(self.state, z, self.rm)


def ekf_run(segments, params, cfg, initial_state, tick_times=None):
    """Filter a segment stream; emit (t, eta) at tick_times (default: every step)."""
    est = EkfEstimator(params, cfg, initial_state)
    ticks = None if tick_times is None else set(np.round(np.asarray(tick_times) / segments[0].dt).astype(int))
    out_t, out_eta = [], []
    for k, seg in enumerate(segments):
        est.step(seg.f_m_cmd, seg.state_t1, seg.dt)
        t = seg.t + seg.dt
        if ticks is None or int(round(t / seg.dt)) in ticks:
            out_t.append(t)
            out_eta.append(est.eta)
    return np.array(out_t), np.array(out_eta)
