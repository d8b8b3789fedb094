"""Sliding-window trajectory residuals and their analytic efficiency derivatives.

A segment is one measured transition (state_t -> state_t1) together with the
commanded per-motor thrusts. The predictor replays the transition with a
candidate efficiency vector s; residuals are measured-minus-predicted, and
every residual is affine in s, so the stacked Jacobian is constant per
segment.
"""

from dataclasses import dataclass

import numpy as np

from .dynamics import E3, QuadState, allocation_matrix, cross3
from .se3 import hat


@dataclass(frozen=True)
class WindowSegment:
    """One transition record consumed by the residual model.

    f_m_cmd holds commanded thrusts (pre-noise, pre-clip); actuator noise and
    clipping belong to the unknown plant, not the predictor.
    """

    t: float
    state_t: QuadState
    state_t1: QuadState
    f_m_cmd: np.ndarray
    dt: float


@dataclass(frozen=True)
class Prediction:
    v: np.ndarray
    x: np.ndarray
    Omega: np.ndarray
    dR: np.ndarray


def predict_next(seg, s, params):
    """One-step prediction from state_t under candidate efficiencies s.

    The incremental rotation dR uses the propagated body rate (itself a
    function of s), which is what makes the orientation residual sensitive
    to the moment channels.
    """
    lam = allocation_matrix(params)
    w = lam @ (np.asarray(s, dtype=float) * seg.f_m_cmd)
    st = seg.state_t
    dt = seg.dt
    a = params.g * E3 - (w[0] / params.m) * (st.R @ E3)
    v_hat = st.v + a * dt
    x_hat = st.x + st.v * dt + 0.5 * a * dt * dt
    j_diag = params.inertia_diag
    om_hat = st.Omega + (w[1:] - cross3(st.Omega, j_diag * st.Omega)) / j_diag * dt
    dr_hat = np.eye(3) + hat(om_hat) * dt
    return Prediction(v_hat, x_hat, om_hat, dr_hat)


def segment_residual(seg, s, params):
    """10-vector [r_v, r_x, r_Omega, r_R] of measured-minus-predicted terms."""
    pred = predict_next(seg, s, params)
    st1 = seg.state_t1
    dr = seg.state_t.R.T @ st1.R
    r_rot = 0.5 * np.trace(np.eye(3) - dr.T @ pred.dR)
    return np.concatenate([st1.v - pred.v, st1.x - pred.x, st1.Omega - pred.Omega, [r_rot]])


def segment_jacobian(seg, s, params):
    """Analytic 10x4 derivative of segment_residual with respect to s.

    Independent of s (the residual is affine); validated against central
    finite differences in the test suite.
    """
    del s
    lam = allocation_matrix(params)
    lam_m = lam[1:]
    st = seg.state_t
    f = np.asarray(seg.f_m_cmd, dtype=float)
    dt = seg.dt
    r3 = st.R[:, 2]
    j_v = (dt / params.m) * np.outer(r3, f)
    j_x = 0.5 * dt * j_v
    dom_ds = dt * (lam_m / params.inertia_diag[:, None]) * f[None, :]
    dr = st.R.T @ seg.state_t1.R
    q = np.array([dr[2, 1] - dr[1, 2], dr[0, 2] - dr[2, 0], dr[1, 0] - dr[0, 1]])
    j_rot = -(dt / 2.0) * (q @ dom_ds)
    return np.vstack([j_v, j_x, -dom_ds, j_rot[None, :]])


class WindowArrays:
    """Measurement tensors for a whole window, for vectorized evaluation."""

    def __init__(self, segments):
        if len(segments) == 0:
            raise ValueError("empty window")
        self.n = len(segments)
        self.dt = segments[0].dt
        self.r_t = np.stack([seg.state_t.R for seg in segments])
        self.r_t1 = np.stack([seg.state_t1.R for seg in segments])
        self.v_t = np.stack([seg.state_t.v for seg in segments])
        self.v_t1 = np.stack([seg.state_t1.v for seg in segments])
        self.x_t = np.stack([seg.state_t.x for seg in segments])
        self.x_t1 = np.stack([seg.state_t1.x for seg in segments])
        self.om_t = np.stack([seg.state_t.Omega for seg in segments])
        self.om_t1 = np.stack([seg.state_t1.Omega for seg in segments])
        self.f = np.stack([seg.f_m_cmd for seg in segments])
        self.delta_r = np.einsum("nji,njk->nik", self.r_t, self.r_t1)

    def residual_matrix(self, s, params):
        """(n, 10) residuals at candidate s."""
        dt = self.dt
        lam = allocation_matrix(params)
        w = (np.asarray(s, dtype=float) * self.f) @ lam.T
        re3 = self.r_t[:, :, 2]
        a = params.g * E3[None, :] - re3 * (w[:, 0] / params.m)[:, None]
        v_hat = self.v_t + a * dt
        x_hat = self.x_t + self.v_t * dt + 0.5 * a * dt * dt
        j_diag = params.inertia_diag
        om_j = self.om_t * j_diag[None, :]
        gyro = np.stack([
            self.om_t[:, 1] * om_j[:, 2] - self.om_t[:, 2] * om_j[:, 1],
            self.om_t[:, 2] * om_j[:, 0] - self.om_t[:, 0] * om_j[:, 2],
            self.om_t[:, 0] * om_j[:, 1] - self.om_t[:, 1] * om_j[:, 0],
        ], axis=1)
        om_hat = self.om_t + (w[:, 1:] - gyro) / j_diag[None, :] * dt
        dr_hat = np.broadcast_to(np.eye(3), (self.n, 3, 3)).copy()
        dr_hat[:, 0, 1] -= om_hat[:, 2] * dt
        dr_hat[:, 0, 2] += om_hat[:, 1] * dt
        dr_hat[:, 1, 0] += om_hat[:, 2] * dt
        dr_hat[:, 1, 2] -= om_hat[:, 0] * dt
        dr_hat[:, 2, 0] -= om_hat[:, 1] * dt
        dr_hat[:, 2, 1] += om_hat[:, 0] * dt
        r_rot = 0.5 * (3.0 - np.einsum("nij,nij->n", self.delta_r, dr_hat))
        return np.concatenate(
            [self.v_t1 - v_hat, self.x_t1 - x_hat, self.om_t1 - om_hat, r_rot[:, None]],
            axis=1,
        )

    def jacobian_tensor(self, params):
        """(n, 10, 4) analytic derivatives; constant across s."""
        dt = self.dt
        lam = allocation_matrix(params)
        lam_m = lam[1:]
        re3 = self.r_t[:, :, 2]
        j_v = (dt / params.m) * np.einsum("ni,nj->nij", re3, self.f)
        j_x = 0.5 * dt * j_v
        dom_ds = dt * (lam_m / params.inertia_diag[:, None])[None, :, :] * self.f[:, None, :]
        dr = self.delta_r
        q = np.stack(
            [dr[:, 2, 1] - dr[:, 1, 2], dr[:, 0, 2] - dr[:, 2, 0], dr[:, 1, 0] - dr[:, 0, 1]],
            axis=1,
        )
        j_rot = -(dt / 2.0) * np.einsum("nk,nkj->nj", q, dom_ds)
        return np.concatenate([j_v, j_x, -dom_ds, j_rot[:, None, :]], axis=1)


def stack_window(segments, s, params):
    """Stacked residual vector (10n,) and Jacobian (10n, 4), scaled by 1/sqrt(n)."""
    arrays = segments if isinstance(segments, WindowArrays) else WindowArrays(segments)
    scale = 1.0 / np.sqrt(arrays.n)
    r = arrays.residual_matrix(s, params).reshape(-1) * scale
    jac = arrays.jacobian_tensor(params).reshape(-1, 4) * scale
    return r, jac
