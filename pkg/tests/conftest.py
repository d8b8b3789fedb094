import numpy as np
import pytest

from motoreff.controller import Gains, circle_trajectory, control_wrench, desired_attitude
from motoreff.dynamics import (
    QuadParams,
    QuadState,
    allocation_matrix,
    apply_efficiency,
    clip_thrusts,
    perturb_thrusts,
    step,
    thrusts_from_wrench,
)
from motoreff.residuals import WindowSegment


@pytest.fixture(scope="session")
def params():
    return QuadParams()


@pytest.fixture(scope="session")
def gains():
    return Gains()


def initial_state(params, gains):
    des0 = circle_trajectory(0.0)
    r0 = desired_attitude(np.zeros(3), np.zeros(3), des0.a_d, des0.b_1d, params, gains)
    return QuadState(des0.x_d.copy(), des0.v_d.copy(), r0, np.zeros(3))


def closed_loop_segments(n_steps, s_of_t, params=None, gains=None, dt=0.004, sigma_f=0.0, seed=0, clip=None):
    """Fly the benchmark circle and return the measured transition segments.

    s_of_t maps time to the true efficiency 4-vector; clip is an optional
    (f_min, f_max) pair applied to the noisy thrusts.
    """
    params = params or QuadParams()
    gains = gains or Gains()
    lam = allocation_matrix(params)
    rng = np.random.default_rng(seed)
    st = initial_state(params, gains)
    segments = []
    for k in range(n_steps):
        t = k * dt
        wrench = control_wrench(st, circle_trajectory(t), params, gains)
        f_m = thrusts_from_wrench(wrench, lam)
        f_act = perturb_thrusts(f_m, sigma_f, rng)
        if clip is not None:
            f_act, _ = clip_thrusts(f_act, *clip)
        st1 = step(st, apply_efficiency(f_act, s_of_t(t), lam), params, dt)
        segments.append(WindowSegment(t, st, st1, f_m, dt))
        st = st1
    return segments
