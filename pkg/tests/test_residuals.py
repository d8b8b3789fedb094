import numpy as np
import pytest

from motoreff.dynamics import QuadParams, QuadState, allocation_matrix, apply_efficiency, step
from motoreff.residuals import WindowArrays, WindowSegment, predict_next, segment_jacobian, segment_residual, stack_window
from motoreff.se3 import so3_exp

PARAMS = QuadParams()
LAM = allocation_matrix(PARAMS)
DT = 0.004


def random_segment(rng, dt=DT):
    """Segment with arbitrary (not model-consistent) endpoint measurements."""
    state_t = QuadState(
        rng.uniform(-3, 3, 3),
        rng.uniform(-2, 2, 3),
        so3_exp(rng.uniform(-1.5, 1.5, 3)),
        rng.uniform(-1.5, 1.5, 3),
    )
    state_t1 = QuadState(
        state_t.x + state_t.v * dt + rng.uniform(-1e-3, 1e-3, 3),
        state_t.v + rng.uniform(-0.05, 0.05, 3),
        state_t.R @ so3_exp(state_t.Omega * dt + rng.uniform(-1e-3, 1e-3, 3)),
        state_t.Omega + rng.uniform(-0.05, 0.05, 3),
    )
    return WindowSegment(0.0, state_t, state_t1, rng.uniform(0.3, 5.0, 4), dt)


def consistent_segment(state_t, f_m, s_true, dt=DT):
    """Endpoint generated by the predictor's own integration scheme."""
    pred = predict_next(WindowSegment(0.0, state_t, state_t, f_m, dt), s_true, PARAMS)
    state_t1 = QuadState(pred.x, pred.v, state_t.R @ pred.dR, pred.Omega)
    return WindowSegment(0.0, state_t, state_t1, f_m, dt)


def hover_segment(s_true, f_scale=1.0):
    f_m = np.full(4, f_scale * PARAMS.m * PARAMS.g / 4)
    state_t = QuadState(np.zeros(3), np.zeros(3), np.eye(3), np.zeros(3))
    return consistent_segment(state_t, f_m, s_true)


def fd_jacobian(seg, s, h=1e-6):
    cols = []
    for j in range(4):
        e = np.zeros(4)
        e[j] = h
        cols.append((segment_residual(seg, s + e, PARAMS) - segment_residual(seg, s - e, PARAMS)) / (2 * h))
    return np.column_stack(cols)


class TestPredictNext:
    def test_consistent_model_reproduces_endpoint(self):
        s_true = np.array([0.9, 0.8, 0.95, 1.0])
        rng = np.random.default_rng(2)
        state_t = QuadState(rng.uniform(-1, 1, 3), rng.uniform(-1, 1, 3), so3_exp(rng.uniform(-1, 1, 3)), rng.uniform(-1, 1, 3))
        seg = consistent_segment(state_t, rng.uniform(0.5, 4, 4), s_true)
        pred = predict_next(seg, s_true, PARAMS)
        assert np.allclose(pred.v, seg.state_t1.v, atol=1e-15)
        assert np.allclose(pred.x, seg.state_t1.x, atol=1e-15)
        assert np.allclose(pred.Omega, seg.state_t1.Omega, atol=1e-15)

    def test_zero_thrust_prediction_independent_of_s(self):
        rng = np.random.default_rng(3)
        seg = random_segment(rng)
        seg = WindowSegment(seg.t, seg.state_t, seg.state_t1, np.zeros(4), seg.dt)
        p1 = predict_next(seg, np.full(4, 0.2), PARAMS)
        p2 = predict_next(seg, np.full(4, 1.0), PARAMS)
        assert np.array_equal(p1.v, p2.v)
        assert np.array_equal(p1.Omega, p2.Omega)
        assert np.array_equal(segment_jacobian(seg, np.full(4, 0.5), PARAMS), np.zeros((10, 4)))

    def test_collective_thrust_sensitivity_at_hover(self):
        seg = hover_segment(np.ones(4))
        s = np.ones(4)
        ds = np.array([0.01, 0.0, 0.0, 0.0])
        # f_c_hat shifts by 0.01 * f_1, which shows in the predicted vz.
        p0 = predict_next(seg, s, PARAMS)
        p1 = predict_next(seg, s + ds, PARAMS)
        dvz = p1.v[2] - p0.v[2]
        assert np.isclose(dvz, -0.01 * seg.f_m_cmd[0] * DT / PARAMS.m, rtol=1e-12)


class TestSegmentResidual:
    def test_identity_increment_gives_zero_rotation_residual(self):
        # delta_R = delta_R_hat = I happens at hover with uniform efficiency.
        seg = hover_segment(np.full(4, 0.9))
        r = segment_residual(seg, np.full(4, 0.9), PARAMS)
        assert np.array_equal(r, np.zeros(10))

    def test_consistent_measurements_vector_blocks_vanish(self):
        s_true = np.array([0.9, 0.8, 0.95, 1.0])
        rng = np.random.default_rng(5)
        state_t = QuadState(rng.uniform(-1, 1, 3), rng.uniform(-1, 1, 3), so3_exp(rng.uniform(-1, 1, 3)), rng.uniform(-0.5, 0.5, 3))
        seg = consistent_segment(state_t, rng.uniform(0.5, 4, 4), s_true)
        r = segment_residual(seg, s_true, PARAMS)
        assert np.max(np.abs(r[:9])) <= 1e-12
        # First-order increment floor: r_R = -||om_hat||^2 dt^2 even at truth.
        om_hat = predict_next(seg, s_true, PARAMS).Omega
        assert np.isclose(r[9], -float(om_hat @ om_hat) * DT * DT, atol=1e-15)

    def test_candidate_above_truth_leaves_positive_vz_residual(self):
        # Truth 0.2 below the evaluated candidate on motor 1: the vehicle
        # accelerates down-positive more than predicted.
        s_eval = np.ones(4)
        s_true = s_eval - np.array([0.2, 0.0, 0.0, 0.0])
        seg = hover_segment(s_true)
        r = segment_residual(seg, s_eval, PARAMS)
        assert np.isclose(r[2], 0.2 * seg.f_m_cmd[0] * DT / PARAMS.m, rtol=1e-12)
        assert np.allclose(r[0:2], 0.0, atol=1e-15)

    def test_translation_invariance_of_position_residual(self):
        rng = np.random.default_rng(8)
        seg = random_segment(rng)
        shift = np.array([5.0, -3.0, 2.0])
        shifted = WindowSegment(
            seg.t,
            QuadState(seg.state_t.x + shift, seg.state_t.v, seg.state_t.R, seg.state_t.Omega),
            QuadState(seg.state_t1.x + shift, seg.state_t1.v, seg.state_t1.R, seg.state_t1.Omega),
            seg.f_m_cmd,
            seg.dt,
        )
        s = np.full(4, 0.85)
        assert np.allclose(segment_residual(seg, s, PARAMS), segment_residual(shifted, s, PARAMS), atol=1e-12)


class TestSegmentJacobian:
    def test_matches_finite_differences(self):
        rng = np.random.default_rng(13)
        worst = 0.0
        for _ in range(200):
            seg = random_segment(rng)
            s = rng.uniform(0.3, 1.0, 4)
            j_an = segment_jacobian(seg, s, PARAMS)
            j_fd = fd_jacobian(seg, s)
            err = np.max(np.abs(j_fd - j_an)) / np.max(np.abs(j_an))
            worst = max(worst, err)
        assert worst < 1e-6

    def test_hover_velocity_rows_structure(self):
        seg = hover_segment(np.ones(4))
        jac = segment_jacobian(seg, np.ones(4), PARAMS)
        f = seg.f_m_cmd
        assert np.allclose(jac[0], 0.0)
        assert np.allclose(jac[1], 0.0)
        assert np.allclose(jac[2], DT / PARAMS.m * f, rtol=1e-14)

    def test_affine_identity_on_all_rows(self):
        rng = np.random.default_rng(21)
        for _ in range(50):
            seg = random_segment(rng)
            s1 = rng.uniform(0.2, 1.0, 4)
            s2 = rng.uniform(0.2, 1.0, 4)
            jac = segment_jacobian(seg, s1, PARAMS)
            lhs = segment_residual(seg, s1, PARAMS) - segment_residual(seg, s2, PARAMS)
            assert np.max(np.abs(lhs - jac @ (s1 - s2))) <= 1e-10


class TestStackWindow:
    def test_single_segment_unscaled(self):
        rng = np.random.default_rng(31)
        seg = random_segment(rng)
        s = np.full(4, 0.9)
        r, jac = stack_window([seg], s, PARAMS)
        assert np.allclose(r, segment_residual(seg, s, PARAMS), rtol=1e-13, atol=5e-16)
        assert np.allclose(jac, segment_jacobian(seg, s, PARAMS), rtol=1e-13, atol=5e-16)

    def test_four_identical_segments_preserve_norm(self):
        rng = np.random.default_rng(37)
        seg = random_segment(rng)
        s = np.full(4, 0.9)
        r1, _ = stack_window([seg], s, PARAMS)
        r4, _ = stack_window([seg] * 4, s, PARAMS)
        assert np.isclose(np.linalg.norm(r4), np.linalg.norm(r1), rtol=1e-12)

    def test_vectorized_matches_per_segment(self):
        rng = np.random.default_rng(41)
        segs = [random_segment(rng) for _ in range(7)]
        s = rng.uniform(0.4, 1.0, 4)
        r, jac = stack_window(segs, s, PARAMS)
        scale = 1.0 / np.sqrt(7)
        r_ref = np.concatenate([segment_residual(g, s, PARAMS) for g in segs]) * scale
        j_ref = np.vstack([segment_jacobian(g, s, PARAMS) for g in segs]) * scale
        assert np.allclose(r, r_ref, rtol=1e-13, atol=5e-16)
        assert np.allclose(jac, j_ref, rtol=1e-13, atol=5e-16)

    def test_stacked_jacobian_matches_stacked_fd(self):
        rng = np.random.default_rng(43)
        segs = [random_segment(rng) for _ in range(5)]
        s = rng.uniform(0.4, 1.0, 4)
        _, jac = stack_window(segs, s, PARAMS)
        h = 1e-6
        cols = []
        for j in range(4):
            e = np.zeros(4)
            e[j] = h
            rp, _ = stack_window(segs, s + e, PARAMS)
            rm, _ = stack_window(segs, s - e, PARAMS)
            cols.append((rp - rm) / (2 * h))
        j_fd = np.column_stack(cols)
        assert np.max(np.abs(j_fd - jac)) / np.max(np.abs(jac)) < 1e-6

    def test_empty_window_rejected(self):
        with pytest.raises(ValueError):
            stack_window([], np.ones(4), PARAMS)

    def test_affinity_of_stacked_residual(self):
        rng = np.random.default_rng(47)
        segs = [random_segment(rng) for _ in range(6)]
        arrays = WindowArrays(segs)
        s1, s2 = rng.uniform(0.3, 1.0, 4), rng.uniform(0.3, 1.0, 4)
        r1, jac = stack_window(arrays, s1, PARAMS)
        r2, _ = stack_window(arrays, s2, PARAMS)
        assert np.max(np.abs((r1 - r2) - jac @ (s1 - s2))) <= 1e-10


def test_simulator_segments_have_zero_vector_residual_at_truth():
    """Closed-loop simulator transitions match the predictor exactly on v/x/Omega."""
    s_true = np.array([0.9, 0.8, 0.95, 1.0])
    rng = np.random.default_rng(53)
    st = QuadState(rng.uniform(-1, 1, 3), rng.uniform(-1, 1, 3), so3_exp(rng.uniform(-1, 1, 3)), rng.uniform(-0.5, 0.5, 3))
    f_m = rng.uniform(0.5, 4, 4)
    actual = apply_efficiency(f_m, s_true, LAM)
    st1 = step(st, actual, PARAMS, DT)
    seg = WindowSegment(0.0, st, st1, f_m, DT)
    r = segment_residual(seg, s_true, PARAMS)
    assert np.max(np.abs(r[:9])) <= 1e-12
    # Rotation channel carries only the documented O(dt^2) approximation floor.
    assert abs(r[9]) <= 2.0 * (np.linalg.norm(st.Omega) + 1) ** 2 * DT * DT
