import dataclasses

import numpy as np
import pytest

from motoreff.scenarios import (
    DegradationSpec,
    FaultSpec,
    ScenarioAbort,
    ScenarioSpec,
    SpecError,
    compute_metrics,
    load_spec,
    metrics_from_series,
    run_scenario,
    spec_from_dict,
    true_efficiency,
    truth_at_ticks,
    truth_discontinuities,
    with_seed,
)

SPEC_DIR = "specs"


def short_spec(**kw):
    base = dict(name="t", duration=1.0, dt=0.004, seed=3, sigma_f=0.0, eta0=(1.0, 1.0, 1.0, 1.0))
    base.update(kw)
    return ScenarioSpec(**base).validate()


class TestTrueEfficiency:
    def test_initial_value(self):
        spec = short_spec(eta0=(1.0, 0.95, 0.9, 1.0))
        assert np.allclose(true_efficiency(spec, 0.0), [1.0, 0.95, 0.9, 1.0])

    def test_fault_override(self):
        spec = short_spec(faults=(FaultSpec(motor=2, t_start=0.2, t_end=0.6),))
        eta = true_efficiency(spec, 0.3)
        assert eta[1] == 0.5
        assert np.allclose(np.delete(eta, 1), 1.0)
        # Half-open interval: exact at the edges.
        assert true_efficiency(spec, 0.2)[1] == 0.5
        assert true_efficiency(spec, 0.6)[1] == 1.0

    def test_voltage_decay_formula(self):
        spec = short_spec(
            duration=10.0,
            degradation=DegradationSpec(kind="voltage", xi=0.05, v_start=12.0, v_end=10.0),
        )
        # At t = duration, dV = -2 V: factor e^{-0.1}.
        eta = true_efficiency(spec, 10.0)
        assert np.allclose(eta, np.exp(-0.1))
        assert np.isclose(eta[0], 0.90483742, atol=1e-7)

    def test_out_of_range_time(self):
        spec = short_spec()
        with pytest.raises(ValueError):
            true_efficiency(spec, 2.0)

    def test_discontinuities(self):
        spec = short_spec(faults=(FaultSpec(motor=1, t_start=0.2, t_end=0.6),))
        assert truth_discontinuities(spec) == [0.2, 0.6]


class TestSpecValidation:
    def test_seed_required(self):
        with pytest.raises(SpecError):
            ScenarioSpec(seed=None).validate()

    def test_fault_interval_bounds(self):
        with pytest.raises(SpecError):
            short_spec(faults=(FaultSpec(motor=1, t_start=0.5, t_end=2.0),))

    def test_bad_motor(self):
        with pytest.raises(SpecError):
            short_spec(faults=(FaultSpec(motor=5, t_start=0.1, t_end=0.2),))

    def test_unknown_key_rejected(self):
        with pytest.raises(SpecError):
            spec_from_dict({"seed": 1, "durration": 3.0})

    def test_unknown_section_key_rejected(self):
        with pytest.raises(SpecError):
            spec_from_dict({"seed": 1, "solver": {"mu": 10.0, "bogus": 1.0}})

    def test_invalid_config_values_are_spec_errors(self):
        for doc in (
            {"seed": 1, "solver": {"mu": 0.5}},
            {"seed": 1, "weights": {"w_min": 1.5}},
            {"seed": 1, "estimator": {"window": 0}},
            {"seed": 1, "ekf": {"rm_sigma": 0.0}},
        ):
            with pytest.raises(SpecError):
                spec_from_dict(doc)

    def test_fault_entry_must_be_table(self):
        with pytest.raises(SpecError):
            spec_from_dict({"seed": 1, "faults": [3]})

    def test_typed_values(self):
        with pytest.raises(SpecError):
            spec_from_dict({"seed": 1, "sigma_f": "high"})

    def test_bundled_specs_parse(self):
        for name in ("degradation", "abrupt_fault", "combined", "noise_free", "clipping"):
            spec = load_spec(f"{SPEC_DIR}/{name}.spec")
            assert spec.seed is not None

    def test_missing_file(self):
        with pytest.raises(SpecError):
            load_spec("specs/does_not_exist.spec")

    def test_seed_override(self):
        spec = short_spec()
        assert with_seed(spec, 99).seed == 99


class TestRunScenario:
    def test_deterministic_for_fixed_seed(self):
        spec = short_spec(duration=1.2, sigma_f=0.07, seed=11)
        t1 = run_scenario(spec)
        t2 = run_scenario(spec)
        assert np.array_equal(t1.est, t2.est)
        assert np.array_equal(t1.ekf, t2.ekf)
        assert np.array_equal(t1.truth, t2.truth)

    def test_flat_truth_noise_free(self):
        spec = short_spec(duration=1.2)
        trace = run_scenario(spec)
        assert np.allclose(trace.truth, 1.0)
        assert np.max(np.abs(trace.est - 1.0)) < 1e-6
        # EKF needs a little longer but stays near 1 by the end.
        assert np.max(np.abs(trace.ekf[-1] - 1.0)) < 0.05

    def test_nan_abort_carries_step_index(self):
        # Absurd gains destabilize the loop -> non-finite state.
        from motoreff.controller import Gains
        bad_gains = Gains(k_x=np.array([9e4, 9e4, 1.2e5]), k_v=np.array([0.001, 0.001, 0.001]))
        spec = short_spec(duration=5.0)
        with pytest.raises(ScenarioAbort) as exc:
            run_scenario(spec, gains=bad_gains)
        assert exc.value.step_index >= 0

    def test_trace_rows_are_consistent(self):
        spec = short_spec(duration=1.0, sigma_f=0.02, seed=2)
        trace = run_scenario(spec)
        n_ticks = len(trace.est_t)
        assert trace.est.shape == (n_ticks, 4)
        assert trace.ekf.shape == (n_ticks, 4)
        assert len(trace.weights_rows) == n_ticks * spec.estimator.window
        assert len(trace.iterates_rows) > 0
        windows = {row[0] for row in trace.kkt_rows}
        assert windows == set(range(n_ticks))


class TestMetrics:
    def test_perfect_estimate(self):
        t = np.arange(1, 1001) * 0.01
        truth = np.ones((1000, 4))
        rows = metrics_from_series(t, truth.copy(), truth, [], 0.01, "irls")
        for r in rows:
            assert r.rmse == 0.0 and r.std == 0.0 and r.max_spike == 0.0

    def test_constant_bias(self):
        t = np.arange(1, 1001) * 0.01
        truth = np.ones((1000, 4))
        est = truth + 0.03
        rows = metrics_from_series(t, est, truth, [], 0.01, "irls")
        for r in rows:
            assert np.isclose(r.rmse, 0.03)
            assert np.isclose(r.std, 0.0)
            assert np.isclose(r.max_spike, 0.03)

    def test_single_excursion_spike(self):
        t = np.arange(1, 1001) * 0.01
        truth = np.ones((1000, 4))
        est = truth.copy()
        est[700, 2] += 0.3
        rows = metrics_from_series(t, est, truth, [], 0.01, "irls")
        assert np.isclose(rows[2].max_spike, 0.3)

    def test_settling_region_excluded_from_rmse_not_spike(self):
        t = np.arange(1, 1001) * 0.01  # 0.01..10.0
        truth = np.ones((1000, 4))
        est = truth.copy()
        d = 5.0
        # Excursion entirely inside the 0.5 s settling window after d.
        mask = (t >= d) & (t < d + 0.5)
        est[mask, 0] = 1.4
        rows = metrics_from_series(t, est, truth, [d], 0.01, "irls")
        assert np.isclose(rows[0].rmse, 0.0)
        assert np.isclose(rows[0].max_spike, 0.4)

    def test_empty_settled_region_raises(self):
        t = np.array([0.5, 1.0])
        truth = np.ones((2, 4))
        with pytest.raises(ValueError):
            metrics_from_series(t, truth, truth, [], 0.01, "irls")

    def test_truth_lookup_alignment(self):
        spec = short_spec(duration=1.0)
        trace = run_scenario(spec, run_ekf=False)
        tt = truth_at_ticks(trace.step_times, trace.truth, trace.est_t, spec.dt)
        assert tt.shape == (len(trace.est_t), 4)

    def test_compute_metrics_both_methods(self):
        spec = dataclasses.replace(short_spec(duration=3.0, sigma_f=0.01, seed=4))
        rows = compute_metrics(run_scenario(spec))
        methods = {r.method for r in rows}
        assert methods == {"irls", "ekf"}
        assert len(rows) == 8
