"""Declarative scenario engine: truth profiles, closed-loop runs, and metrics.

Scenario files are TOML documents whose sections mirror ScenarioSpec; every
key is typed, every unknown key is an error. See specs/ for the bundled
scenarios (degradation, abrupt faults, combined, clipping, noise_free).
"""

import dataclasses
import os
import sys
from dataclasses import dataclass, field

import numpy as np

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .controller import Gains, circle_trajectory, control_wrench, desired_attitude
from .dynamics import (
    QuadParams,
    QuadState,
    allocation_matrix,
    apply_efficiency,
    clip_thrusts,
    perturb_thrusts,
    step,
    thrusts_from_wrench,
)
from .ekf import EkfConfig, EkfEstimator
from .ipm import IpmError, SolverConfig
from .irls import EstimatorConfig, LocalWeights, OnlineEstimator
from .residuals import WindowSegment
from .robust import WeightConfig

RMSE_SETTLE_S = 0.5  # error samples this close after a truth jump are excluded
RMSE_START_S = 2.0  # startup transient excluded from rmse/std


class SpecError(ValueError):
    """Malformed or inconsistent scenario specification."""


class ScenarioAbort(RuntimeError):
    """Numerical blow-up during a run; carries the failing step index."""

    def __init__(self, step_index, message):
        super().__init__(message)
        self.step_index = step_index


@dataclass(frozen=True)
class FaultSpec:
    motor: int
    t_start: float
    t_end: float
    eta_fault: float = 0.5


@dataclass(frozen=True)
class DegradationSpec:
    kind: str = "none"  # "none" | "voltage"
    xi: float = 0.05
    v_start: float = 12.6
    v_end: float = 10.8


@dataclass(frozen=True)
class ClippingSpec:
    enabled: bool = False
    f_min: float = 0.0
    f_max: float = 6.0


@dataclass(frozen=True)
class ScenarioSpec:
    name: str = "scenario"
    duration: float = 30.0
    dt: float = 0.004
    trajectory: str = "circle"
    seed: int | None = None
    sigma_f: float = 0.0
    eta0: tuple = (1.0, 0.95, 0.9, 1.0)
    degradation: DegradationSpec = field(default_factory=DegradationSpec)
    faults: tuple = ()
    clipping: ClippingSpec = field(default_factory=ClippingSpec)
    estimator: EstimatorConfig = field(default_factory=EstimatorConfig)
    ekf: EkfConfig = field(default_factory=EkfConfig)

    def validate(self):
        if self.duration <= 0 or self.dt <= 0:
            raise SpecError("duration and dt must be positive")
        if self.trajectory != "circle":
            raise SpecError(f"unknown trajectory {self.trajectory!r}")
        if self.seed is None:
            raise SpecError("a seed is required; wall-clock seeding is not supported")
        if self.sigma_f < 0:
            raise SpecError("sigma_f must be nonnegative")
        if len(self.eta0) != 4 or any(not 0 < e <= 1.05 for e in self.eta0):
            raise SpecError("eta0 must be four efficiencies in (0, 1.05]")
        if self.degradation.kind not in ("none", "voltage"):
            raise SpecError(f"unknown degradation kind {self.degradation.kind!r}")
        for f in self.faults:
            if not 1 <= f.motor <= 4:
                raise SpecError("fault motor must be 1..4")
            if not (0 <= f.t_start < f.t_end <= self.duration):
                raise SpecError("fault interval must lie within the run duration")
            if not 0 < f.eta_fault <= 1.05:
                raise SpecError("eta_fault must lie in (0, 1.05]")
        return self


def _coerce(section, key, value, expected):
    if expected is float:
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise SpecError(f"{section}.{key}: expected a number")
        return float(value)
    if expected is int:
        if isinstance(value, bool) or not isinstance(value, int):
            raise SpecError(f"{section}.{key}: expected an integer")
        return value
    if expected is bool:
        if not isinstance(value, bool):
            raise SpecError(f"{section}.{key}: expected a boolean")
        return value
    if expected is str:
        if not isinstance(value, str):
            raise SpecError(f"{section}.{key}: expected a string")
        return value
    raise AssertionError(expected)


def _take_section(doc, name):
    section = doc.pop(name, {})
    if not isinstance(section, dict):
        raise SpecError(f"[{name}] must be a table")
    return dict(section)


def _build(section_name, section, fields):
    out = {}
    for key, value in section.items():
        if key not in fields:
            raise SpecError(f"unknown key {section_name}.{key}")
        out[key] = _coerce(section_name, key, value, fields[key])
    return out


_SOLVER_FIELDS = {
    "mu": float, "eps_feas": float, "eps_gap": float, "kappa": float, "zeta": float,
    "eps_tol": float, "gamma": float, "eta_min": float, "eta_max": float,
    "max_newton_iters": int,
}
_WEIGHT_FIELDS = {"z_soft": float, "p": float, "w_min": float, "z_hard": float, "eps_min": float}
_LOCAL_FIELDS = {"g_v": float, "g_x": float, "g_omega": float, "g_r": float}
_ESTIMATOR_FIELDS = {"window": int, "stride": int, "n_irls": int, "s0": float}
_EKF_FIELDS = {
    "q_x": float, "q_v": float, "q_omega": float, "q_r": float, "q_eta": float,
    "rm_sigma": float, "h_fd": float, "eta0": float, "p0_state": float, "p0_eta": float,
}
_DEGRADATION_FIELDS = {"kind": str, "xi": float, "v_start": float, "v_end": float}
_CLIPPING_FIELDS = {"enabled": bool, "f_min": float, "f_max": float}
_FAULT_FIELDS = {"motor": int, "t_start": float, "t_end": float, "eta_fault": float}
_TOP_FIELDS = {"name": str, "duration": float, "dt": float, "trajectory": str, "seed": int, "sigma_f": float}


def spec_from_dict(doc, name_fallback="scenario"):
    doc = dict(doc)
    eta0 = doc.pop("eta0", None)
    top = _build("(top level)", {k: v for k, v in doc.items() if k in _TOP_FIELDS}, _TOP_FIELDS)
    for k in _TOP_FIELDS:
        doc.pop(k, None)

    degradation = DegradationSpec(**_build("degradation", _take_section(doc, "degradation"), _DEGRADATION_FIELDS))
    clipping = ClippingSpec(**_build("clipping", _take_section(doc, "clipping"), _CLIPPING_FIELDS))

    faults = []
    raw_faults = doc.pop("faults", [])
    if not isinstance(raw_faults, list):
        raise SpecError("faults must be an array of tables")
    for i, raw in enumerate(raw_faults):
        if not isinstance(raw, dict):
            raise SpecError(f"faults[{i}] must be a table")
        faults.append(FaultSpec(**_build(f"faults[{i}]", dict(raw), _FAULT_FIELDS)))

    est_kw = _build("estimator", _take_section(doc, "estimator"), _ESTIMATOR_FIELDS)
    solver_kw = _build("solver", _take_section(doc, "solver"), _SOLVER_FIELDS)
    weights_kw = _build("weights", _take_section(doc, "weights"), _WEIGHT_FIELDS)
    local_kw = _build("local_weights", _take_section(doc, "local_weights"), _LOCAL_FIELDS)
    ekf_kw = _build("ekf", _take_section(doc, "ekf"), _EKF_FIELDS)
    try:
        solver = SolverConfig(**solver_kw)
        weights = WeightConfig(**weights_kw)
        local = LocalWeights(
            g_v=np.full(3, local_kw.get("g_v", 1.0)),
            g_x=np.full(3, local_kw.get("g_x", 1.0)),
            g_omega=np.full(3, local_kw.get("g_omega", 1.0)),
            g_r=local_kw.get("g_r", 1.0),
        )
        estimator = EstimatorConfig(solver=solver, weights=weights, local=local, **est_kw)
        ekf = EkfConfig(**ekf_kw)
    except ValueError as exc:
        raise SpecError(f"invalid configuration value: {exc}") from exc

    if doc:
        raise SpecError(f"unknown key(s): {', '.join(sorted(doc))}")

    kwargs = dict(top)
    kwargs.setdefault("name", name_fallback)
    if eta0 is not None:
        if not isinstance(eta0, list) or len(eta0) != 4:
            raise SpecError("eta0 must be a list of four numbers")
        kwargs["eta0"] = tuple(float(v) for v in eta0)
    return ScenarioSpec(
        degradation=degradation, clipping=clipping, faults=tuple(faults),
        estimator=estimator, ekf=ekf, **kwargs,
    ).validate()


def load_spec(path):
    try:
        with open(path, "rb") as fh:
            doc = tomllib.load(fh)
    except OSError as exc:
        raise SpecError(f"cannot read spec file {path}: {exc}") from exc
    except tomllib.TOMLDecodeError as exc:
        raise SpecError(f"spec parse error in {path}: {exc}") from exc
    return spec_from_dict(doc, name_fallback=os.path.splitext(os.path.basename(path))[0])


def with_seed(spec, seed):
    return dataclasses.replace(spec, seed=seed)


def true_efficiency(spec, t):
    """Ground-truth efficiency 4-vector at time t (degradation + fault overrides)."""
    if not 0 <= t <= spec.duration:
        raise ValueError("t outside the scenario duration")
    eta = np.asarray(spec.eta0, dtype=float).copy()
    deg = spec.degradation
    if deg.kind == "voltage":
        v_t = deg.v_start + (deg.v_end - deg.v_start) * (t / spec.duration)
        eta *= np.exp(deg.xi * (v_t - deg.v_start))
    for f in spec.faults:
        if f.t_start <= t < f.t_end:
            eta[f.motor - 1] = f.eta_fault
    return eta


def truth_discontinuities(spec):
    """Times where the truth jumps (fault edges), for metric windows."""
    times = []
    for f in spec.faults:
        times.extend([f.t_start, f.t_end])
    return sorted(t for t in times if 0 <= t <= spec.duration)


@dataclass
class RunTrace:
    spec: ScenarioSpec
    step_times: np.ndarray  # (steps,) time at which each truth sample applies
    truth: np.ndarray  # (steps, 4)
    est_t: np.ndarray  # (ticks,)
    est: np.ndarray  # (ticks, 4)
    est_iters: np.ndarray
    est_rejected: np.ndarray
    est_gap: np.ndarray
    est_converged: np.ndarray
    ekf: np.ndarray  # (ticks, 4), aligned with est_t
    weights_rows: list  # (t, segment, weight, rejected)
    kkt_rows: list  # (window, irls_iter, newton_iter, r_dual, r_cent, gap, alpha, beta)
    iterates_rows: list  # (irls_iter, newton_iter, eta1..eta4), first window


@dataclass(frozen=True)
class MetricRow:
    method: str
    motor: int
    rmse: float
    std: float
    max_spike: float


def initial_flight_state(params, gains):
    des0 = circle_trajectory(0.0)
    r0 = desired_attitude(np.zeros(3), np.zeros(3), des0.a_d, des0.b_1d, params, gains)
    return QuadState(des0.x_d.copy(), des0.v_d.copy(), r0, np.zeros(3))


def run_scenario(spec, params=None, gains=None, run_ekf=True):
    """Closed loop with both estimators consuming the same segment stream."""
    spec.validate()
    params = params or QuadParams()
    gains = gains or Gains()
    lam = allocation_matrix(params)
    rng = np.random.default_rng(spec.seed)
    n_steps = int(round(spec.duration / spec.dt))

    st = initial_flight_state(params, gains)
    estimator = OnlineEstimator(params, spec.estimator)
    ekf = EkfEstimator(params, spec.ekf, st) if run_ekf else None

    step_times = np.empty(n_steps)
    truth = np.empty((n_steps, 4))
    records, details, ekf_rows = [], [], []

    for k in range(n_steps):
        t = k * spec.dt
        s_true = true_efficiency(spec, t)
        step_times[k] = t
        truth[k] = s_true

        wrench = control_wrench(st, circle_trajectory(t), params, gains)
        f_m_cmd = thrusts_from_wrench(wrench, lam)
        f_act = perturb_thrusts(f_m_cmd, spec.sigma_f, rng)
        if spec.clipping.enabled:
            f_act, _ = clip_thrusts(f_act, spec.clipping.f_min, spec.clipping.f_max)
        st1 = step(st, apply_efficiency(f_act, s_true, lam), params, spec.dt)
        if not (np.isfinite(st1.x).all() and np.isfinite(st1.v).all()
                and np.isfinite(st1.R).all() and np.isfinite(st1.Omega).all()):
            raise ScenarioAbort(k, f"non-finite state at step {k} (t={t:.3f}s)")

        seg = WindowSegment(t, st, st1, f_m_cmd, spec.dt)
        try:
            if ekf is not None:
                ekf.step(f_m_cmd, st1, spec.dt)
            out = estimator.push(seg)
        except (ValueError, FloatingPointError, np.linalg.LinAlgError, IpmError) as exc:
            raise ScenarioAbort(k, f"estimator failure at step {k} (t={t:.3f}s): {exc}") from exc
        if out is not None:
            record, detail = out
            records.append(record)
            details.append(detail)
            if ekf is not None:
                ekf_rows.append(ekf.eta_clamped)
        st = st1

    est_t = np.array([r.t for r in records])
    est = np.array([r.s_hat for r in records]) if records else np.empty((0, 4))
    weights_rows = []
    kkt_rows = []
    iterates_rows = []
    for w_idx, (record, detail) in enumerate(zip(records, details)):
        for seg_idx, (w, rej) in enumerate(zip(detail.weights, detail.rejected)):
            weights_rows.append((record.t, seg_idx, w, int(rej)))
        for irls_idx, result in enumerate(detail.solves, start=1):
            for row in result.rows:
                kkt_rows.append((w_idx, irls_idx, row.iteration, row.r_dual_norm,
                                 row.r_cent_norm, row.gap, row.alpha, row.beta))
    if details:
        for irls_idx, result in enumerate(details[0].solves, start=1):
            for it_idx, (s_it, _) in enumerate(result.iterates):
                iterates_rows.append((irls_idx, it_idx, *s_it))

    return RunTrace(
        spec=spec,
        step_times=step_times,
        truth=truth,
        est_t=est_t,
        est=est,
        est_iters=np.array([r.irls_iters for r in records], dtype=int),
        est_rejected=np.array([r.rejected for r in records], dtype=int),
        est_gap=np.array([r.gap for r in records]),
        est_converged=np.array([r.converged for r in records], dtype=bool),
        ekf=np.array(ekf_rows) if ekf_rows else np.empty((0, 4)),
        weights_rows=weights_rows,
        kkt_rows=kkt_rows,
        iterates_rows=iterates_rows,
    )


def truth_at_ticks(step_times, truth, est_t, dt):
    """Truth applied in the last segment before each tick (exact index lookup)."""
    idx = np.round(est_t / dt).astype(int) - 1
    if (idx < 0).any() or (idx >= len(step_times)).any():
        raise ValueError("tick time outside the trace")
    return truth[idx]


def metrics_from_series(est_t, est, truth_ticks, discontinuities, dt, method):
    """Per-motor RMSE/std over the settled region and max spike thereafter.

    Both metrics skip the startup transient (the estimators converge from
    the 0.5 initial guess); the spike additionally keeps every truth-jump
    transition, which is exactly what it measures, while rmse/std drop a
    settling window after each jump.
    """
    if len(est_t) == 0:
        raise ValueError("empty estimate series")
    err = est - truth_ticks
    started = est_t >= RMSE_START_S
    settled = started.copy()
    for d in discontinuities:
        settled &= ~((est_t >= d) & (est_t < d + RMSE_SETTLE_S))
    if not settled.any():
        raise ValueError("empty post-transient region")
    rows = []
    for m in range(4):
        e = err[settled, m]
        rows.append(
            MetricRow(
                method=method,
                motor=m + 1,
                rmse=float(np.sqrt(np.mean(e**2))),
                std=float(np.std(e)),
                max_spike=float(np.max(np.abs(err[started, m]))),
            )
        )
    return rows


def compute_metrics(trace):
    """MetricRows for both estimators in a completed trace."""
    spec = trace.spec
    disc = truth_discontinuities(spec)
    truth_ticks = truth_at_ticks(trace.step_times, trace.truth, trace.est_t, spec.dt)
    rows = metrics_from_series(trace.est_t, trace.est, truth_ticks, disc, spec.dt, "irls")
    if len(trace.ekf):
        rows += metrics_from_series(trace.est_t, trace.ekf, truth_ticks, disc, spec.dt, "ekf")
    return rows
