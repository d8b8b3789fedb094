"""Command-line entry point: run scenarios, compare estimators, dump convergence logs.

Exit codes: 0 success, 2 spec/config error, 3 numerical abort, 4 I/O error.
"""

import argparse
import logging
import os
import sys

import numpy as np

from . import csvio
from .dynamics import QuadParams
from .controller import Gains
from .irls import estimate as irls_estimate
from .scenarios import (
    ScenarioAbort,
    SpecError,
    compute_metrics,
    load_spec,
    run_scenario,
    with_seed,
)

log = logging.getLogger("motoreff")

EXIT_OK = 0
EXIT_SPEC = 2
EXIT_NUMERIC = 3
EXIT_IO = 4


def _write_trace_files(trace, out_dir):
    est_rows = [
        (t, *eta, it, rej, gap, conv)
        for t, eta, it, rej, gap, conv in zip(
            trace.est_t, trace.est, trace.est_iters, trace.est_rejected, trace.est_gap, trace.est_converged
        )
    ]
    csvio.write_csv(os.path.join(out_dir, "estimates.csv"), "estimates", est_rows)
    csvio.write_csv(
        os.path.join(out_dir, "truth.csv"), "truth",
        [(t, *eta) for t, eta in zip(trace.step_times, trace.truth)],
    )
    csvio.write_csv(
        os.path.join(out_dir, "ekf.csv"), "ekf",
        [(t, *eta) for t, eta in zip(trace.est_t, trace.ekf)],
    )
    csvio.write_csv(os.path.join(out_dir, "weights.csv"), "weights", trace.weights_rows)
    csvio.write_csv(os.path.join(out_dir, "kkt_trace.csv"), "kkt_trace", trace.kkt_rows)
    csvio.write_csv(os.path.join(out_dir, "iterates.csv"), "iterates", trace.iterates_rows)


def _metric_rows(rows):
    return [(r.method, r.motor, r.rmse, r.std, r.max_spike) for r in rows]


def _print_metrics(rows):
    print(f"{'method':8s} {'motor':5s} {'rmse':>12s} {'std':>12s} {'max_spike':>12s}")
    for r in rows:
        print(f"{r.method:8s} {r.motor:5d} {r.rmse:12.6f} {r.std:12.6f} {r.max_spike:12.6f}")


def cmd_run(spec, out_dir, quiet, compare=False):
    trace = run_scenario(spec)
    try:
        metrics = compute_metrics(trace)
    except ValueError as exc:
        raise SpecError(f"scenario too short for the metric windows: {exc}") from exc
    _write_trace_files(trace, out_dir)
    csvio.write_csv(os.path.join(out_dir, "metrics.csv"), "metrics", _metric_rows(metrics))
    if compare:
        csvio.write_csv(
            os.path.join(out_dir, "metrics_compare.csv"), "metrics_compare", _metric_rows(metrics)
        )
    if not quiet:
        print(f"scenario {spec.name!r}: {len(trace.est_t)} estimation ticks")
        _print_metrics(metrics)
    return EXIT_OK


def cmd_compare(spec, out_dir, quiet):
    """Run both estimators on identical seeds and write the side-by-side table."""
    return cmd_run(spec, out_dir, quiet, compare=True)


def cmd_convergence(spec, out_dir, quiet):
    """One window from the 0.5 initial guess; dump per-iteration data."""
    from .dynamics import (
        allocation_matrix,
        apply_efficiency,
        clip_thrusts,
        perturb_thrusts,
        step,
        thrusts_from_wrench,
    )
    from .controller import circle_trajectory, control_wrench
    from .residuals import WindowSegment
    from .scenarios import initial_flight_state, true_efficiency

    params, gains = QuadParams(), Gains()
    n = spec.estimator.window
    if spec.duration < n * spec.dt:
        raise SpecError(f"duration {spec.duration}s is shorter than one window ({n * spec.dt}s)")
    lam = allocation_matrix(params)
    rng = np.random.default_rng(spec.seed)
    st = initial_flight_state(params, gains)
    segments = []
    truth_rows = []
    for k in range(n):
        t = k * spec.dt
        s_true = true_efficiency(spec, t)
        truth_rows.append((t, *s_true))
        wrench = control_wrench(st, circle_trajectory(t), params, gains)
        f_m_cmd = thrusts_from_wrench(wrench, lam)
        f_act = perturb_thrusts(f_m_cmd, spec.sigma_f, rng)
        if spec.clipping.enabled:
            f_act, _ = clip_thrusts(f_act, spec.clipping.f_min, spec.clipping.f_max)
        st1 = step(st, apply_efficiency(f_act, s_true, lam), params, spec.dt)
        segments.append(WindowSegment(t, st, st1, f_m_cmd, spec.dt))
        st = st1
    s0 = np.full(4, spec.estimator.s0)
    record, detail = irls_estimate(segments, s0, params, spec.estimator, keep_iterates=True)

    kkt_rows = []
    iterates_rows = []
    for irls_idx, result in enumerate(detail.solves, start=1):
        for row in result.rows:
            kkt_rows.append((0, irls_idx, row.iteration, row.r_dual_norm, row.r_cent_norm, row.gap, row.alpha, row.beta))
        for it_idx, (s_it, _) in enumerate(result.iterates):
            iterates_rows.append((irls_idx, it_idx, *s_it))
    csvio.write_csv(os.path.join(out_dir, "kkt_trace.csv"), "kkt_trace", kkt_rows)
    csvio.write_csv(os.path.join(out_dir, "iterates.csv"), "iterates", iterates_rows)
    csvio.write_csv(os.path.join(out_dir, "truth.csv"), "truth", truth_rows)
    if not quiet:
        print(f"window of {n} segments: estimate {np.array2string(record.s_hat, precision=6)}")
        print(f"converged: {record.converged}, final gap {record.gap:.3e}")
    return EXIT_OK


def build_parser():
    parser = argparse.ArgumentParser(prog="motoreff", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)
    for name in ("run", "compare", "convergence"):
        p = sub.add_parser(name)
        p.add_argument("spec", help="path to a scenario .spec (TOML) file")
        p.add_argument("--out", required=True, help="output directory for CSVs")
        p.add_argument("--seed", type=int, default=None, help="override the spec's seed")
        p.add_argument("--quiet", action="store_true")
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.WARNING if args.quiet else logging.INFO, format="%(message)s")
    try:
        spec = load_spec(args.spec)
        if args.seed is not None:
            spec = with_seed(spec, args.seed).validate()
    except SpecError as exc:
        print(f"spec error: {exc}", file=sys.stderr)
        return EXIT_SPEC
    try:
        os.makedirs(args.out, exist_ok=True)
        probe = os.path.join(args.out, ".writetest")
        with open(probe, "w") as fh:
            fh.write("")
        os.remove(probe)
    except OSError as exc:
        print(f"output directory not writable: {exc}", file=sys.stderr)
        return EXIT_IO

    try:
        if args.command == "run":
            return cmd_run(spec, args.out, args.quiet)
        if args.command == "compare":
            return cmd_compare(spec, args.out, args.quiet)
        return cmd_convergence(spec, args.out, args.quiet)
    except ScenarioAbort as exc:
        print(f"numerical abort: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except SpecError as exc:
        print(f"spec error: {exc}", file=sys.stderr)
        return EXIT_SPEC
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
