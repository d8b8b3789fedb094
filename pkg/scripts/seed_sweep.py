#!/usr/bin/env python3
"""Per-motor max-spike comparison across seeds on the abrupt-fault scenario.

Prints the data behind the spike-bar figure: for each seed, the worst
|estimate - truth| per motor for both estimators, and whether the
sliding-window estimator's spike stays at or below the EKF's on every motor.

Usage: python3 scripts/seed_sweep.py [spec-path] [n-seeds]
"""

import sys

import numpy as np

sys.path.insert(0, "src")

from motoreff.scenarios import compute_metrics, load_spec, run_scenario, with_seed  # noqa: E402


def main():
    spec_path = sys.argv[1] if len(sys.argv) > 1 else "specs/abrupt_fault.spec"
    n_seeds = int(sys.argv[2]) if len(sys.argv) > 2 else 5
    spec = load_spec(spec_path)
    wins = 0
    for seed in range(1, n_seeds + 1):
        rows = compute_metrics(run_scenario(with_seed(spec, seed)))
        spikes_irls = np.array([r.max_spike for r in rows if r.method == "irls"])
        spikes_ekf = np.array([r.max_spike for r in rows if r.method == "ekf"])
        ok = bool(np.all(spikes_irls <= spikes_ekf))
        wins += ok
        print(
            f"seed {seed}: irls {np.array2string(spikes_irls, precision=3)} "
            f"ekf {np.array2string(spikes_ekf, precision=3)} -> {'ok' if ok else 'exceeded'}"
        )
    print(f"{wins}/{n_seeds} seeds with per-motor spike(irls) <= spike(ekf)")
    return 0 if wins == n_seeds else 1


if __name__ == "__main__":
    sys.exit(main())
