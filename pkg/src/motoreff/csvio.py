"""Frozen CSV schemas shared by the CLI and the plotting frontend.

Comma separator, '.' decimal, one header row, floats at 17 significant
digits so re-serialization round-trips exactly.
"""

import numpy as np

SCHEMAS = {
    "estimates": ["t", "eta1", "eta2", "eta3", "eta4", "irls_iters", "rejected", "gap", "converged"],
    "truth": ["t", "eta1", "eta2", "eta3", "eta4"],
    "ekf": ["t", "eta1", "eta2", "eta3", "eta4"],
    "weights": ["t", "segment", "weight", "rejected"],
    "kkt_trace": ["window", "irls_iter", "newton_iter", "r_dual_norm", "r_cent_norm", "gap", "alpha", "beta"],
    "metrics": ["method", "motor", "rmse", "std", "max_spike"],
    "metrics_compare": ["method", "motor", "rmse", "std", "max_spike"],
    "iterates": ["irls_iter", "newton_iter", "eta1", "eta2", "eta3", "eta4"],
}


def _fmt(value):
    if isinstance(value, (bool, np.bool_)):
        return "1" if value else "0"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, str):
        return value
    return format(float(value), ".17g")


def write_csv(path, kind, rows):
    header = SCHEMAS[kind]
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            if len(row) != len(header):
                raise ValueError(f"{kind}: row of width {len(row)}, schema wants {len(header)}")
            fh.write(",".join(_fmt(v) for v in row) + "\n")


def read_csv(path, kind=None):
    """Parse a CSV into (header, list-of-string-rows); verifies a frozen schema."""
    with open(path, "r", encoding="utf-8") as fh:
        lines = [ln.rstrip("\n") for ln in fh if ln.strip()]
    if not lines:
        raise ValueError(f"{path}: empty file")
    header = lines[0].split(",")
    if kind is not None and header != SCHEMAS[kind]:
        raise ValueError(f"{path}: header {header} does not match the {kind} schema {SCHEMAS[kind]}")
    rows = [ln.split(",") for ln in lines[1:]]
    for i, row in enumerate(rows):
        if len(row) != len(header):
            raise ValueError(f"{path}: row {i + 2} has {len(row)} fields, expected {len(header)}")
    return header, rows


def read_columns(path, kind):
    """Float ndarray per column, keyed by the schema's column names."""
    header, rows = read_csv(path, kind)
    if not rows:
        return {name: np.empty(0) for name in header}
    data = np.array([[_parse(v) for v in row] for row in rows])
    return {name: data[:, j] for j, name in enumerate(header)}


def _parse(token):
    try:
        return float(token)
    except ValueError:
        # Non-numeric columns (method names) map to NaN in the float view.
        return float("nan")
