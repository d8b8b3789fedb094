"""MAD-based robust z-score weighting: soft decay plus hard rejection."""

from dataclasses import dataclass

import numpy as np


class DegenerateWindowError(RuntimeError):
    """Raised when every segment in a window is hard-rejected."""


@dataclass(frozen=True)
class WeightConfig:
    z_soft: float = 2.5
    p: float = 4.0
    w_min: float = 0.05
    z_hard: float = 6.0
    eps_min: float = 1e-9

    def __post_init__(self):
        if self.z_soft <= 0 or self.p <= 0 or self.eps_min <= 0:
            raise ValueError("z_soft, p, eps_min must be positive")
        if not 0 <= self.w_min < 1:
            raise ValueError("w_min must lie in [0, 1)")
        if self.z_hard <= self.z_soft:
            raise ValueError("z_hard must exceed z_soft")


@dataclass(frozen=True)
class SegmentWeights:
    w: np.ndarray
    rejected: np.ndarray


def residual_energies(residuals, g_local):
    """Per-segment weighted energy e_i = r_i^T G_i r_i.

    Uses the unweighted local channel weights only, so the outlier weighting
    is not self-reinforcing across IRLS iterations.
    """
    residuals = np.atleast_2d(np.asarray(residuals, dtype=float))
    if residuals.shape[0] < 1:
        raise ValueError("need at least one segment")
    return residuals**2 @ np.asarray(g_local, dtype=float)


def robust_zscores(e, eps_min):
    """|e - median| scaled by 1.4826 * MAD, floored at eps_min.

    Even-length medians are the mean of the two central order statistics
    (numpy's convention).
    """
    e = np.asarray(e, dtype=float)
    if e.size < 1:
        raise ValueError("need at least one energy")
    med = np.median(e)
    dev = np.abs(e - med)
    mad = 1.4826 * np.median(dev)
    return dev / max(mad, eps_min)


def weights_from_zscores(z, cfg):
    """Soft inverse-polynomial decay with a floor, then hard rejection."""
    z = np.asarray(z, dtype=float)
    w = np.maximum(1.0 / (1.0 + (z / cfg.z_soft) ** cfg.p), cfg.w_min)
    rejected = z > cfg.z_hard
    w = np.where(rejected, 0.0, w)
    if rejected.all():
        raise DegenerateWindowError("all segments hard-rejected")
    return SegmentWeights(w, rejected)
