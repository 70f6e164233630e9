"""Exponential curve fitting and peak projection for post-period
trajectories (what happens if the current trend continues)."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InsufficientPositivePoints

DEFAULT_HORIZON_DAYS = 30


@dataclass(frozen=True)
class ExpFit:
    """y(t) = a * exp(b * t) fitted by OLS in log space."""

    a: float
    b: float
    fit_window: tuple[int, int]  # inclusive day range used
    r2_log: float
    n_excluded: int = 0  # nonpositive values dropped before the fit

    def evaluate(self, days: np.ndarray) -> np.ndarray:
        return self.a * np.exp(self.b * np.asarray(days, dtype=float))


@dataclass(frozen=True, eq=False)
class Projection:
    horizon_days: int
    horizon_start_day: int
    projected: np.ndarray
    projected_peak: tuple[int, float]  # (day, value) over observed + horizon

    def __post_init__(self):
        if self.projected.size and self.projected_peak[1] < self.projected.max() - 1e-12:
            raise ValueError("peak must dominate every projected value")


def fit_exponential(
    trajectory: np.ndarray, days: np.ndarray | None = None
) -> ExpFit:
    """Fit ln(y) = ln(a) + b*t by ordinary least squares over the strictly
    positive values; nonpositive values are excluded and counted."""
    y = np.asarray(trajectory, dtype=float)
    t = np.arange(len(y)) if days is None else np.asarray(days, dtype=float)
    if len(t) != len(y):
        raise ValueError("trajectory and days must have equal length")
    positive = y > 0
    if positive.sum() < 2:
        raise InsufficientPositivePoints(
            f"need >= 2 strictly positive values, got {int(positive.sum())}"
        )
    tp, log_y = t[positive], np.log(y[positive])
    b, log_a = np.polyfit(tp, log_y, 1)
    fitted = log_a + b * tp
    ss_res = float(np.sum((log_y - fitted) ** 2))
    ss_tot = float(np.sum((log_y - log_y.mean()) ** 2))
    r2 = 1.0 - ss_res / ss_tot if ss_tot > 0 else (1.0 if ss_res < 1e-20 else 0.0)
    return ExpFit(
        a=float(np.exp(log_a)),
        b=float(b),
        fit_window=(int(tp.min()), int(tp.max())),
        r2_log=r2,
        n_excluded=int((~positive).sum()),
    )


def project_peak(
    fit: ExpFit, observed_post: np.ndarray, horizon_days: int = DEFAULT_HORIZON_DAYS
) -> Projection:
    """Extend the fitted curve horizon_days past the last observed day and
    report the peak over observed values plus the projected horizon."""
    if horizon_days < 1:
        raise ValueError("horizon_days must be >= 1")
    observed = np.asarray(observed_post, dtype=float)
    start = len(observed)
    horizon = np.arange(start, start + horizon_days)
    projected = fit.evaluate(horizon)
    peak_day, peak_value = start, projected[0] if projected.size else 0.0
    candidates = [(int(d), float(v)) for d, v in zip(horizon, projected)]
    candidates += [(i, float(v)) for i, v in enumerate(observed)]
    peak_day, peak_value = max(candidates, key=lambda dv: (dv[1], -dv[0]))
    return Projection(
        horizon_days=horizon_days,
        horizon_start_day=start,
        projected=projected,
        projected_peak=(peak_day, peak_value),
    )
