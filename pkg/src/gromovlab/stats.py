"""Confidence intervals and curve fits used by the experiment reports."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import stats as sps
from statsmodels.stats.proportion import proportion_confint

CONFIDENCE = 0.95


@dataclass(frozen=True)
class MCEstimate:
    trials: int
    successes: int
    estimate: float
    lower: float
    upper: float

    @classmethod
    def from_counts(cls, successes: int, trials: int) -> "MCEstimate":
        lo, hi = wilson_interval(successes, trials)
        return cls(int(trials), int(successes), successes / trials, float(lo), float(hi))


def wilson_interval(successes, trials, confidence: float = CONFIDENCE):
    """Two-sided Wilson score interval; vectorized over array inputs."""
    lo, hi = proportion_confint(successes, trials, alpha=1 - confidence, method="wilson")
    # round-off can leave -0.0 or 0.999...; the endpoints at k = 0 and k = n are exact
    k, n = np.asarray(successes), np.asarray(trials)
    lo = np.where(k == 0, 0.0, np.clip(lo, 0.0, 1.0))
    hi = np.where(k == n, 1.0, np.clip(hi, 0.0, 1.0))
    return (lo, hi) if lo.ndim else (float(lo), float(hi))


@dataclass(frozen=True)
class LogLogFit:
    slope: float
    intercept: float
    residuals: tuple[float, ...]
    residual_std_error: float


def loglog_fit(x, y) -> LogLogFit:
    """Least-squares line through ``(log x, log y)``."""
    lx = np.log(np.asarray(x, dtype=float))
    ly = np.log(np.asarray(y, dtype=float))
    fit = sps.linregress(lx, ly)
    resid = ly - (fit.intercept + fit.slope * lx)
    dof = len(lx) - 2
    rse = float(np.sqrt(np.sum(resid**2) / dof)) if dof > 0 else 0.0
    return LogLogFit(float(fit.slope), float(fit.intercept), tuple(float(r) for r in resid), rse)
