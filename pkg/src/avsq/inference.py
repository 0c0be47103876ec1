"""Group-level bootstrap and Wald equality tests.

All uncertainty quantification in the package resamples entire groups with
replacement: replication panels stay balanced by construction and the
resampling unit matches the clustering unit. Replications use disjoint,
deterministic RNG substreams of the plan seed, so (seed, B, panel) fully
determine every output and replications can be evaluated in any order.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy import stats

from .errors import DegenerateTest, EstimationError, UnstableStatistic
from .panel import Panel, resample_groups

__all__ = ["BootstrapPlan", "BootstrapResult", "bootstrap", "wald_equal"]

MAX_INVALID_SHARE = 0.20


@dataclass
class BootstrapPlan:
    """How to bootstrap a statistic.

    ``statistic`` maps a Panel to a float or 1-d array; it must recompute
    everything (design classification included) from the panel it receives.
    Replications where the statistic raises an :class:`EstimationError` or
    returns non-finite values are recorded as invalid and excluded.
    """

    statistic: Callable[[Panel], np.ndarray]
    b: int = 100
    seed: int = 0
    level: float = 0.95
    percentile: bool = False

    def __post_init__(self):
        if self.b < 2:
            raise ValueError("need at least 2 bootstrap replications")
        if not 0 < self.level < 1:
            raise ValueError("confidence level must be in (0, 1)")


@dataclass
class BootstrapResult:
    point: np.ndarray
    se: np.ndarray
    ci_low: np.ndarray
    ci_high: np.ndarray
    cov: np.ndarray
    n_valid: np.ndarray
    n_invalid: int
    draws: np.ndarray = field(repr=False, default=None)  # type: ignore[assignment]

    def pvalues(self) -> np.ndarray:
        """Two-sided normal p-values of each component against zero."""
        with np.errstate(invalid="ignore", divide="ignore"):
            z = np.abs(self.point / self.se)
        return 2 * stats.norm.sf(z)


def bootstrap(plan: BootstrapPlan, panel: Panel) -> BootstrapResult:
    """Cluster bootstrap of ``plan.statistic`` over group resamples."""
    point = np.atleast_1d(np.asarray(plan.statistic(panel), dtype=float))
    m = point.shape[0]
    G = panel.n_groups

    draws = np.full((plan.b, m), np.nan)
    n_invalid = 0
    for rep in range(plan.b):
        rng = np.random.default_rng([plan.seed, rep])
        idx = rng.integers(0, G, size=G)
        try:
            value = plan.statistic(resample_groups(panel, idx))
        except EstimationError:
            n_invalid += 1
            continue
        value = np.atleast_1d(np.asarray(value, dtype=float))
        if value.shape != point.shape:
            raise ValueError("statistic changed dimension across replications")
        draws[rep] = value

    valid_rows = np.isfinite(draws).all(axis=1)
    n_valid = np.isfinite(draws).sum(axis=0)
    if (plan.b - valid_rows.sum()) > MAX_INVALID_SHARE * plan.b:
        raise UnstableStatistic(
            f"{plan.b - int(valid_rows.sum())} of {plan.b} bootstrap replications "
            "were invalid"
        )

    with np.errstate(invalid="ignore"):
        se = np.nanstd(draws, axis=0, ddof=1)
    if valid_rows.sum() >= 2:
        cov = np.cov(draws[valid_rows], rowvar=False, ddof=1).reshape(m, m)
    else:
        cov = np.full((m, m), np.nan)

    z = stats.norm.ppf(0.5 + plan.level / 2)
    if plan.percentile:
        lo = np.nanpercentile(draws, 100 * (0.5 - plan.level / 2), axis=0)
        hi = np.nanpercentile(draws, 100 * (0.5 + plan.level / 2), axis=0)
    else:
        lo = point - z * se
        hi = point + z * se

    return BootstrapResult(
        point=point,
        se=se,
        ci_low=lo,
        ci_high=hi,
        cov=cov,
        n_valid=n_valid,
        n_invalid=n_invalid,
        draws=draws,
    )


def wald_equal(estimates: np.ndarray, covariance: np.ndarray) -> float:
    """Chi-square p-value for the null that all estimates are equal.

    Uses the contrast of differences against the first component and a
    pseudoinverse of its covariance, with degrees of freedom equal to the
    contrast-covariance rank.
    """
    theta = np.asarray(estimates, dtype=float)
    sigma = np.atleast_2d(np.asarray(covariance, dtype=float))
    m = theta.shape[0]
    if m < 2:
        raise ValueError("need at least two estimates to test equality")
    R = np.zeros((m - 1, m))
    R[:, 0] = -1.0
    R[np.arange(m - 1), np.arange(1, m)] = 1.0

    diff = R @ theta
    V = R @ sigma @ R.T
    scale = np.abs(V).max()
    if not np.isfinite(scale):
        raise DegenerateTest("contrast covariance contains non-finite entries")
    if scale == 0.0:
        if np.allclose(diff, 0.0):
            return 1.0
        raise DegenerateTest("all contrast variances are zero but estimates differ")

    Vinv = np.linalg.pinv(V, rcond=1e-12)
    df = np.linalg.matrix_rank(V, tol=1e-12 * scale)
    if df == 0:
        return 1.0
    stat = float(diff @ Vinv @ diff)
    return float(stats.chi2.sf(stat, df))
