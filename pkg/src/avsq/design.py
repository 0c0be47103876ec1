"""Design classification: first-switch dates, switch signs, no-crossing.

Per group we record the first period at which the treatment dose departs
from its period-1 value (F, with T+1 meaning "no observed switch"), the sign
of that first departure (S), and how far the path stays on one side of the
baseline dose (``nc_until``). At the population level we record which
baseline doses are "stayer rich" (at least ``min_group_count`` groups
sharing the dose with differing F) and, per baseline dose, the last period
at which a not-yet-switched group with that dose is still observed.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from .panel import Panel

__all__ = ["DesignInfo", "analyze_design", "in_d_ell", "design_summary"]


@dataclass(frozen=True)
class DesignInfo:
    """Per-group and population-level design classification.

    ``F`` is 1-based (2..T+1, T+1 = never switches within the observed
    window). ``S`` is -1/0/+1. ``nc_until[g]`` is the largest observed t such
    that the dose path of g has not crossed its baseline dose through t.
    ``last_control[g] = min(F-1, obs_until)`` is the last period at which g
    is known to still hold its baseline dose. ``tbar`` maps a baseline dose
    to the max of ``last_control`` among groups with that dose; ``dr1`` is
    the set of stayer-rich baseline doses.
    """

    F: np.ndarray
    S: np.ndarray
    d1: np.ndarray
    nc_until: np.ndarray
    n_switches: np.ndarray
    last_control: np.ndarray
    dr1: frozenset
    tbar: dict = field(default_factory=dict)
    min_group_count: int = 2

    @property
    def n_groups(self) -> int:
        return len(self.F)


def analyze_design(panel: Panel, *, min_group_count: int = 2) -> DesignInfo:
    """Classify every group of the panel and the stayer structure.

    ``min_group_count`` is the minimum number of groups sharing a baseline
    dose (with at least two distinct first-switch dates among them) for that
    dose to count as stayer rich.
    """
    G, T = panel.n_groups, panel.n_periods
    obs = panel.obs_until
    d1 = panel.treatment[:, 0].copy()
    # Pad unobserved cells with the baseline dose so that vectorized scans
    # never see them as switches.
    D = np.where(np.arange(T)[None, :] < obs[:, None], panel.treatment, d1[:, None])

    neq = D != d1[:, None]
    any_switch = neq.any(axis=1)
    first = np.argmax(neq, axis=1)  # 0-based column of first switch
    F = np.where(any_switch, first + 1, T + 1)

    S = np.zeros(G, dtype=int)
    sw = any_switch
    S[sw] = np.sign(D[sw, first[sw]] - d1[sw]).astype(int)

    # no-crossing horizon: first t where both a value above and a value
    # below the baseline dose have appeared among d_2..d_t
    run_min = np.minimum.accumulate(D[:, 1:], axis=1)
    run_max = np.maximum.accumulate(D[:, 1:], axis=1)
    crossed = (run_min < d1[:, None]) & (run_max > d1[:, None])  # cols are t=2..T
    any_cross = crossed.any(axis=1)
    first_cross_t = np.argmax(crossed, axis=1) + 2
    nc_until = np.where(any_cross, first_cross_t - 1, obs)
    nc_until = np.minimum(nc_until, obs)

    n_switches = np.count_nonzero(D[:, 1:] != D[:, :-1], axis=1)

    last_control = np.minimum(F - 1, obs)

    dr1 = set()
    tbar: dict = {}
    for v in np.unique(d1):
        members = d1 == v
        tbar[float(v)] = int(last_control[members].max())
        if members.sum() >= min_group_count and len(np.unique(F[members])) >= 2:
            dr1.add(float(v))

    if not dr1 and (F[sw] == 2).all() and sw.all():
        warnings.warn(
            "every group switches at period 2 and no baseline dose is stayer "
            "rich; event-study estimators will be infeasible on this design",
            stacklevel=2,
        )

    return DesignInfo(
        F=F,
        S=S,
        d1=d1,
        nc_until=np.asarray(nc_until, dtype=int),
        n_switches=np.asarray(n_switches, dtype=int),
        last_control=np.asarray(last_control, dtype=int),
        dr1=frozenset(dr1),
        tbar=tbar,
        min_group_count=min_group_count,
    )


def in_d_ell(g: int, ell: int, info: DesignInfo) -> bool:
    """Population-style eligibility of group ``g`` at horizon ``ell``.

    True iff g switched, its baseline dose is stayer rich, the evaluation
    period F-1+ell does not outrun the last not-yet-switched horizon of its
    baseline dose, and the path has not crossed the baseline through that
    period. The finite-sample switcher set additionally requires a nonempty
    control group (handled by the estimators).
    """
    if ell < 1:
        raise ValueError("horizon must be >= 1")
    if info.S[g] == 0:
        return False
    d1 = float(info.d1[g])
    if d1 not in info.dr1:
        return False
    tau = info.F[g] - 1 + ell
    return tau <= info.tbar[d1] and info.nc_until[g] >= tau


def design_summary(panel: Panel, info: DesignInfo) -> dict:
    """Descriptive summary of the design (histograms and shares)."""
    G = info.n_groups
    switchers = info.S != 0

    def hist(values):
        vals, counts = np.unique(values, return_counts=True)
        return {str(v): int(c) for v, c in zip(vals.tolist(), counts.tolist())}

    fully_nc = info.nc_until == panel.obs_until
    out = {
        "n_groups": int(G),
        "n_periods": int(panel.n_periods),
        "n_switchers": int(switchers.sum()),
        "n_never_switchers": int((~switchers).sum()),
        "baseline_dose_hist": hist(info.d1),
        "n_switches_hist": hist(info.n_switches),
        "share_switch_up": (
            float((info.S[switchers] == 1).mean()) if switchers.any() else None
        ),
        "share_no_crossing": float(fully_nc.mean()),
        "first_switch_hist": {
            str(int(f)): [
                int(np.sum((info.F == f) & (info.S == 1))),
                int(np.sum((info.F == f) & (info.S == -1))),
            ]
            for f in np.unique(info.F[switchers]).tolist()
        },
        "stayer_rich_doses": sorted(info.dr1),
        "last_control_horizon": {str(k): v for k, v in sorted(info.tbar.items())},
    }
    return out
