"""Actual-versus-status-quo (AVSQ) event-study estimators.

The estimand at horizon ``ell`` compares a switcher's outcome ``ell``
periods after its first dose change to the counterfactual where it had kept
its period-1 dose throughout, signed by the direction of the first switch.
It is estimated by a difference-in-differences: each switcher's outcome
evolution from F-1 to F-1+ell minus the average evolution of its control
set, the groups with the same baseline dose whose treatment has not changed
yet at F-1+ell.

Pre-trend placebos mirror the same comparison on the window F-1-ell to F-1.
Normalization divides by the cumulative incremental dose versus the status
quo, turning the estimate into a weighted average of per-lag marginal
effects; the per-lag weight shares Omega are reported alongside.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .design import DesignInfo
from .errors import (
    AceDegenerate,
    MixedSignDesign,
    NormalizationDegenerate,
    PlaceboUndefined,
)
from .panel import Panel

__all__ = [
    "EventStudyResult",
    "control_set",
    "avsq_hat",
    "avsq_placebo",
    "normalize",
    "path_effects",
    "ace",
]


@dataclass
class EventStudyResult:
    """One event-study row (negative horizons are placebos)."""

    horizon: int
    estimate: float
    undefined: bool = False
    n_switchers: int = 0
    dose_delta: float | None = None
    normalized: float | None = None
    omega_shares: np.ndarray | None = None
    se: float | None = None
    ci_low: float | None = None
    ci_high: float | None = None
    paths: list | None = None
    weighted: bool = False
    members: np.ndarray = field(default=None, repr=False)  # type: ignore[assignment]

    def as_dict(self) -> dict:
        return {
            "horizon": self.horizon,
            "estimate": self.estimate,
            "undefined": self.undefined,
            "n_switchers": self.n_switchers,
            "dose_delta": self.dose_delta,
            "normalized": self.normalized,
            "omega_shares": (
                None if self.omega_shares is None else self.omega_shares.tolist()
            ),
            "se": self.se,
            "ci_low": self.ci_low,
            "ci_high": self.ci_high,
            "weighted": self.weighted,
        }


def control_set(panel: Panel, info: DesignInfo, g: int, ell: int) -> np.ndarray:
    """Indices of the control groups for switcher ``g`` at horizon ``ell``:
    same baseline dose, treatment unchanged through F_g-1+ell, and observed
    through that period."""
    tau = info.F[g] - 1 + ell
    mask = (
        (info.d1 == info.d1[g])
        & (info.F > tau)
        & (panel.obs_until >= tau)
    )
    return np.flatnonzero(mask)


def _wmean(values: np.ndarray, weights: np.ndarray) -> float:
    return float(np.sum(values * weights) / np.sum(weights))


def _switcher_terms(
    panel: Panel,
    info: DesignInfo,
    ell: int,
    *,
    placebo: bool = False,
    switcher_mask: np.ndarray | None = None,
    sign: int | None = None,
):
    """Per-switcher signed DID terms at horizon ``ell``.

    Returns (members, terms): a boolean membership array over groups (the
    finite-sample switcher set, i.e. switched, evaluation period observed,
    no crossing through it, nonempty control set) and the per-member term
    S * (own contrast - control-mean contrast). ``placebo`` flips the
    contrast window to (F-1-ell, F-1) and additionally requires F-1-ell >= 1.
    """
    if ell < 1:
        raise ValueError("horizon must be >= 1")
    F, S, d1 = info.F, info.S, info.d1
    Y = panel.outcome
    w = panel.weight
    tau = F - 1 + ell

    base = (S != 0) & (tau <= panel.obs_until) & (info.nc_until >= tau)
    if placebo:
        base &= F - 1 - ell >= 1
    if sign is not None:
        base &= S == sign
    if switcher_mask is not None:
        base &= switcher_mask

    members = np.zeros(panel.n_groups, dtype=bool)
    terms = np.full(panel.n_groups, np.nan)

    cand = np.flatnonzero(base)
    if len(cand) == 0:
        return members, terms

    for key in {(float(d1[g]), int(F[g])) for g in cand}:
        v, f = key
        t_eval = f - 1 + ell
        cls = cand[(d1[cand] == v) & (F[cand] == f)]
        ctrl = (d1 == v) & (F > t_eval) & (panel.obs_until >= t_eval)
        if not ctrl.any():
            continue
        if placebo:
            contrast = Y[:, f - 1 - ell - 1] - Y[:, f - 1 - 1]
        else:
            contrast = Y[:, t_eval - 1] - Y[:, f - 1 - 1]
        delta = _wmean(contrast[ctrl], w[ctrl])
        members[cls] = True
        terms[cls] = S[cls] * (contrast[cls] - delta)

    return members, terms


def avsq_hat(
    panel: Panel,
    info: DesignInfo,
    ell: int,
    *,
    switcher_mask: np.ndarray | None = None,
    sign: int | None = None,
) -> EventStudyResult:
    """Event-study estimate at horizon ``ell`` (>= 1).

    When the switcher set is empty the estimate is 0 and the result is
    flagged ``undefined`` rather than raising: downstream aggregation skips
    such rows explicitly.
    """
    members, terms = _switcher_terms(
        panel, info, ell, switcher_mask=switcher_mask, sign=sign
    )
    weighted = bool(np.any(panel.weight != 1.0))
    if not members.any():
        return EventStudyResult(
            horizon=ell, estimate=0.0, undefined=True, weighted=weighted,
            members=np.zeros(panel.n_groups, dtype=bool),
        )
    est = _wmean(terms[members], panel.weight[members])
    return EventStudyResult(
        horizon=ell,
        estimate=est,
        n_switchers=int(members.sum()),
        weighted=weighted,
        members=members,
    )


def avsq_placebo(
    panel: Panel,
    info: DesignInfo,
    ell: int,
    *,
    switcher_mask: np.ndarray | None = None,
    normalized: bool = False,
) -> EventStudyResult:
    """Pre-trend placebo mirroring the horizon-``ell`` comparison.

    The sample is the horizon-``ell`` switcher set further restricted to
    groups observed at F-1-ell. Under the maintained parallel-trends
    condition the estimand is zero. When normalization is requested, the
    dose denominator is copied from the matching positive horizon (the
    placebo's own dose contrast is zero by construction).
    """
    members, terms = _switcher_terms(
        panel, info, ell, placebo=True, switcher_mask=switcher_mask
    )
    if not members.any():
        raise PlaceboUndefined(
            f"no switcher is observed {ell} periods before its first switch "
            f"with a nonempty control set"
        )
    est = _wmean(terms[members], panel.weight[members])
    result = EventStudyResult(
        horizon=-ell,
        estimate=est,
        n_switchers=int(members.sum()),
        weighted=bool(np.any(panel.weight != 1.0)),
        members=members,
    )
    if normalized:
        pos = normalize(panel, info, ell, switcher_mask=switcher_mask)
        result.dose_delta = pos.dose_delta
        result.normalized = est / pos.dose_delta
    return result


def _dose_contrasts(panel: Panel, info: DesignInfo, ell: int, members: np.ndarray):
    """Per-member cumulative and per-lag signed dose changes vs status quo."""
    idx = np.flatnonzero(members)
    F, S, d1 = info.F[idx], info.S[idx], info.d1[idx]
    D = panel.treatment
    cum = np.zeros(len(idx))
    per_lag = np.zeros((len(idx), ell))
    for j, g in enumerate(idx):
        doses = D[g, F[j] - 1 : F[j] - 1 + ell]  # D_F .. D_{F-1+ell}
        cum[j] = S[j] * np.sum(doses - d1[j])
        for k in range(ell):
            per_lag[j, k] = S[j] * (D[g, F[j] + ell - k - 2] - d1[j])
    return idx, cum, per_lag


def normalize(
    panel: Panel,
    info: DesignInfo,
    ell: int,
    *,
    switcher_mask: np.ndarray | None = None,
) -> EventStudyResult:
    """Event-study estimate with dose normalization and lag-weight shares."""
    result = avsq_hat(panel, info, ell, switcher_mask=switcher_mask)
    if result.undefined:
        raise NormalizationDegenerate(f"switcher set empty at horizon {ell}")
    idx, cum, per_lag = _dose_contrasts(panel, info, ell, result.members)
    w = panel.weight[idx]
    dose_delta = _wmean(cum, w)
    if dose_delta == 0.0:
        raise NormalizationDegenerate(
            f"average incremental dose at horizon {ell} is zero"
        )
    result.dose_delta = dose_delta
    result.normalized = result.estimate / dose_delta
    result.omega_shares = np.array(
        [_wmean(per_lag[:, k], w) for k in range(ell)]
    ) / dose_delta
    return result


def path_effects(
    panel: Panel,
    info: DesignInfo,
    ell: int,
    min_count: int = 2,
) -> list[EventStudyResult]:
    """Per-treatment-path event-study effects at horizon ``ell``.

    Switchers are grouped by the signature (baseline dose, D_F..D_{F-1+ell});
    later doses cannot enter the horizon-``ell`` comparison. Paths with fewer
    than ``min_count`` switchers are reported with their frequency only.
    """
    members, terms = _switcher_terms(panel, info, ell)
    results: list[EventStudyResult] = []
    if not members.any():
        return results
    idx = np.flatnonzero(members)
    signatures = {}
    for g in idx:
        sig = (float(info.d1[g]),) + tuple(
            panel.treatment[g, info.F[g] - 1 : info.F[g] - 1 + ell].tolist()
        )
        signatures.setdefault(sig, []).append(g)

    for sig in sorted(signatures):
        grp = np.asarray(signatures[sig])
        count = len(grp)
        if count < min_count:
            res = EventStudyResult(
                horizon=ell, estimate=float("nan"), undefined=True,
                n_switchers=count,
            )
        else:
            res = EventStudyResult(
                horizon=ell,
                estimate=_wmean(terms[grp], panel.weight[grp]),
                n_switchers=count,
            )
        res.paths = [(sig, count)]
        results.append(res)
    return results


def ace(
    panel: Panel,
    info: DesignInfo,
    *,
    costs: np.ndarray | None = None,
    split_by_sign: bool = False,
) -> dict:
    """Average cumulative effect per unit of treatment, with an optional
    cost-benefit threshold.

    Valid as stated when switchers move weakly to one side of their baseline
    dose; with both switch directions present, pass ``split_by_sign`` to get
    one record per direction. ``costs[l-1]`` is the per-dose cost ``l``
    periods after the first switch; when given, the record carries the
    break-even threshold and whether the realized paths were beneficial.
    """
    signs = sorted({int(s) for s in info.S if s != 0})
    if not signs:
        raise AceDegenerate("no switcher in the panel")
    if len(signs) > 1 and not split_by_sign:
        raise MixedSignDesign(
            "switchers move in both directions; request split_by_sign"
        )

    def one_sign(sig: int) -> dict:
        T = panel.n_periods
        num = 0.0
        den = 0.0
        cost_num = 0.0
        w = panel.weight
        total_w = np.sum(w)
        for ell in range(1, T):
            tau = info.F - 1 + ell
            eligible = (
                (info.S == sig)
                & np.isin(info.d1, list(info.dr1))
                & (tau <= panel.obs_until)
            )
            tb = np.array([info.tbar.get(float(v), 0) for v in info.d1])
            eligible &= tau <= tb
            if not eligible.any():
                continue
            p_hat = float(np.sum(w[eligible]) / total_w)
            row = avsq_hat(panel, info, ell, sign=sig)
            idx = np.flatnonzero(eligible)
            dose = np.array(
                [sig * (panel.treatment[g, tau[g] - 1] - info.d1[g]) for g in idx]
            )
            mean_dose = _wmean(dose, w[idx])
            if not row.undefined:
                num += p_hat * row.estimate
            den += p_hat * mean_dose
            if costs is not None:
                c_ell = float(costs[ell - 1]) if ell - 1 < len(costs) else float(costs[-1])
                cost_num += p_hat * c_ell * mean_dose
        if den == 0.0:
            raise AceDegenerate("cumulative incremental dose is zero")
        record = {"ace": num / den, "threshold_c": None, "beneficial": None}
        if costs is not None:
            record["threshold_c"] = cost_num / den
            record["beneficial"] = bool(record["ace"] >= record["threshold_c"])
        return record

    if len(signs) == 1:
        return one_sign(signs[0])
    return {("switchers_up" if s == 1 else "switchers_down"): one_sign(s) for s in signs}
