"""Random-coefficients distributed-lag estimation in first differences.

The model writes first-differenced outcomes as a common trend vector plus a
per-group design matrix of first-differenced doses times group-specific
coefficients. The trend is identified through the orthogonal projectors on
the orthocomplement of each group's design matrix (the projector kills the
group-specific part); the average coefficient of lag k is identified on the
groups whose design matrix row space contains the k-th canonical vector,
via the Moore-Penrose pseudoinverse.

Three design-matrix variants: ``k_lag`` (K known lags, rows t = K+2..T),
``full_lag`` (effects up to any lag, lower-triangular (T-1) x (T-1) matrix,
identified only when never-switchers exist), and ``interaction`` (pairwise
lag-product columns added to the K-lag mains).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import CoefficientNotIdentified, DesignNotIdentified
from .inference import BootstrapPlan, bootstrap
from .panel import Panel

__all__ = [
    "RCEstimate",
    "build_m",
    "projector",
    "estimate_gamma",
    "estimate_beta_bar",
    "rc_full_report",
]

SV_RTOL = 1e-10
MEMBERSHIP_ATOL = 1e-8

VARIANTS = ("k_lag", "full_lag", "interaction")


@dataclass
class RCEstimate:
    variant: str
    n_lags: int | None
    labels: list[str]
    gamma_hat: np.ndarray
    beta_bar: dict
    n_eligible: dict
    ses: dict | None = None
    trim_c: float | None = None
    not_identified: list = field(default_factory=list)

    def as_dict(self) -> dict:
        return {
            "variant": self.variant,
            "n_lags": self.n_lags,
            "labels": self.labels,
            "gamma_hat": self.gamma_hat.tolist(),
            "beta_bar": {k: v for k, v in self.beta_bar.items()},
            "n_eligible": self.n_eligible,
            "ses": self.ses,
            "trim_c": self.trim_c,
            "not_identified": self.not_identified,
        }


def build_m(panel: Panel, variant: str, K: int | None = None):
    """Per-group first-difference design matrices and outcome vectors.

    Returns (M, dY, labels) with M of shape G x rows x cols and dY of shape
    G x rows. Rows are the first-differenced periods entering the model:
    t = K+2..T for ``k_lag`` and ``interaction``, t = 2..T for ``full_lag``.
    """
    if variant not in VARIANTS:
        raise ValueError(f"unknown variant {variant!r}")
    if not panel.fully_observed:
        raise ValueError("first-difference estimation requires a fully observed panel")
    T = panel.n_periods
    dD = np.diff(panel.treatment, axis=1)  # column j is Delta D_{j+2}
    dY_all = np.diff(panel.outcome, axis=1)

    if variant == "full_lag":
        n = T - 1
        M = np.zeros((panel.n_groups, n, n))
        for r in range(n):  # row r is period t = r+2
            for k in range(r + 1):  # column k carries Delta D_{t-k}
                M[:, r, k] = dD[:, r - k]
        labels = [f"lag{k}" for k in range(n)]
        return M, dY_all.copy(), labels

    if K is None:
        raise ValueError(f"variant {variant!r} needs the lag count K")
    if T <= K + 1:
        raise ValueError(f"need T > K+1 (K={K}, T={T})")
    rows = T - K - 1  # t = K+2 .. T
    dY = dY_all[:, K:]

    if variant == "k_lag":
        M = np.zeros((panel.n_groups, rows, K + 1))
        for r in range(rows):  # period t = K+2+r
            for k in range(K + 1):
                M[:, r, k] = dD[:, K + r - k]  # Delta D_{t-k}
        labels = [f"lag{k}" for k in range(K + 1)]
        return M, dY.copy(), labels

    # interaction: mains Delta D_{t-k}, then products Delta(D_{t-k} D_{t-k'})
    pairs = [(k, kp) for k in range(K + 1) for kp in range(k + 1, K + 1)]
    n_cols = (K + 1) + len(pairs)
    M = np.zeros((panel.n_groups, rows, n_cols))
    labels = [f"lag{k}" for k in range(K + 1)]
    for r in range(rows):
        for k in range(K + 1):
            M[:, r, k] = dD[:, K + r - k]
    D = panel.treatment
    for j, (k, kp) in enumerate(pairs):
        prod = np.stack(
            [D[:, t - k - 1] * D[:, t - kp - 1] for t in range(K + 2, T + 1)], axis=1
        )
        prev = np.stack(
            [D[:, t - k - 2] * D[:, t - kp - 2] for t in range(K + 2, T + 1)], axis=1
        )
        M[:, :, K + 1 + j] = prod - prev
        labels.append(f"lag{k}:lag{kp}")
    return M, dY.copy(), labels


class _PinvCache:
    """Pseudoinverse/projector cache keyed by matrix bytes.

    Groups sharing a treatment path share M; bootstrap replications reuse
    the original groups. Caching makes per-group SVDs a one-time cost.
    """

    def __init__(self):
        self._store: dict = {}

    def get(self, M: np.ndarray):
        key = (M.shape, M.tobytes())
        hit = self._store.get(key)
        if hit is None:
            pinv = np.linalg.pinv(M, rcond=SV_RTOL)
            proj = np.eye(M.shape[0]) - M @ pinv
            hit = (pinv, proj)
            self._store[key] = hit
        return hit


_CACHE = _PinvCache()


def projector(M: np.ndarray) -> np.ndarray:
    """Orthogonal projector on the orthocomplement of M's column space."""
    return _CACHE.get(M)[1]


def estimate_gamma(M: np.ndarray, dY: np.ndarray) -> np.ndarray:
    """Common-trend estimate from the averaged orthocomplement projectors."""
    G = M.shape[0]
    rows = M.shape[1]
    proj_mean = np.zeros((rows, rows))
    pdy_mean = np.zeros(rows)
    for g in range(G):
        P = projector(M[g])
        proj_mean += P
        pdy_mean += P @ dY[g]
    proj_mean /= G
    pdy_mean /= G

    evals, evecs = np.linalg.eigh(proj_mean)
    if evals[-1] <= 0 or evals[0] <= SV_RTOL * evals[-1]:
        deficient = evecs[:, evals <= SV_RTOL * max(evals[-1], 1e-300)]
        raise DesignNotIdentified(
            "the averaged projector is singular; the common trend is not "
            "identified in the deficient directions",
            deficient_directions=deficient.T,
        )
    return np.linalg.solve(proj_mean, pdy_mean)


def eligible_groups(M: np.ndarray, k: int, trim_c: float | None = None) -> np.ndarray:
    """Boolean mask of groups whose design row space contains e_k.

    Membership is tested by the residual norm of projecting e_k on the row
    space; ``trim_c`` additionally drops groups whose pseudoinverse row k
    has norm above the cutoff (variance control for near-singular designs).
    """
    G, _, cols = M.shape
    e = np.zeros(cols)
    e[k] = 1.0
    mask = np.zeros(G, dtype=bool)
    for g in range(G):
        pinv, _ = _CACHE.get(M[g])
        # rows of pinv span the row space of M; M' M'^+ e_k = (pinv @ M)' e_k
        resid = (pinv @ M[g]).T @ e - e
        if np.linalg.norm(resid) <= MEMBERSHIP_ATOL * (1 + np.linalg.norm(e)):
            if trim_c is not None and np.linalg.norm(pinv[k]) > trim_c:
                continue
            mask[g] = True
    return mask


def estimate_beta_bar(
    M: np.ndarray,
    dY: np.ndarray,
    gamma: np.ndarray,
    k: int,
    trim_c: float | None = None,
):
    """Average lag-k coefficient over the eligible groups.

    Returns (estimate, eligible mask). Raises when no group identifies the
    coefficient.
    """
    mask = eligible_groups(M, k, trim_c)
    if not mask.any():
        raise CoefficientNotIdentified(
            f"no group identifies coefficient {k} "
            f"(row space never contains e_{k}"
            + (", after trimming" if trim_c is not None else "")
            + ")"
        )
    vals = []
    for g in np.flatnonzero(mask):
        pinv, _ = _CACHE.get(M[g])
        vals.append(float(pinv[k] @ (dY[g] - gamma)))
    return float(np.mean(vals)), mask


def _estimate_all(panel: Panel, variant: str, K: int | None, trim_c: float | None):
    M, dY, labels = build_m(panel, variant, K)
    gamma = estimate_gamma(M, dY)
    beta = {}
    n_eligible = {}
    not_identified = []
    for k, label in enumerate(labels):
        try:
            est, mask = estimate_beta_bar(M, dY, gamma, k, trim_c)
        except CoefficientNotIdentified:
            not_identified.append(label)
            continue
        beta[label] = est
        n_eligible[label] = int(mask.sum())
    return gamma, labels, beta, n_eligible, not_identified


def rc_full_report(
    panel: Panel,
    variant: str = "k_lag",
    K: int | None = None,
    *,
    trim_c: float | None = None,
    bootstrap_plan: BootstrapPlan | None = None,
    b: int = 0,
    seed: int = 0,
) -> RCEstimate:
    """Trend plus every identified average coefficient, with optional
    group-bootstrap standard errors (trend and coefficients re-estimated
    jointly in each replication)."""
    if variant != "full_lag" and trim_c is None:
        n_unique = len(np.unique(panel.treatment))
        if n_unique > 0.5 * panel.treatment.size and n_unique > 50:
            import warnings

            warnings.warn(
                "treatment doses look continuous; consider a trimming "
                "constant to stabilize the averaged coefficients",
                stacklevel=2,
            )
    gamma, labels, beta, n_eligible, not_identified = _estimate_all(
        panel, variant, K, trim_c
    )
    result = RCEstimate(
        variant=variant,
        n_lags=K,
        labels=labels,
        gamma_hat=gamma,
        beta_bar=beta,
        n_eligible=n_eligible,
        trim_c=trim_c,
        not_identified=not_identified,
    )

    plan = bootstrap_plan
    if plan is None and b > 0:
        identified = [lab for lab in labels if lab in beta]

        def stat(p: Panel) -> np.ndarray:
            g2, labs2, beta2, _, _ = _estimate_all(p, variant, K, trim_c)
            return np.array([beta2.get(lab, np.nan) for lab in identified])

        plan = BootstrapPlan(statistic=stat, b=b, seed=seed)
    if plan is not None:
        boot = bootstrap(plan, panel)
        identified = [lab for lab in labels if lab in beta]
        result.ses = {lab: float(s) for lab, s in zip(identified, boot.se)}
    return result
