"""Distributed-lag two-way fixed-effects regression and its weight
decomposition.

The regression of the outcome on group and period fixed effects plus the
current dose and K lags (cells t >= K+1) is fit by within-transformation.
Each lag coefficient equals a weighted sum of per-group per-lag effects:
the own-lag weights average exactly 1 across groups and the cross-lag
contamination weights average exactly 0, but both can vary wildly and go
negative, which is what the per-group weights and their diagnostics expose.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import RankDeficient
from .panel import Panel

__all__ = [
    "WeightDecomposition",
    "fit_distributed_lag",
    "decompose_weights",
    "reconstruct_beta_from_weights",
]

RANK_RTOL = 1e-10


@dataclass
class WeightDecomposition:
    """Lag coefficients with (optionally) per-group contamination weights.

    ``weights[g, k, k']`` is the loading of group g's lag-k' effect inside
    the lag-k coefficient. ``eta[k]`` holds the partialled-out lag-k
    regressor residuals over the estimation cells (G x (T-K)).
    """

    n_lags: int
    beta_hat: np.ndarray
    eta: np.ndarray | None = field(default=None, repr=False)
    weights: np.ndarray | None = field(default=None, repr=False)
    diagnostics: dict | None = None

    def weight_means(self) -> np.ndarray:
        return self.weights.mean(axis=0)


def _estimation_arrays(panel: Panel, K: int):
    """Outcome and lag-dose matrices over the estimation cells t >= K+1."""
    if not panel.fully_observed:
        raise ValueError("distributed-lag regression requires a fully observed panel")
    T = panel.n_periods
    if K >= T - 1:
        raise ValueError(f"need K < T-1 (K={K}, T={T})")
    Y = panel.outcome[:, K:]  # periods K+1..T
    lags = np.stack(
        [panel.treatment[:, K - k : T - k] for k in range(K + 1)], axis=0
    )  # lag k at cell (g, t) is D_{g, t-k}
    return Y, lags


def _two_way_demean(A: np.ndarray) -> np.ndarray:
    # balanced rectangle: one-shot double demeaning is the exact projection
    return A - A.mean(axis=1, keepdims=True) - A.mean(axis=0, keepdims=True) + A.mean()


def fit_distributed_lag(panel: Panel, K: int, *, leads: int = 0) -> WeightDecomposition:
    """OLS lag coefficients with group and period effects absorbed.

    ``leads`` optionally adds future doses D_{g,t+j} (j = 1..leads) as extra
    regressors, shrinking the sample to t <= T-leads; lead coefficients are
    returned after the K+1 lag coefficients.
    """
    Y, lags = _estimation_arrays(panel, K)
    T = panel.n_periods
    if leads:
        if K + leads >= T - 1:
            raise ValueError("too many leads for the panel length")
        keep = slice(0, T - K - leads)
        Y = Y[:, keep]
        lags = lags[:, :, keep]
        lead_block = np.stack(
            [panel.treatment[:, K + j : T - leads + j] for j in range(1, leads + 1)],
            axis=0,
        )
        lags = np.concatenate([lags, lead_block], axis=0)

    Yd = _two_way_demean(Y)
    Xd = np.stack([_two_way_demean(lags[k]) for k in range(lags.shape[0])], axis=0)

    n_reg = Xd.shape[0]
    X = Xd.reshape(n_reg, -1).T  # cells x regressors
    sv = np.linalg.svd(X, compute_uv=False)
    if sv[-1] <= RANK_RTOL * sv[0]:
        _, _, Vt = np.linalg.svd(X)
        raise RankDeficient(
            "lag regressors are collinear after absorbing fixed effects; "
            f"null combination {np.round(Vt[-1], 6).tolist()}",
            combination=Vt[-1],
        )
    beta, *_ = np.linalg.lstsq(X, Yd.ravel(), rcond=None)
    return WeightDecomposition(n_lags=K, beta_hat=beta)


def decompose_weights(panel: Panel, K: int) -> WeightDecomposition:
    """Full decomposition: coefficients, residualized lags, per-group weights.

    eta[k] is the residual of lag k on both fixed effects and the other
    lags; the weight of group g's lag-k' effect in the lag-k coefficient is
    sum_t eta[k]_{g,t} D_{g,t-k'} over the group-average own-lag cross
    moment.
    """
    fit = fit_distributed_lag(panel, K)
    Y, lags = _estimation_arrays(panel, K)
    G = panel.n_groups
    Xd = np.stack([_two_way_demean(lags[k]) for k in range(K + 1)], axis=0)

    eta = np.empty_like(Xd)
    for k in range(K + 1):
        others = [j for j in range(K + 1) if j != k]
        if others:
            Z = Xd[others].reshape(len(others), -1).T
            target = Xd[k].ravel()
            coef, *_ = np.linalg.lstsq(Z, target, rcond=None)
            eta[k] = (target - Z @ coef).reshape(Xd[k].shape)
        else:
            eta[k] = Xd[k]

    weights = np.empty((G, K + 1, K + 1))
    for k in range(K + 1):
        denom = np.sum(eta[k] * lags[k]) / G
        for kp in range(K + 1):
            weights[:, k, kp] = np.sum(eta[k] * lags[kp], axis=1) / denom
        # Frisch-Waugh cross-check; both paths must agree to float precision
        beta_fw = np.sum(eta[k] * Y) / (denom * G)
        if not np.isclose(beta_fw, fit.beta_hat[k], rtol=0, atol=1e-8 * max(1, abs(beta_fw))):
            raise AssertionError("Frisch-Waugh identity violated; numerical issue")

    diagnostics = {}
    for k in range(K + 1):
        for kp in range(K + 1):
            w = weights[:, k, kp]
            diagnostics[(k, kp)] = {
                "mean": float(w.mean()),
                "std": float(w.std(ddof=1)) if G > 1 else 0.0,
                "min": float(w.min()),
                "max": float(w.max()),
                "q25": float(np.quantile(w, 0.25)),
                "q50": float(np.quantile(w, 0.50)),
                "q75": float(np.quantile(w, 0.75)),
                "q99": float(np.quantile(w, 0.99)),
                "negative_share": float((w < 0).mean()),
            }

    return WeightDecomposition(
        n_lags=K,
        beta_hat=fit.beta_hat,
        eta=eta,
        weights=weights,
        diagnostics=diagnostics,
    )


def reconstruct_beta_from_weights(
    decomp: WeightDecomposition, group_betas: np.ndarray
) -> np.ndarray:
    """Weighted reconstruction (1/G) sum_g sum_k' W_g^{k,k'} beta_{g,k'}.

    ``group_betas`` is G x (K+1) with the per-group effect of each lag
    (available in simulations). On a noise-free panel this reproduces the
    fitted coefficients exactly.
    """
    betas = np.asarray(group_betas, dtype=float)
    G, K1 = decomp.weights.shape[0], decomp.weights.shape[1]
    if betas.shape != (G, K1):
        raise ValueError(f"expected group betas of shape {(G, K1)}, got {betas.shape}")
    return np.einsum("gkj,gj->k", decomp.weights, betas) / G
