"""Synthetic panels with fully known potential outcomes.

Every generated panel stores its common trend, per-group coefficients, and
noise, and exposes the potential-outcome function directly, so that each
identification claim can be checked against a brute-force evaluation rather
than against the estimator being tested.

Outcome model: group effect + common trend + per-lag coefficients times the
dose path (doses before period 1 held at the period-1 dose, so the
status-quo counterfactual has exactly parallel evolutions), plus optional
pairwise lag interactions, plus independent mean-zero noise. Parallel
trends therefore holds by construction and placebo estimands are sharp
zeros in expectation.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import ConfigError
from .panel import Panel

__all__ = ["SimConfig", "OraclePanel", "generate"]

DESIGNS = (
    "staggered",
    "one_exit",
    "dose_staggered",
    "baseline_varying",
    "no_stayers_continuous",
)


@dataclass(frozen=True)
class SimConfig:
    """Knobs of the data-generating process.

    ``beta_f_corr[k]`` adds (standardized first-switch date) times the given
    loading to every group's lag-k coefficient: the mechanism that makes
    regression weights and effects correlated, which is what the TWFE bias
    demonstrations need. ``interaction_mean``/``interaction_sd`` (one entry
    per pair k<k') switch on pairwise lag-interaction effects.
    """

    n_groups: int
    n_periods: int
    design: str = "staggered"
    n_lags: int = 1
    seed: int = 0
    never_share: float = 0.2
    dose_values: Sequence[float] = (1.0,)
    switch_prob: float = 0.3
    beta_mean: Sequence[float] | None = None
    beta_sd: Sequence[float] | None = None
    beta_f_corr: Sequence[float] | None = None
    interaction_mean: Sequence[float] | None = None
    interaction_sd: Sequence[float] | None = None
    noise_scale: float = 1.0
    trend_scale: float = 1.0
    trend: Sequence[float] | None = None
    alpha_scale: float = 1.0

    def __post_init__(self):
        if self.design not in DESIGNS:
            raise ConfigError(f"unknown design generator {self.design!r}")
        if self.n_groups < 2 or self.n_periods < 2:
            raise ConfigError("need at least 2 groups and 2 periods")
        if self.n_lags >= self.n_periods - 1:
            raise ConfigError(
                f"need n_lags < T-1 (n_lags={self.n_lags}, T={self.n_periods})"
            )
        if not self.dose_values:
            raise ConfigError("dose_values must be nonempty")


def _draw_first_switch(rng, G, T, never_share):
    F = rng.integers(2, T + 1, size=G)
    F[rng.random(G) < never_share] = T + 1
    return F


def _make_doses(cfg: SimConfig, rng) -> np.ndarray:
    G, T = cfg.n_groups, cfg.n_periods
    doses = np.asarray(cfg.dose_values, dtype=float)
    t_grid = np.arange(1, T + 1)

    if cfg.design == "staggered":
        F = _draw_first_switch(rng, G, T, cfg.never_share)
        return (t_grid[None, :] >= F[:, None]).astype(float)

    if cfg.design == "one_exit":
        F = _draw_first_switch(rng, G, T, cfg.never_share)
        E = np.where(F <= T, rng.integers(0, T, size=G) % np.maximum(T - F + 1, 1) + F, 0)
        return ((t_grid[None, :] >= F[:, None]) & (t_grid[None, :] <= E[:, None])).astype(
            float
        )

    if cfg.design == "dose_staggered":
        F = _draw_first_switch(rng, G, T, cfg.never_share)
        I = doses[rng.integers(0, len(doses), size=G)]
        return I[:, None] * (t_grid[None, :] >= F[:, None])

    if cfg.design == "baseline_varying":
        D = np.empty((G, T))
        D[:, 0] = doses[rng.integers(0, len(doses), size=G)]
        for t in range(1, T):
            move = rng.random(G) < cfg.switch_prob
            D[:, t] = np.where(
                move, doses[rng.integers(0, len(doses), size=G)], D[:, t - 1]
            )
        return D

    # no_stayers_continuous: every group switches at period 2 almost surely
    return rng.normal(size=(G, T))


@dataclass
class OraclePanel:
    """Generated panel plus everything needed for brute-force checks."""

    panel: Panel
    config: SimConfig
    alpha: np.ndarray
    trend: np.ndarray  # cumulative common trend, length T
    beta: np.ndarray  # G x (K+1)
    beta_inter: np.ndarray | None  # G x n_pairs, pairs sorted (k, k') with k < k'
    noise: np.ndarray

    @property
    def gamma_increments(self) -> np.ndarray:
        """Per-period trend increments (the RC common-trend vector source)."""
        return np.diff(self.trend)

    def _pairs(self):
        K = self.config.n_lags
        return [(k, kp) for k in range(K + 1) for kp in range(k + 1, K + 1)]

    def potential_outcome(self, g: int, t: int, path) -> float:
        """Y of group g at period t (1-based) under the given dose path.

        ``path`` supplies doses for periods 1..t (longer paths are
        truncated); doses before period 1 are held at the path's period-1
        value. Includes the group's realized noise, which is
        path-independent.
        """
        d = np.asarray(path, dtype=float)[:t]
        if len(d) < t:
            raise ValueError(f"path too short for period {t}")

        def lag(k):
            j = t - 1 - k
            return d[j] if j >= 0 else d[0]

        K = self.config.n_lags
        val = self.alpha[g] + self.trend[t - 1] + self.noise[g, t - 1]
        for k in range(K + 1):
            val += self.beta[g, k] * lag(k)
        if self.beta_inter is not None:
            for j, (k, kp) in enumerate(self._pairs()):
                val += self.beta_inter[g, j] * lag(k) * lag(kp)
        return float(val)

    def status_quo_outcome(self, g: int, t: int) -> float:
        d1 = self.panel.treatment[g, 0]
        return self.potential_outcome(g, t, [d1] * t)

    # -- brute-force classification, independent of the design module ------

    def first_switch(self, g: int) -> int:
        D = self.panel.treatment[g]
        for t in range(2, self.panel.n_periods + 1):
            if D[t - 1] != D[0]:
                return t
        return self.panel.n_periods + 1

    def switch_sign(self, g: int) -> int:
        f = self.first_switch(g)
        if f > self.panel.n_periods:
            return 0
        return int(np.sign(self.panel.treatment[g, f - 1] - self.panel.treatment[g, 0]))

    def _no_crossing_through(self, g: int, t: int) -> bool:
        D = self.panel.treatment[g]
        seg = D[1:t]
        return bool(np.all(seg >= D[0]) or np.all(seg <= D[0]))

    def switcher_set(self, ell: int) -> list[int]:
        """Finite-sample switcher set at horizon ``ell`` by direct scan:
        observed switch, evaluation period in the panel, no crossing through
        it, and at least one same-baseline not-yet-switched control."""
        T = self.panel.n_periods
        out = []
        for g in range(self.panel.n_groups):
            f = self.first_switch(g)
            if f > T or f - 1 + ell > T:
                continue
            if not self._no_crossing_through(g, f - 1 + ell):
                continue
            tau = f - 1 + ell
            has_control = any(
                self.panel.treatment[h, 0] == self.panel.treatment[g, 0]
                and self.first_switch(h) > tau
                for h in range(self.panel.n_groups)
            )
            if has_control:
                out.append(g)
        return out

    def oracle_avsq(self, ell: int, members: Sequence[int] | None = None) -> float:
        """Exact actual-versus-status-quo contrast averaged over the
        switcher set (or an explicit membership list)."""
        if members is None:
            members = self.switcher_set(ell)
        if len(members) == 0:
            raise ValueError(f"empty switcher set at horizon {ell}")
        vals = []
        for g in members:
            f = self.first_switch(g)
            tau = f - 1 + ell
            actual = self.panel.outcome[g, tau - 1]
            sq = self.status_quo_outcome(g, tau)
            vals.append(self.switch_sign(g) * (actual - sq))
        return float(np.mean(vals))

    def oracle_slopes(self, ell: int, members: Sequence[int] | None = None):
        """Per-group per-lag potential-outcome slopes and weight shares.

        The lag-k slope switches only the dose at period F-1+ell-k between
        its status-quo and actual value, holding earlier doses actual and
        later doses at status quo; unchanged lags get slope 0 (the 0/0
        convention). Weights are the signed per-lag dose changes over the
        average cumulative dose change.
        """
        if members is None:
            members = self.switcher_set(ell)
        members = list(members)
        D = self.panel.treatment
        slopes = np.zeros((len(members), ell))
        raw_w = np.zeros((len(members), ell))
        cum = np.zeros(len(members))
        for i, g in enumerate(members):
            f = self.first_switch(g)
            s = self.switch_sign(g)
            tau = f - 1 + ell
            d1 = D[g, 0]
            cum[i] = s * float(np.sum(D[g, f - 1 : tau] - d1))
            for k in range(ell):
                t_k = tau - k
                if D[g, t_k - 1] == d1:
                    continue  # unchanged lag: slope and weight both zero
                path_hi = list(D[g, : t_k]) + [d1] * (tau - t_k)
                path_lo = list(D[g, : t_k - 1]) + [d1] * (tau - t_k + 1)
                num = self.potential_outcome(g, tau, path_hi) - self.potential_outcome(
                    g, tau, path_lo
                )
                slopes[i, k] = num / (D[g, t_k - 1] - d1)
                raw_w[i, k] = s * (D[g, t_k - 1] - d1)
        dose_delta = float(np.mean(cum))
        omega = raw_w / dose_delta if dose_delta != 0 else np.zeros_like(raw_w)
        return members, slopes, omega, dose_delta


def generate(cfg: SimConfig) -> OraclePanel:
    """Draw a reproducible panel from the configured process."""
    rng = np.random.default_rng(cfg.seed)
    G, T, K = cfg.n_groups, cfg.n_periods, cfg.n_lags

    D = _make_doses(cfg, rng)

    beta_mean = np.asarray(
        cfg.beta_mean if cfg.beta_mean is not None else [1.0] + [0.0] * K, dtype=float
    )
    beta_sd = np.asarray(
        cfg.beta_sd if cfg.beta_sd is not None else np.zeros(K + 1), dtype=float
    )
    if len(beta_mean) != K + 1 or len(beta_sd) != K + 1:
        raise ConfigError(f"beta_mean and beta_sd must have length {K + 1}")
    beta = beta_mean[None, :] + beta_sd[None, :] * rng.normal(size=(G, K + 1))

    if cfg.beta_f_corr is not None:
        load = np.asarray(cfg.beta_f_corr, dtype=float)
        if len(load) != K + 1:
            raise ConfigError(f"beta_f_corr must have length {K + 1}")
        # standardized first-switch date (never-switchers sit at T+1)
        first = np.array(
            [
                next((t for t in range(2, T + 1) if D[g, t - 1] != D[g, 0]), T + 1)
                for g in range(G)
            ],
            dtype=float,
        )
        spread = first.std()
        f_std = (first - first.mean()) / (spread if spread > 0 else 1.0)
        beta = beta + f_std[:, None] * load[None, :]

    pairs = [(k, kp) for k in range(K + 1) for kp in range(k + 1, K + 1)]
    beta_inter = None
    if cfg.interaction_mean is not None:
        imean = np.asarray(cfg.interaction_mean, dtype=float)
        isd = np.asarray(
            cfg.interaction_sd if cfg.interaction_sd is not None else np.zeros(len(pairs)),
            dtype=float,
        )
        if len(imean) != len(pairs) or len(isd) != len(pairs):
            raise ConfigError(f"interaction terms must have length {len(pairs)}")
        beta_inter = imean[None, :] + isd[None, :] * rng.normal(size=(G, len(pairs)))

    if cfg.trend is not None:
        trend = np.asarray(cfg.trend, dtype=float)
        if len(trend) != T:
            raise ConfigError(f"trend must have length {T}")
    else:
        trend = np.concatenate(
            [[0.0], np.cumsum(rng.normal(scale=cfg.trend_scale, size=T - 1))]
        )

    alpha = rng.normal(scale=cfg.alpha_scale, size=G)
    noise = (
        rng.normal(scale=cfg.noise_scale, size=(G, T))
        if cfg.noise_scale > 0
        else np.zeros((G, T))
    )

    # realized outcomes: common part + lag effects with pre-period padding
    d1 = D[:, 0]
    Y = alpha[:, None] + trend[None, :] + noise
    for k in range(K + 1):
        lagged = np.concatenate([np.repeat(d1[:, None], k, axis=1), D[:, : T - k]], axis=1)
        Y = Y + beta[:, k : k + 1] * lagged
    if beta_inter is not None:
        for j, (k, kp) in enumerate(pairs):
            lag_k = np.concatenate(
                [np.repeat(d1[:, None], k, axis=1), D[:, : T - k]], axis=1
            )
            lag_kp = np.concatenate(
                [np.repeat(d1[:, None], kp, axis=1), D[:, : T - kp]], axis=1
            )
            Y = Y + beta_inter[:, j : j + 1] * lag_k * lag_kp

    panel = Panel(
        groups=np.arange(G),
        period_labels=np.arange(1, T + 1),
        outcome=Y,
        treatment=D,
        weight=np.ones(G),
    )
    return OraclePanel(
        panel=panel,
        config=cfg,
        alpha=alpha,
        trend=trend,
        beta=beta,
        beta_inter=beta_inter,
        noise=noise,
    )
