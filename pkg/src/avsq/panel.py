"""Balanced long-panel ingestion and the dense group-by-period store.

A :class:`Panel` holds outcomes and treatment doses as dense ``G x T``
matrices, with groups sorted by identifier so that every downstream
computation is deterministic across runs and platforms. Treatment values are
kept bit-exact: stayer/switcher classification is set membership, and fuzzy
matching would silently change which baseline doses count as stayer-rich.

Subsample tests re-estimate on panels where some groups are only observed on
a prefix of periods. Those are represented with a per-group ``obs_until``
horizon; cells past the horizon are NaN-filled and must never be read.
"""

from __future__ import annotations

import json
import warnings
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
import pandas as pd

from .errors import DuplicateCell, EmptySubsample, ParseError, UnbalancedPanel

__all__ = ["Panel", "load_panel", "restrict"]


@dataclass(frozen=True)
class Panel:
    """Balanced panel of G groups over periods reindexed to 1..T.

    ``outcome`` and ``treatment`` are ``G x T`` float matrices, rows ordered
    by sorted group identifier. ``period_labels`` keeps the original period
    values (e.g. election years). ``obs_until[g]`` is the last observed
    period of group ``g`` (T for fully observed groups); entries past it are
    NaN.
    """

    groups: np.ndarray
    period_labels: np.ndarray
    outcome: np.ndarray
    treatment: np.ndarray
    weight: np.ndarray
    obs_until: np.ndarray = field(default=None)  # type: ignore[assignment]

    def __post_init__(self):
        if self.obs_until is None:
            object.__setattr__(
                self, "obs_until", np.full(self.n_groups, self.n_periods, dtype=int)
            )
        for arr in (self.outcome, self.treatment, self.weight, self.obs_until):
            arr.setflags(write=False)
        self.groups.setflags(write=False)

    @property
    def n_groups(self) -> int:
        return self.outcome.shape[0]

    @property
    def n_periods(self) -> int:
        return self.outcome.shape[1]

    @property
    def fully_observed(self) -> bool:
        return bool(np.all(self.obs_until == self.n_periods))

    def to_json(self) -> str:
        """Canonical JSON dump, mainly for debugging and round-trip tests."""
        payload = {
            "groups": self.groups.tolist(),
            "periods": self.period_labels.tolist(),
            "outcome": self.outcome.tolist(),
            "treatment": self.treatment.tolist(),
            "weight": self.weight.tolist(),
            "obs_until": self.obs_until.tolist(),
        }
        return json.dumps(payload, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "Panel":
        payload = json.loads(text)
        return cls(
            groups=np.asarray(payload["groups"]),
            period_labels=np.asarray(payload["periods"]),
            outcome=np.asarray(payload["outcome"], dtype=float),
            treatment=np.asarray(payload["treatment"], dtype=float),
            weight=np.asarray(payload["weight"], dtype=float),
            obs_until=np.asarray(payload["obs_until"], dtype=int),
        )

    def to_frame(self) -> pd.DataFrame:
        """Long-format view (observed cells only)."""
        rows = []
        for i, g in enumerate(self.groups):
            for j in range(self.obs_until[i]):
                rows.append(
                    (g, self.period_labels[j], self.outcome[i, j],
                     self.treatment[i, j], self.weight[i])
                )
        return pd.DataFrame(
            rows, columns=["group", "period", "outcome", "treatment", "weight"]
        )


def load_panel(
    source,
    *,
    group: str = "group",
    period: str = "period",
    outcome: str = "outcome",
    treatment: str = "treatment",
    weight: str | None = None,
) -> Panel:
    """Build a balanced Panel from tabular rows.

    ``source`` is a path to a delimited text file, a DataFrame, or any
    sequence of mappings. Periods are reindexed to 1..T preserving sort
    order; groups are sorted by identifier. Every (group, period) pair must
    appear exactly once.
    """
    if isinstance(source, pd.DataFrame):
        df = source
    elif isinstance(source, (str,)) or hasattr(source, "read"):
        df = pd.read_csv(source)
    else:
        df = pd.DataFrame(list(source))

    for col in (group, period, outcome, treatment):
        if col not in df.columns:
            raise ParseError(f"column {col!r} not found (have {list(df.columns)})")

    df = df[[group, period, outcome, treatment] + ([weight] if weight else [])].copy()
    for col in (outcome, treatment):
        coerced = pd.to_numeric(df[col], errors="coerce")
        bad = coerced.isna() & df[col].notna()
        if bad.any():
            raise ParseError(
                f"non-numeric values in column {col!r}: "
                f"{df.loc[bad, col].unique()[:5].tolist()}"
            )
        if coerced.isna().any():
            raise ParseError(f"missing values in column {col!r}")
        df[col] = coerced.astype(float)

    dup = df.duplicated(subset=[group, period], keep=False)
    if dup.any():
        cells = df.loc[dup, [group, period]].drop_duplicates().itertuples(index=False)
        raise DuplicateCell([tuple(c) for c in cells])

    periods = np.sort(df[period].unique())
    groups = np.sort(df[group].unique())
    G, T = len(groups), len(periods)
    if G < 2 or T < 2:
        raise ParseError(f"need at least 2 groups and 2 periods, got G={G}, T={T}")

    counts = df.groupby(group)[period].nunique()
    short = counts[counts < T]
    if len(short) > 0:
        raise UnbalancedPanel(short.index.tolist())

    gidx = pd.Categorical(df[group], categories=groups).codes
    pidx = pd.Categorical(df[period], categories=periods).codes
    Y = np.full((G, T), np.nan)
    D = np.full((G, T), np.nan)
    Y[gidx, pidx] = df[outcome].to_numpy()
    D[gidx, pidx] = df[treatment].to_numpy()

    if weight:
        w = np.full(G, np.nan)
        w[gidx] = pd.to_numeric(df[weight], errors="coerce").to_numpy()
        if np.any(~np.isfinite(w)) or np.any(w <= 0):
            raise ParseError("group weights must be positive and numeric")
        per_group = df.groupby(group)[weight].nunique()
        if (per_group > 1).any():
            raise ParseError("group weight must be constant within group")
    else:
        w = np.ones(G)

    panel = Panel(
        groups=groups,
        period_labels=periods,
        outcome=Y,
        treatment=D,
        weight=w,
    )
    n_unique = len(np.unique(D))
    if n_unique > 0.5 * G * T and n_unique > 50:
        warnings.warn(
            "treatment looks continuous (many unique doses); stayer-based "
            "estimators may have no usable baseline dose",
            stacklevel=2,
        )
    return panel


def restrict(panel: Panel, keep_cell: Callable | np.ndarray) -> Panel:
    """Subsample a panel, keeping the cells selected by ``keep_cell``.

    ``keep_cell(group_id, t)`` is evaluated on observed cells (``t`` is the
    1-based reindexed period); a precomputed G x T boolean mask is accepted
    directly. For every retained group the kept periods must form a prefix
    1..n; this is what the reversion and balanced-path subsample tests need,
    and it keeps first-switch dates well defined. Groups with no kept cells
    are dropped.
    """
    G, T = panel.n_groups, panel.n_periods
    observed = np.arange(1, T + 1)[None, :] <= panel.obs_until[:, None]
    if isinstance(keep_cell, np.ndarray):
        keep = keep_cell & observed
    else:
        keep = np.zeros((G, T), dtype=bool)
        for i, g in enumerate(panel.groups):
            for t in range(1, panel.obs_until[i] + 1):
                keep[i, t - 1] = bool(keep_cell(g, t))

    kept_groups = keep.any(axis=1)
    if not kept_groups.any():
        raise EmptySubsample("no cells survive the restriction")

    n_kept = keep.sum(axis=1)
    # prefix check: kept cells must be exactly 1..n_kept
    expected = np.arange(T) < n_kept[:, None]
    if not np.array_equal(keep[kept_groups], expected[kept_groups]):
        bad = panel.groups[kept_groups & ~(keep == expected).all(axis=1)]
        raise ParseError(
            f"restriction does not keep a prefix of periods for groups {bad[:5].tolist()}"
        )

    idx = np.flatnonzero(kept_groups)
    Y = panel.outcome[idx].copy()
    D = panel.treatment[idx].copy()
    obs = n_kept[idx].astype(int)
    mask = np.arange(T)[None, :] >= obs[:, None]
    Y[mask] = np.nan
    D[mask] = np.nan
    return Panel(
        groups=panel.groups[idx].copy(),
        period_labels=panel.period_labels,
        outcome=Y,
        treatment=D,
        weight=panel.weight[idx].copy(),
        obs_until=obs,
    )


def resample_groups(panel: Panel, indices: Sequence[int]) -> Panel:
    """Panel made of the given group rows (with repetition allowed).

    Resampled groups get fresh identifiers 0..G-1 so that duplicated draws
    count as distinct groups, as required by the cluster bootstrap.
    """
    idx = np.asarray(indices, dtype=int)
    return Panel(
        groups=np.arange(len(idx)),
        period_labels=panel.period_labels,
        outcome=panel.outcome[idx].copy(),
        treatment=panel.treatment[idx].copy(),
        weight=panel.weight[idx].copy(),
        obs_until=panel.obs_until[idx].copy(),
    )
