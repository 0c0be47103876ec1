import numpy as np
import pytest

from conftest import make_panel

from avsq import simlab
from avsq.design import analyze_design
from avsq.dyn_tests import test_balanced as balanced_test
from avsq.dyn_tests import test_reversion as reversion_test
from avsq.errors import TestInfeasible

pytestmark = pytest.mark.filterwarnings("ignore::RuntimeWarning")


def static_effect_oracle(seed, G=300, T=6, reverters=True):
    """Panel with a purely static effect: Y_t = alpha + trend + b * D_t."""
    rng = np.random.default_rng(seed)
    T_grid = np.arange(1, T + 1)
    F = rng.integers(2, T, size=G)
    never = rng.random(G) < 0.25
    D = (T_grid[None, :] >= F[:, None]).astype(float)
    if reverters:
        # half of the switchers revert two periods after switching
        revert = (rng.random(G) < 0.5) & ~never
        for g in np.flatnonzero(revert):
            D[g, F[g]:] = 0.0
    D[never] = 0.0
    alpha = rng.normal(size=G)
    trend = np.cumsum(rng.normal(size=T))
    beta = 1.7
    Y = alpha[:, None] + trend[None, :] + beta * D
    return make_panel(D, Y=Y)


def test_reversion_horizon_one_infeasible(make):
    p = make([[0, 1, 0], [0, 0, 0]])
    info = analyze_design(p)
    with pytest.raises(TestInfeasible):
        reversion_test(p, info, 1)


def test_reversion_absorbing_design_infeasible(make):
    p = make([[0, 1, 1, 1], [0, 0, 1, 1], [0, 0, 0, 0]])
    info = analyze_design(p)
    with pytest.raises(TestInfeasible):
        reversion_test(p, info, 2)


def test_reversion_static_effects_zero():
    p = static_effect_oracle(seed=0)
    info = analyze_design(p)
    res = reversion_test(p, info, 2, b=50, seed=1)
    # noise-free static DGP: the reverting contrast is exactly zero
    assert res.estimates[0] == pytest.approx(0.0, abs=1e-10)
    assert res.variant == "reversion"
    assert res.n_obs[0] > 0


def test_reversion_detects_lag_effect():
    # add a genuine lag effect: reverting switchers keep a residual imprint
    rng = np.random.default_rng(3)
    G, T = 400, 6
    F = rng.integers(2, 4, size=G)
    never = rng.random(G) < 0.3
    D = (np.arange(1, T + 1)[None, :] >= F[:, None]).astype(float)
    revert = (rng.random(G) < 0.5) & ~never
    for g in np.flatnonzero(revert):
        D[g, F[g]:] = 0.0
    D[never] = 0.0
    lag1 = np.concatenate([D[:, :1], D[:, :-1]], axis=1)
    Y = 1.0 * D + 0.8 * lag1
    p = make_panel(D, Y=Y)
    info = analyze_design(p)
    res = reversion_test(p, info, 2, b=60, seed=2)
    assert abs(res.estimates[0]) > 0.2
    assert res.pvalues[0] < 0.05


def test_balanced_needs_two_horizons(make):
    p = make([[0, 1, 1], [0, 0, 0]])
    info = analyze_design(p)
    with pytest.raises(TestInfeasible):
        balanced_test(p, info, 1)


def test_balanced_static_effects_equal_and_p_one():
    p = static_effect_oracle(seed=5, reverters=False)
    info = analyze_design(p)
    res = balanced_test(p, info, 2, b=60, seed=3)
    assert res.estimates[0] == pytest.approx(res.estimates[1], abs=1e-10)
    assert res.joint_pvalue == pytest.approx(1.0, abs=1e-6)
    assert res.horizons == [1, 2]
    assert len(res.estimates) == 2 and res.joint_pvalue is not None


def test_balanced_same_switcher_count_across_horizons():
    p = static_effect_oracle(seed=6, reverters=False)
    info = analyze_design(p)
    res = balanced_test(p, info, 3, b=40, seed=4)
    assert np.all(res.n_obs == res.n_obs[0])


def test_balanced_detects_lag_effect():
    cfg = simlab.SimConfig(n_groups=600, n_periods=6, design="staggered",
                           n_lags=1, seed=7, noise_scale=0.2,
                           beta_mean=(1.0, 0.5))
    o = simlab.generate(cfg)
    info = analyze_design(o.panel)
    res = balanced_test(o.panel, info, 2, b=80, seed=5)
    # horizon 2 picks up beta0 + beta1, horizon 1 only beta0
    assert res.estimates[1] - res.estimates[0] == pytest.approx(0.5, abs=0.15)
    assert res.joint_pvalue < 0.05


def test_balanced_infeasible_without_controls(make):
    # every group switches at period 2: no control set at any horizon
    p = make([[0, 1, 1], [0, 1, 1]])
    info = analyze_design(p)
    with pytest.raises(TestInfeasible):
        balanced_test(p, info, 2)
