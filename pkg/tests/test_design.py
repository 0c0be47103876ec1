import numpy as np
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import make_panel
from avsq.design import analyze_design, design_summary, in_d_ell


def test_simple_switch_up(make):
    info = analyze_design(make([[1, 1, 2], [1, 1, 1]]))
    assert info.F[0] == 3 and info.S[0] == 1
    assert info.F[1] == 4 and info.S[1] == 0


def test_crossing_detected(make):
    # d3 < d1 < d2: path leaves the no-crossing set at t=3
    info = analyze_design(make([[1, 2, 0], [1, 1, 1]]))
    assert info.nc_until[0] == 2
    assert info.F[0] == 2 and info.S[0] == 1


def test_all_stayers(make):
    info = analyze_design(make([[1, 1, 1], [2, 2, 2]]))
    assert np.all(info.F == 4) and np.all(info.S == 0)
    assert info.dr1 == frozenset()


def test_never_switcher_sentinel(make):
    info = analyze_design(make([[0, 0, 0, 0], [0, 1, 1, 1]]))
    assert info.F[0] == 5 and info.S[0] == 0


def test_switch_down_sign(make):
    info = analyze_design(make([[3, 3, 1], [3, 3, 3]]))
    assert info.S[0] == -1


def test_n_switches_counts_changes(make):
    info = analyze_design(make([[0, 1, 0, 1], [0, 0, 0, 0]]))
    assert info.n_switches[0] == 3 and info.n_switches[1] == 0


def test_dr1_needs_two_groups_and_two_f_values(make):
    # baseline 0: two groups, F in {2, 5}: stayer-rich.
    # baseline 7: two groups but identical F: not stayer-rich.
    info = analyze_design(make([[0, 1, 1, 1], [0, 0, 0, 0],
                                [7, 8, 8, 8], [7, 8, 8, 8]]))
    assert info.dr1 == frozenset({0.0})


def test_tbar_last_control_horizon(make):
    # baseline 0 groups: F = 2, 4, 5(never) -> max(F-1) = 4
    info = analyze_design(make([[0, 1, 1, 1], [0, 0, 0, 1], [0, 0, 0, 0]]))
    assert info.tbar[0.0] == 4


def test_in_d_ell_staggered(make):
    p = make([[0, 1, 1, 1], [0, 0, 0, 0]])
    info = analyze_design(p)
    assert in_d_ell(0, 1, info)
    assert in_d_ell(0, 2, info)
    assert not in_d_ell(1, 1, info)  # never-switcher


def test_in_d_ell_crossing_blocks(make):
    p = make([[1, 2, 0], [1, 1, 1], [1, 1, 2]])
    info = analyze_design(p)
    assert in_d_ell(0, 1, info)
    assert not in_d_ell(0, 2, info)  # crossing at t=3


def test_in_d_ell_beyond_tbar(make):
    # only baseline-0 F values are 2 and 3 -> tbar = 2; horizon 2 overruns it
    p = make([[0, 1, 1], [0, 0, 1], [0, 0, 1]])
    info = analyze_design(p)
    assert info.tbar[0.0] == 2
    assert in_d_ell(0, 1, info)
    assert not in_d_ell(0, 2, info)


def brute_force_first_switch(D_row):
    for t in range(2, len(D_row) + 1):
        if D_row[t - 1] != D_row[0]:
            return t
    return len(D_row) + 1


def brute_force_nc_until(D_row):
    best = 1
    for t in range(1, len(D_row) + 1):
        prefix = D_row[:t]
        if min(prefix) >= D_row[0] or max(prefix) <= D_row[0]:
            best = t
        else:
            break
    return best


@settings(max_examples=100, deadline=None)
@given(
    G=st.integers(2, 8),
    T=st.integers(2, 8),
    seed=st.integers(0, 10**6),
    n_doses=st.integers(2, 4),
)
def test_classification_matches_linear_scan(G, T, seed, n_doses):
    rng = np.random.default_rng(seed)
    D = rng.integers(0, n_doses, size=(G, T)).astype(float)
    info = analyze_design(make_panel(D))
    for g in range(G):
        f = brute_force_first_switch(D[g])
        assert info.F[g] == f
        assert info.nc_until[g] == brute_force_nc_until(D[g])
        if f > T:
            assert info.S[g] == 0
        else:
            assert info.S[g] == np.sign(D[g, f - 1] - D[g, 0])
        assert info.n_switches[g] == int(np.sum(D[g, 1:] != D[g, :-1]))


@settings(max_examples=50, deadline=None)
@given(G=st.integers(2, 10), T=st.integers(3, 8), seed=st.integers(0, 10**6))
def test_binary_staggered_invariants(G, T, seed):
    rng = np.random.default_rng(seed)
    F = rng.integers(2, T + 2, size=G)
    D = (np.arange(1, T + 1)[None, :] >= F[:, None]).astype(float)
    info = analyze_design(make_panel(D))
    assert set(np.unique(info.S)) <= {0, 1}
    assert np.all(info.nc_until == T)


def test_design_summary_counts(make):
    p = make([[0, 1, 1], [0, 0, 0], [0, 0, 0], [1, 0, 0]])
    info = analyze_design(p)
    s = design_summary(p, info)
    assert s["n_groups"] == 4
    assert s["n_switchers"] == 2
    assert s["n_never_switchers"] == 2
    assert s["share_switch_up"] == 0.5
    assert s["share_no_crossing"] == 1.0
    assert s["first_switch_hist"] == {"2": [1, 1]}


def test_design_summary_all_stayers(make):
    p = make([[1, 1], [1, 1]])
    s = design_summary(p, analyze_design(p))
    assert s["n_never_switchers"] == 2
    assert s["share_switch_up"] is None


def test_design_summary_staggered_no_crossing_share(make):
    rng = np.random.default_rng(0)
    F = rng.integers(2, 7, size=30)
    D = (np.arange(1, 7)[None, :] >= F[:, None]).astype(float)
    p = make(D)
    s = design_summary(p, analyze_design(p))
    assert s["share_no_crossing"] == 1.0
