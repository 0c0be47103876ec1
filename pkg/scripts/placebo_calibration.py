#!/usr/bin/env python3
"""Calibration check for placebo estimates and the joint equality test.

Under a parallel-trends process the placebo contrasts should center on zero
and the Wald equality test's p-values should be uniform. This script runs a
small Monte Carlo and prints the placebo t-statistics, the empirical
rejection rate at 5%, and a Kolmogorov-Smirnov uniformity p-value.
"""

import argparse

import numpy as np
from scipy import stats

from avsq import simlab
from avsq.design import analyze_design
from avsq.estimators import avsq_placebo
from avsq.inference import BootstrapPlan, bootstrap, wald_equal


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--reps", type=int, default=200)
    ap.add_argument("--groups", type=int, default=200)
    ap.add_argument("--bootstrap", type=int, default=100)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    def stat(panel):
        info = analyze_design(panel)
        return np.array([avsq_placebo(panel, info, ell).estimate
                         for ell in (1, 2)])

    ests, pvals = [], []
    for rep in range(args.reps):
        cfg = simlab.SimConfig(n_groups=args.groups, n_periods=6,
                               design="staggered", n_lags=1,
                               seed=args.seed + rep, noise_scale=1.0,
                               beta_mean=(1.0, 0.3))
        o = simlab.generate(cfg)
        est = stat(o.panel)
        ests.append(est)
        boot = bootstrap(
            BootstrapPlan(statistic=stat, b=args.bootstrap, seed=rep), o.panel
        )
        pvals.append(wald_equal(est, boot.cov))

    ests = np.array(ests)
    pvals = np.array(pvals)
    t = ests.mean(axis=0) / (ests.std(axis=0, ddof=1) / np.sqrt(args.reps))
    ks = stats.kstest(pvals, "uniform")
    print(f"reps = {args.reps}, G = {args.groups}, B = {args.bootstrap}")
    for ell, tv in zip((1, 2), t):
        print(f"placebo horizon {ell}: mean {ests[:, ell-1].mean():+.4f}  "
              f"t-statistic {tv:+.2f}")
    print(f"equality test rejection rate at 5%: {np.mean(pvals < 0.05):.3f}")
    print(f"KS uniformity p-value: {ks.pvalue:.3f}")


if __name__ == "__main__":
    main()
