"""Command-line frontend.

Subcommands: design-summary | estimate | test-dynamics | twfe | rc |
simulate. Every run writes ``results.json`` (full configuration, a
timestamp, and all numeric results) into the output directory, plus
plot-ready CSV sidecars where they apply (``eventstudy.csv``,
``weights.csv``, ``paths.csv``). Exit codes: 0 success, 1 input/data
error, 2 infeasible estimation or test.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import design, dyn_tests, estimators, rc, simlab, twfe
from .errors import AvsqError, DataError, EstimationError
from .inference import BootstrapPlan, bootstrap
from .panel import load_panel

__all__ = ["main"]


def _add_input_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("input", help="delimiter-separated panel file with a header row")
    p.add_argument("--group", default="group", help="group/unit id column")
    p.add_argument("--period", default="period", help="time period column")
    p.add_argument("--outcome", default="outcome", help="outcome column")
    p.add_argument("--treatment", default="treatment", help="treatment dose column")
    p.add_argument("--weight", default=None, help="optional group weight column")


def _add_common_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--out", default=".", help="output directory")
    p.add_argument("--bootstrap", type=int, default=0, metavar="B",
                   help="number of group-bootstrap replications (0 disables)")
    p.add_argument("--seed", type=int, default=0, help="random seed")
    p.add_argument("--level", type=float, default=0.95, help="confidence level")


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple, set, frozenset)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if np.isfinite(v) else None
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    return obj


def _write_results(out_dir: Path, args: argparse.Namespace, results: dict) -> None:
    out_dir.mkdir(parents=True, exist_ok=True)
    config = {k: v for k, v in sorted(vars(args).items()) if k != "func"}
    payload = {
        "config": _jsonable(config),
        "timestamp": datetime.now(timezone.utc).isoformat(),
        "results": _jsonable(results),
    }
    path = out_dir / "results.json"
    path.write_text(json.dumps(payload, sort_keys=True, separators=(",", ":")) + "\n")
    print(f"wrote {path}")


def _write_csv(path: Path, header: list[str], rows: list[list]) -> None:
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        writer.writerows(rows)
    print(f"wrote {path}")


def _load(args) -> "object":
    return load_panel(
        args.input,
        group=args.group,
        period=args.period,
        outcome=args.outcome,
        treatment=args.treatment,
        weight=args.weight,
    )


# -- subcommands -------------------------------------------------------------


def _cmd_design_summary(args) -> int:
    panel = _load(args)
    info = design.analyze_design(panel)
    summary = design.design_summary(panel, info)
    out = Path(args.out)
    _write_results(out, args, summary)
    rows = [
        [f, n_up, n_down]
        for f, (n_up, n_down) in sorted(
            summary["first_switch_hist"].items(), key=lambda kv: int(kv[0])
        )
    ]
    out.mkdir(parents=True, exist_ok=True)
    _write_csv(out / "design_histogram.csv",
               ["first_switch", "n_up", "n_down"], rows)
    return 0


def _event_rows(results, *, level):
    rows = []
    for r in results:
        rows.append([
            r.horizon,
            "" if r.undefined else f"{r.estimate:.12g}",
            "" if r.se is None else f"{r.se:.12g}",
            "" if r.ci_low is None else f"{r.ci_low:.12g}",
            "" if r.ci_high is None else f"{r.ci_high:.12g}",
            r.n_switchers,
            "" if r.dose_delta is None else f"{r.dose_delta:.12g}",
        ])
    return rows


def _cmd_estimate(args) -> int:
    panel = _load(args)
    info = design.analyze_design(panel)
    results = []

    def one(ell, placebo):
        if placebo:
            def fn(pnl, inf):
                return estimators.avsq_placebo(pnl, inf, ell,
                                               normalized=args.normalized)
        elif args.normalized:
            def fn(pnl, inf):
                return estimators.normalize(pnl, inf, ell)
        else:
            def fn(pnl, inf):
                return estimators.avsq_hat(pnl, inf, ell)

        res = fn(panel, info)
        if args.bootstrap > 0:
            def stat(pnl):
                return np.array([fn(pnl, design.analyze_design(pnl)).estimate])
            plan = BootstrapPlan(statistic=stat, b=args.bootstrap,
                                 seed=args.seed, level=args.level)
            boot = bootstrap(plan, panel)
            res.se = float(boot.se[0])
            res.ci_low = float(boot.ci_low[0])
            res.ci_high = float(boot.ci_high[0])
        return res

    for ell in range(1, args.effects + 1):
        results.append(one(ell, placebo=False))
    for ell in range(1, args.placebos + 1):
        try:
            results.append(one(ell, placebo=True))
        except EstimationError as exc:
            print(f"placebo horizon {ell}: {exc}", file=sys.stderr)

    payload = {"event_study": [r.as_dict() for r in results]}

    if args.ace:
        costs = None
        if args.cost_file:
            costs = json.loads(Path(args.cost_file).read_text())
        payload["ace"] = estimators.ace(panel, info, costs=costs,
                                        split_by_sign=args.split_by_sign)

    out = Path(args.out)
    _write_results(out, args, payload)
    _write_csv(out / "eventstudy.csv",
               ["horizon", "estimate", "se", "ci_low", "ci_high",
                "n_switchers", "dose_delta"],
               _event_rows(results, level=args.level))

    if args.paths:
        rows = []
        for ell in range(1, args.effects + 1):
            for rec in estimators.path_effects(panel, info, ell):
                sig, count = rec.paths[0]
                rows.append([ell, "|".join(f"{v:g}" for v in sig), count,
                             "" if not np.isfinite(rec.estimate)
                             else f"{rec.estimate:.12g}"])
        _write_csv(out / "paths.csv",
                   ["horizon", "dose_path", "n_groups", "estimate"], rows)
    return 0


def _cmd_test_dynamics(args) -> int:
    panel = _load(args)
    info = design.analyze_design(panel)
    b = args.bootstrap if args.bootstrap > 0 else 100
    if args.variant == "reversion":
        res = dyn_tests.test_reversion(panel, info, args.max_horizon,
                                       b=b, seed=args.seed)
    else:
        res = dyn_tests.test_balanced(panel, info, args.max_horizon,
                                      b=b, seed=args.seed)
    _write_results(Path(args.out), args, res.as_dict())
    return 0


def _cmd_twfe(args) -> int:
    panel = _load(args)
    decomp = twfe.decompose_weights(panel, args.lags)
    payload = {
        "n_lags": decomp.n_lags,
        "beta_hat": decomp.beta_hat,
        "weight_means": decomp.weight_means(),
        "diagnostics": decomp.diagnostics,
    }
    out = Path(args.out)
    _write_results(out, args, payload)
    rows = []
    G = decomp.weights.shape[0]
    for g in range(G):
        for k in range(decomp.n_lags + 1):
            for kp in range(decomp.n_lags + 1):
                rows.append([g, k, kp, f"{decomp.weights[g, k, kp]:.12g}"])
    _write_csv(out / "weights.csv", ["group", "k", "k_prime", "weight"], rows)
    return 0


def _cmd_rc(args) -> int:
    panel = _load(args)
    if args.full_lags:
        variant, K = "full_lag", None
    elif args.interactions is not None:
        variant, K = "interaction", args.interactions
    else:
        variant, K = "k_lag", args.lags
    est = rc.rc_full_report(panel, variant=variant, K=K, trim_c=args.trim,
                            b=args.bootstrap, seed=args.seed)
    _write_results(Path(args.out), args, est.as_dict())
    rows = []
    for lab in est.labels:
        se = (est.ses or {}).get(lab)
        rows.append([lab,
                     "" if lab in est.not_identified else f"{est.beta_bar[lab]:.12g}",
                     "" if se is None else f"{se:.12g}",
                     est.n_eligible.get(lab, 0)])
    _write_csv(Path(args.out) / "eventstudy.csv",
               ["coefficient", "estimate", "se", "n_eligible"], rows)
    return 0


def _cmd_simulate(args) -> int:
    cfg = simlab.SimConfig(
        n_groups=args.groups,
        n_periods=args.periods,
        design=args.design,
        n_lags=args.lags,
        seed=args.seed,
        never_share=args.never_share,
        dose_values=tuple(args.dose_values),
        beta_mean=args.beta_mean,
        beta_sd=args.beta_sd,
        noise_scale=args.noise_scale,
    )
    oracle = simlab.generate(cfg)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    frame = oracle.panel.to_frame()
    frame.to_csv(out / "panel.csv", index=False)
    print(f"wrote {out / 'panel.csv'}")
    sidecar = {
        "alpha": oracle.alpha,
        "trend": oracle.trend,
        "beta": oracle.beta,
        "seed": cfg.seed,
        "design": cfg.design,
    }
    (out / "oracle.json").write_text(
        json.dumps(_jsonable(sidecar), sort_keys=True, separators=(",", ":")) + "\n")
    print(f"wrote {out / 'oracle.json'}")
    _write_results(out, args, {"n_groups": cfg.n_groups, "n_periods": cfg.n_periods})
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="avsq",
        description="Panel event-study estimation around treatment switches.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("design-summary",
                       help="classify switchers and summarize the design")
    _add_input_args(p)
    _add_common_args(p)
    p.set_defaults(func=_cmd_design_summary)

    p = sub.add_parser("estimate", help="event-study effects and placebos")
    _add_input_args(p)
    _add_common_args(p)
    p.add_argument("--effects", type=int, default=1, metavar="L",
                   help="largest effect horizon")
    p.add_argument("--placebos", type=int, default=0, metavar="P",
                   help="largest placebo horizon")
    p.add_argument("--normalized", action="store_true",
                   help="divide by the average cumulative dose change")
    p.add_argument("--ace", action="store_true",
                   help="also compute the average cost-benefit ratio")
    p.add_argument("--split-by-sign", action="store_true",
                   help="report up- and down-switchers separately")
    p.add_argument("--cost-file", default=None,
                   help="JSON file with per-horizon cost parameters")
    p.add_argument("--paths", action="store_true",
                   help="emit per-dose-path effects (paths.csv)")
    p.set_defaults(func=_cmd_estimate)

    p = sub.add_parser("test-dynamics",
                       help="tests for effect dynamics after a switch")
    _add_input_args(p)
    _add_common_args(p)
    p.add_argument("--variant", choices=("reversion", "balanced"),
                   default="balanced")
    p.add_argument("--max-horizon", type=int, default=2, metavar="L")
    p.set_defaults(func=_cmd_test_dynamics)

    p = sub.add_parser("twfe",
                       help="distributed-lag regression and its weight decomposition")
    _add_input_args(p)
    _add_common_args(p)
    p.add_argument("--lags", type=int, default=1, metavar="K")
    p.set_defaults(func=_cmd_twfe)

    p = sub.add_parser("rc", help="random-coefficients distributed-lag estimates")
    _add_input_args(p)
    _add_common_args(p)
    p.add_argument("--lags", type=int, default=1, metavar="K")
    p.add_argument("--full-lags", action="store_true",
                   help="use all lags back to the first period")
    p.add_argument("--interactions", type=int, default=None, metavar="K",
                   help="add pairwise lag interactions up to K lags")
    p.add_argument("--trim", type=float, default=None, metavar="C",
                   help="drop groups whose extrapolation norm exceeds C")
    p.set_defaults(func=_cmd_rc)

    p = sub.add_parser("simulate", help="generate a synthetic panel")
    p.add_argument("--groups", type=int, default=200)
    p.add_argument("--periods", type=int, default=8)
    p.add_argument("--design", choices=simlab.DESIGNS, default="staggered")
    p.add_argument("--lags", type=int, default=1)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--never-share", type=float, default=0.2)
    p.add_argument("--dose-values", type=float, nargs="+", default=[1.0])
    p.add_argument("--beta-mean", type=float, nargs="+", default=None)
    p.add_argument("--beta-sd", type=float, nargs="+", default=None)
    p.add_argument("--noise-scale", type=float, default=1.0)
    p.add_argument("--out", default=".")
    p.set_defaults(func=_cmd_simulate)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except DataError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return 1
    except EstimationError as exc:
        print(f"infeasible: {exc}", file=sys.stderr)
        return 2
    except AvsqError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
