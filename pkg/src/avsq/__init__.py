"""Event-study estimation of treatment effects around dose switches in
balanced panels, with placebos, normalized effects, dynamic-effects tests,
distributed-lag regression diagnostics, random-coefficients estimators, and
a simulation laboratory for validating all of it against brute-force
oracles."""

from . import errors
from .design import DesignInfo, analyze_design, design_summary, in_d_ell
from .dyn_tests import DynTestResult, test_balanced, test_reversion
from .estimators import (
    EventStudyResult,
    ace,
    avsq_hat,
    avsq_placebo,
    control_set,
    normalize,
    path_effects,
)
from .inference import BootstrapPlan, BootstrapResult, bootstrap, wald_equal
from .panel import Panel, load_panel, resample_groups, restrict
from .rc import RCEstimate, build_m, projector, rc_full_report
from .simlab import OraclePanel, SimConfig, generate
from .twfe import WeightDecomposition, decompose_weights, fit_distributed_lag

__all__ = [
    "errors",
    "Panel",
    "load_panel",
    "restrict",
    "resample_groups",
    "DesignInfo",
    "analyze_design",
    "design_summary",
    "in_d_ell",
    "EventStudyResult",
    "avsq_hat",
    "avsq_placebo",
    "normalize",
    "path_effects",
    "ace",
    "control_set",
    "DynTestResult",
    "test_reversion",
    "test_balanced",
    "WeightDecomposition",
    "fit_distributed_lag",
    "decompose_weights",
    "RCEstimate",
    "build_m",
    "projector",
    "rc_full_report",
    "BootstrapPlan",
    "BootstrapResult",
    "bootstrap",
    "wald_equal",
    "SimConfig",
    "OraclePanel",
    "generate",
]

__version__ = "0.1.0"
