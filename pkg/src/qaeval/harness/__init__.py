"""Run orchestration, report emission, and the command-line interface."""

from qaeval.harness.config import HybridSpec, RunConfig, load_config_file
from qaeval.harness.run import CostPoint, EvaluationBundle, cost_performance, run_evaluation
from qaeval.harness.reports import bundle_from_summary, report_emit

__all__ = [
    "CostPoint",
    "EvaluationBundle",
    "HybridSpec",
    "RunConfig",
    "bundle_from_summary",
    "cost_performance",
    "load_config_file",
    "report_emit",
    "run_evaluation",
]
