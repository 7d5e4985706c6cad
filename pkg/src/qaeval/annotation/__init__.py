"""Human judgment collection: assignments, durable storage, gold labels, agreement."""

from qaeval.annotation.agreement import format_three, iaa_report, pairwise_agreement
from qaeval.annotation.assignments import (
    PartitionAssignment,
    assign_partitions,
    coverage_by_partition,
    preset_five_by_five,
)
from qaeval.annotation.store import (
    AssignmentViolationError,
    GoldLabel,
    Judgment,
    JudgmentStore,
    UnknownEvaluatorError,
    UnknownPairError,
    majority_vote,
)

__all__ = [
    "AssignmentViolationError",
    "GoldLabel",
    "Judgment",
    "JudgmentStore",
    "PartitionAssignment",
    "UnknownEvaluatorError",
    "UnknownPairError",
    "assign_partitions",
    "coverage_by_partition",
    "format_three",
    "iaa_report",
    "majority_vote",
    "pairwise_agreement",
    "preset_five_by_five",
]
