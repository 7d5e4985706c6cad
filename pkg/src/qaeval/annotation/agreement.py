"""Pairwise inter-annotator agreement and the per-partition report."""

from __future__ import annotations

from itertools import combinations
from typing import Dict, Mapping, Sequence, Tuple

from qaeval.errors import CoverageGapError
from qaeval.metrics import accuracy, confusion, mcc


def format_three(value: float) -> str:
    """Three-decimal display string; negative zero normalized to 0.000."""
    rounded = round(value, 3)
    if rounded == 0.0:
        rounded = 0.0
    return f"{rounded:.3f}"


def pairwise_agreement(
    verdicts_a: Mapping[str, int],
    verdicts_b: Mapping[str, int],
    scope: Sequence[str],
) -> Tuple[float, float, int]:
    """(mcc, accuracy, n) between two evaluators over a shared scope.

    Symmetric in its two arguments. Every scope pair must be judged by
    both evaluators.

    Raises:
        CoverageGapError: a scope pair is missing from either side.
    """
    scope = sorted(scope)
    if not scope:
        raise CoverageGapError("empty agreement scope")
    a, b = [], []
    for pair_id in scope:
        if pair_id not in verdicts_a or pair_id not in verdicts_b:
            raise CoverageGapError(f"pair {pair_id!r} not judged by both evaluators")
        a.append(verdicts_a[pair_id])
        b.append(verdicts_b[pair_id])
    matrix = confusion(a, b)
    return mcc(matrix), accuracy(matrix), len(scope)


def iaa_report(store) -> dict:
    """Agreement table: per partition, per candidate model, per evaluator pair.

    Fully judged partitions get metric rows with three-decimal display
    strings; incomplete partitions get a gap listing and no metrics.
    """
    partitions = []
    for partition in sorted(store.coverage_map):
        evaluators = store.coverage_map[partition]
        missing = store.partition_missing(partition)
        if missing:
            partitions.append(
                {
                    "partition": partition,
                    "complete": False,
                    "missing": [
                        {"evaluator_id": evaluator_id, "remaining": remaining}
                        for evaluator_id, remaining in sorted(missing.items())
                    ],
                }
            )
            continue

        pairs = store.pairs_in_partition(partition)
        verdicts: Dict[str, Dict[str, int]] = {
            evaluator_id: {
                p.pair_id: store.verdict(evaluator_id, p.pair_id) for p in pairs
            }
            for evaluator_id in evaluators
        }
        models = []
        for model in sorted({p.candidate_model for p in pairs}):
            scope = [p.pair_id for p in pairs if p.candidate_model == model]
            rows = []
            for first, second in combinations(evaluators, 2):
                mcc_value, accuracy_value, n = pairwise_agreement(
                    verdicts[first], verdicts[second], scope
                )
                rows.append(
                    {
                        "evaluators": [first, second],
                        "mcc": mcc_value,
                        "accuracy": accuracy_value,
                        "n": n,
                        "mcc_display": format_three(mcc_value),
                        "accuracy_display": format_three(accuracy_value),
                    }
                )
            models.append({"candidate_model": model, "rows": rows})
        partitions.append({"partition": partition, "complete": True, "models": models})
    return {"coverage": store.coverage, "partitions": partitions}
