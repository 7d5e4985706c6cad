"""Deterministic distribution of corpus partitions among evaluators."""

from __future__ import annotations

from dataclasses import dataclass
from typing import FrozenSet, List, Sequence


@dataclass(frozen=True)
class PartitionAssignment:
    """The set of partitions one evaluator is responsible for judging."""

    evaluator_id: str
    partitions: FrozenSet[str]

    def __post_init__(self):
        if not self.evaluator_id:
            raise ValueError("evaluator_id must be nonempty")
        if not self.partitions:
            raise ValueError(f"evaluator {self.evaluator_id!r}: empty partition set")
        object.__setattr__(self, "partitions", frozenset(self.partitions))


def _check_unique(items: Sequence[str], label: str) -> None:
    if not items:
        raise ValueError(f"{label} list is empty")
    if len(set(items)) != len(items):
        raise ValueError(f"duplicate {label} ids")


def assign_partitions(
    evaluators: Sequence[str], partitions: Sequence[str], coverage: int
) -> List[PartitionAssignment]:
    """Round-robin assignment giving every partition `coverage` distinct evaluators.

    Deterministic in the input order: partition j fills slots
    [j*coverage, (j+1)*coverage) and slot i goes to evaluator i mod n.
    Every evaluator ends up with the same load, which requires
    n_partitions * coverage to divide evenly.

    Raises:
        ValueError: when coverage exceeds the evaluator count or the
            slots cannot be split into equal loads.
    """
    _check_unique(list(evaluators), "evaluator")
    _check_unique(list(partitions), "partition")
    if coverage < 1:
        raise ValueError(f"coverage must be positive, got {coverage}")
    if coverage > len(evaluators):
        raise ValueError(
            f"infeasible: coverage {coverage} exceeds evaluator count {len(evaluators)}"
        )
    total_slots = len(partitions) * coverage
    if total_slots % len(evaluators) != 0:
        raise ValueError(
            f"infeasible: {len(partitions)} partitions x coverage {coverage} "
            f"= {total_slots} slots cannot be split evenly among {len(evaluators)} evaluators"
        )

    assigned = {evaluator: set() for evaluator in evaluators}
    for j, partition in enumerate(partitions):
        for slot in range(j * coverage, (j + 1) * coverage):
            assigned[evaluators[slot % len(evaluators)]].add(partition)
    return [
        PartitionAssignment(evaluator_id=evaluator, partitions=frozenset(parts))
        for evaluator, parts in assigned.items()
    ]


# Five evaluators, five partitions, coverage three. Not a round-robin
# artifact (two evaluators share an identical set), so it is kept literal.
_FIVE_BY_FIVE = ((0, 1, 3), (0, 2, 4), (0, 2, 4), (1, 2, 3), (1, 3, 4))


def preset_five_by_five(
    evaluators: Sequence[str], partitions: Sequence[str]
) -> List[PartitionAssignment]:
    """Fixed five-evaluator, five-partition, coverage-three layout."""
    _check_unique(list(evaluators), "evaluator")
    _check_unique(list(partitions), "partition")
    if len(evaluators) != 5 or len(partitions) != 5:
        raise ValueError(
            f"preset needs exactly 5 evaluators and 5 partitions, "
            f"got {len(evaluators)} and {len(partitions)}"
        )
    return [
        PartitionAssignment(
            evaluator_id=evaluator,
            partitions=frozenset(partitions[i] for i in indices),
        )
        for evaluator, indices in zip(evaluators, _FIVE_BY_FIVE)
    ]


def coverage_by_partition(assignments: Sequence[PartitionAssignment]) -> dict:
    """Partition id -> sorted list of assigned evaluator ids."""
    covered: dict = {}
    for assignment in assignments:
        for partition in assignment.partitions:
            covered.setdefault(partition, []).append(assignment.evaluator_id)
    return {partition: sorted(ids) for partition, ids in covered.items()}
