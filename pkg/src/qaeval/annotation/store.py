"""Durable judgment log, task queue, and majority-vote gold labels.

The store appends every accepted judgment to a line-delimited JSON log and
fsyncs before acknowledging, so an acknowledged judgment survives a crash.
Loading replays the log with last-write-wins per (evaluator, pair), which
both compacts resubmissions and preserves full history on disk.
"""

from __future__ import annotations

import json
import math
import os
import threading
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

from qaeval.annotation.assignments import PartitionAssignment, coverage_by_partition
from qaeval.dataset import Corpus, QAPair
from qaeval.errors import CoverageGapError


class UnknownPairError(ValueError):
    """Judgment referenced a pair_id absent from the corpus."""


class UnknownEvaluatorError(ValueError):
    """Operation referenced an evaluator with no assignment."""


class AssignmentViolationError(ValueError):
    """Evaluator attempted to judge a partition they are not assigned."""


@dataclass(frozen=True)
class Judgment:
    """One evaluator's binary verdict on one pair."""

    evaluator_id: str
    pair_id: str
    verdict: int
    submitted_at: float

    def __post_init__(self):
        if not self.evaluator_id:
            raise ValueError("evaluator_id must be nonempty")
        if not self.pair_id:
            raise ValueError("pair_id must be nonempty")
        if self.verdict not in (0, 1) or isinstance(self.verdict, bool):
            raise ValueError(f"verdict must be 0 or 1, got {self.verdict!r}")
        if not math.isfinite(self.submitted_at) or self.submitted_at < 0:
            raise ValueError(f"submitted_at must be a nonnegative timestamp, got {self.submitted_at!r}")

    def to_dict(self) -> dict:
        return {
            "evaluator_id": self.evaluator_id,
            "pair_id": self.pair_id,
            "verdict": self.verdict,
            "submitted_at": self.submitted_at,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "Judgment":
        return cls(
            evaluator_id=data["evaluator_id"],
            pair_id=data["pair_id"],
            verdict=data["verdict"],
            submitted_at=data["submitted_at"],
        )


@dataclass(frozen=True)
class GoldLabel:
    """Majority-vote aggregate of one pair's judgments."""

    pair_id: str
    verdict: int
    votes_for: int
    votes_against: int

    def __post_init__(self):
        if self.verdict not in (0, 1):
            raise ValueError(f"verdict must be 0 or 1, got {self.verdict!r}")
        if self.votes_for < 0 or self.votes_against < 0:
            raise ValueError("vote counts must be nonnegative")
        if self.verdict != (1 if self.votes_for > self.votes_against else 0):
            raise ValueError("verdict inconsistent with vote counts")


def majority_vote(judgments: Sequence[Judgment], coverage: int = 3) -> GoldLabel:
    """Aggregate one pair's judgments into a gold label.

    Raises:
        ValueError: on even coverage, mixed pair ids, or repeated evaluators.
        CoverageGapError: when the judgment count is not exactly `coverage`.
    """
    if coverage < 1 or coverage % 2 == 0:
        raise ValueError(f"coverage must be odd for majority vote, got {coverage}")
    judgments = list(judgments)
    if not judgments:
        raise CoverageGapError("no judgments to aggregate")
    pair_ids = {j.pair_id for j in judgments}
    if len(pair_ids) != 1:
        raise ValueError(f"judgments span multiple pairs: {sorted(pair_ids)}")
    pair_id = judgments[0].pair_id
    evaluators = [j.evaluator_id for j in judgments]
    if len(set(evaluators)) != len(evaluators):
        raise ValueError(f"pair {pair_id!r}: repeated evaluator in judgment list")
    if len(judgments) != coverage:
        raise CoverageGapError(
            f"pair {pair_id!r}: {len(judgments)} of {coverage} judgments present"
        )
    votes_for = sum(j.verdict for j in judgments)
    votes_against = coverage - votes_for
    return GoldLabel(
        pair_id=pair_id,
        verdict=1 if votes_for > votes_against else 0,
        votes_for=votes_for,
        votes_against=votes_against,
    )


class JudgmentStore:
    """Judgment collection over one corpus and one assignment table.

    Partitions are the corpus source datasets. Writes are serialized
    through a lock and fsynced before the call returns; reads serve from
    the compacted in-memory view.
    """

    def __init__(
        self,
        corpus: Corpus,
        assignments: Sequence[PartitionAssignment],
        log_path,
        coverage: int = 3,
    ):
        if coverage < 1 or coverage % 2 == 0:
            raise ValueError(f"coverage must be odd, got {coverage}")
        self.corpus = corpus
        self.coverage = coverage
        self.assignments = {a.evaluator_id: a for a in assignments}
        if len(self.assignments) != len(assignments):
            raise ValueError("duplicate evaluator_id in assignments")
        self.coverage_map = coverage_by_partition(assignments)

        known_sources = set(corpus.source_datasets)
        assigned_sources = set(self.coverage_map)
        stray = assigned_sources - known_sources
        if stray:
            raise ValueError(f"assignments reference unknown partitions: {sorted(stray)}")
        uncovered = known_sources - assigned_sources
        if uncovered:
            raise ValueError(f"corpus partitions with no evaluators: {sorted(uncovered)}")
        for partition, evaluators in sorted(self.coverage_map.items()):
            if len(evaluators) != coverage:
                raise ValueError(
                    f"partition {partition!r} has {len(evaluators)} evaluators, "
                    f"expected coverage {coverage}"
                )

        self._pairs_by_id: Dict[str, QAPair] = {p.pair_id: p for p in corpus}
        self._by_key: Dict[Tuple[str, str], Judgment] = {}
        self._lock = threading.Lock()
        self.log_path = Path(log_path)
        self.log_path.parent.mkdir(parents=True, exist_ok=True)
        self._replay()
        self._log = self.log_path.open("a", encoding="utf-8")

    def _replay(self) -> None:
        if not self.log_path.exists():
            return
        with self.log_path.open("r", encoding="utf-8") as handle:
            for lineno, line in enumerate(handle, start=1):
                line = line.strip()
                if not line:
                    continue
                try:
                    judgment = Judgment.from_dict(json.loads(line))
                except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
                    raise ValueError(f"{self.log_path}:{lineno}: bad judgment record: {exc}")
                self._apply(judgment)

    def _apply(self, judgment: Judgment) -> None:
        key = (judgment.evaluator_id, judgment.pair_id)
        existing = self._by_key.get(key)
        if existing is None or judgment.submitted_at >= existing.submitted_at:
            self._by_key[key] = judgment

    def close(self) -> None:
        self._log.close()

    def __enter__(self):
        return self

    def __exit__(self, *exc_info):
        self.close()

    def _partition_of(self, pair_id: str) -> str:
        pair = self._pairs_by_id.get(pair_id)
        if pair is None:
            raise UnknownPairError(f"unknown pair {pair_id!r}")
        return pair.source_dataset

    def record(self, judgment: Judgment) -> None:
        """Validate, persist, and apply one judgment.

        Raises:
            UnknownPairError: pair_id not in the corpus.
            AssignmentViolationError: evaluator unknown or not assigned
                to the pair's partition.
        """
        partition = self._partition_of(judgment.pair_id)
        assignment = self.assignments.get(judgment.evaluator_id)
        if assignment is None:
            raise AssignmentViolationError(
                f"evaluator {judgment.evaluator_id!r} has no partition assignment"
            )
        if partition not in assignment.partitions:
            raise AssignmentViolationError(
                f"evaluator {judgment.evaluator_id!r} is not assigned "
                f"partition {partition!r}"
            )
        with self._lock:
            self._log.write(json.dumps(judgment.to_dict()) + "\n")
            self._log.flush()
            os.fsync(self._log.fileno())
            self._apply(judgment)

    def verdict(self, evaluator_id: str, pair_id: str) -> Optional[int]:
        judgment = self._by_key.get((evaluator_id, pair_id))
        return None if judgment is None else judgment.verdict

    def _evaluator_pairs(self, evaluator_id: str) -> List[QAPair]:
        assignment = self.assignments.get(evaluator_id)
        if assignment is None:
            raise UnknownEvaluatorError(f"unknown evaluator {evaluator_id!r}")
        return [p for p in self.corpus if p.source_dataset in assignment.partitions]

    def next_task(self, evaluator_id: str) -> Optional[QAPair]:
        """Lowest-pair_id unjudged pair in the evaluator's partitions, or None."""
        for pair in self._evaluator_pairs(evaluator_id):
            if (evaluator_id, pair.pair_id) not in self._by_key:
                return pair
        return None

    def evaluator_progress(self, evaluator_id: str) -> Tuple[int, int]:
        pairs = self._evaluator_pairs(evaluator_id)
        done = sum(1 for p in pairs if (evaluator_id, p.pair_id) in self._by_key)
        return done, len(pairs)

    def pairs_in_partition(self, partition: str) -> List[QAPair]:
        return [p for p in self.corpus if p.source_dataset == partition]

    def progress(self) -> dict:
        """Per-evaluator and per-partition judgment completion counts."""
        evaluators = {}
        for evaluator_id in sorted(self.assignments):
            done, total = self.evaluator_progress(evaluator_id)
            evaluators[evaluator_id] = {"done": done, "total": total}
        partitions = {}
        for partition in sorted(self.coverage_map):
            pairs = self.pairs_in_partition(partition)
            done = sum(
                1
                for evaluator_id in self.coverage_map[partition]
                for p in pairs
                if (evaluator_id, p.pair_id) in self._by_key
            )
            partitions[partition] = {"done": done, "total": self.coverage * len(pairs)}
        return {"evaluators": evaluators, "partitions": partitions}

    def judgments_for_pair(self, pair_id: str) -> List[Judgment]:
        partition = self._partition_of(pair_id)
        out = []
        for evaluator_id in self.coverage_map[partition]:
            judgment = self._by_key.get((evaluator_id, pair_id))
            if judgment is not None:
                out.append(judgment)
        return out

    def gold_labels(self) -> Dict[str, "GoldLabel"]:
        """Majority-vote gold for every fully judged pair; partial pairs omitted."""
        golds = {}
        for pair in self.corpus:
            judgments = self.judgments_for_pair(pair.pair_id)
            if len(judgments) == self.coverage:
                golds[pair.pair_id] = majority_vote(judgments, self.coverage)
        return golds

    def partition_missing(self, partition: str) -> Dict[str, int]:
        """Evaluator -> count of their unjudged pairs in one partition."""
        pairs = self.pairs_in_partition(partition)
        missing = {}
        for evaluator_id in self.coverage_map[partition]:
            remaining = sum(
                1 for p in pairs if (evaluator_id, p.pair_id) not in self._by_key
            )
            if remaining:
                missing[evaluator_id] = remaining
        return missing
