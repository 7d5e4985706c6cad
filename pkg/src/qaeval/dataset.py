"""QA corpus data model, JSONL ingestion, and validation.

A corpus is a line-delimited JSON file, one object per line, with exactly
the ``QAPair`` field names. Iteration order is always sorted by
``pair_id`` so every downstream report is deterministic.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Dict, Iterable, Iterator, List, Mapping, Sequence, Tuple

from qaeval.errors import CorpusError

PAIR_FIELDS = (
    "pair_id",
    "source_dataset",
    "question_id",
    "question",
    "reference_answer",
    "candidate_model",
    "candidate_answer",
)

_TEXT_FIELDS = ("question", "reference_answer", "candidate_answer")


@dataclass(frozen=True)
class QAPair:
    """One (question, reference, candidate answer) record, the atomic unit."""

    pair_id: str
    source_dataset: str
    question_id: str
    question: str
    reference_answer: str
    candidate_model: str
    candidate_answer: str

    def validate(self) -> None:
        for name in ("pair_id", "source_dataset", "question_id", "candidate_model"):
            if not getattr(self, name):
                raise CorpusError(f"pair {self.pair_id!r}: empty {name}")
        for name in _TEXT_FIELDS:
            if not getattr(self, name).strip():
                raise CorpusError(f"pair {self.pair_id!r}: {name} is empty after trimming")

    def to_dict(self) -> Dict[str, str]:
        return {name: getattr(self, name) for name in PAIR_FIELDS}

    @staticmethod
    def from_dict(obj: Mapping[str, Any]) -> "QAPair":
        missing = [name for name in PAIR_FIELDS if name not in obj]
        if missing:
            raise CorpusError(f"missing required field(s): {', '.join(missing)}")
        values = {}
        for name in PAIR_FIELDS:
            value = obj[name]
            if not isinstance(value, str):
                raise CorpusError(f"field {name!r} must be a string, got {type(value).__name__}")
            values[name] = value
        pair = QAPair(**values)
        pair.validate()
        return pair


class Corpus:
    """A validated, ``pair_id``-sorted collection of QA pairs."""

    def __init__(self, name: str, pairs: Iterable[QAPair]):
        ordered = sorted(pairs, key=lambda p: p.pair_id)
        seen_ids: set = set()
        seen_qm: set = set()
        for pair in ordered:
            pair.validate()
            if pair.pair_id in seen_ids:
                raise CorpusError(f"duplicate pair_id {pair.pair_id!r}")
            key = (pair.question_id, pair.candidate_model)
            if key in seen_qm:
                raise CorpusError(
                    f"duplicate (question_id, candidate_model) {key!r} at pair {pair.pair_id!r}"
                )
            seen_ids.add(pair.pair_id)
            seen_qm.add(key)
        self.name = name
        self.pairs: Tuple[QAPair, ...] = tuple(ordered)
        self._by_id = {p.pair_id: p for p in self.pairs}

    def __len__(self) -> int:
        return len(self.pairs)

    def __iter__(self) -> Iterator[QAPair]:
        return iter(self.pairs)

    def __getitem__(self, pair_id: str) -> QAPair:
        return self._by_id[pair_id]

    def __contains__(self, pair_id: str) -> bool:
        return pair_id in self._by_id

    def __eq__(self, other: object) -> bool:
        return (
            isinstance(other, Corpus)
            and self.name == other.name
            and self.pairs == other.pairs
        )

    @property
    def per_source_counts(self) -> Dict[str, int]:
        """Pair count per source dataset."""
        counts: Dict[str, int] = {}
        for pair in self.pairs:
            counts[pair.source_dataset] = counts.get(pair.source_dataset, 0) + 1
        return counts

    @property
    def question_counts_by_source(self) -> Dict[str, int]:
        """Distinct question count per source dataset."""
        seen: Dict[str, set] = {}
        for pair in self.pairs:
            seen.setdefault(pair.source_dataset, set()).add(pair.question_id)
        return {source: len(qids) for source, qids in seen.items()}

    @property
    def candidate_models(self) -> List[str]:
        return sorted({p.candidate_model for p in self.pairs})

    @property
    def source_datasets(self) -> List[str]:
        return sorted({p.source_dataset for p in self.pairs})


def load_corpus(path, name: str | None = None) -> Corpus:
    """Load and validate a JSONL corpus file.

    Any malformed line, missing field, or duplicate identifier rejects the
    whole file, with the offending line number in the error message.
    """
    path = Path(path)
    pairs: List[QAPair] = []
    line_of_id: Dict[str, int] = {}
    with path.open("r", encoding="utf-8") as handle:
        for line_no, line in enumerate(handle, start=1):
            stripped = line.strip()
            if not stripped:
                continue
            try:
                obj = json.loads(stripped)
            except json.JSONDecodeError as exc:
                raise CorpusError(f"{path}: line {line_no}: invalid JSON: {exc}") from exc
            if not isinstance(obj, dict):
                raise CorpusError(f"{path}: line {line_no}: expected a JSON object")
            try:
                pair = QAPair.from_dict(obj)
            except CorpusError as exc:
                raise CorpusError(f"{path}: line {line_no}: {exc}") from exc
            if pair.pair_id in line_of_id:
                raise CorpusError(
                    f"{path}: line {line_no}: duplicate pair_id {pair.pair_id!r} "
                    f"(first seen on line {line_of_id[pair.pair_id]})"
                )
            line_of_id[pair.pair_id] = line_no
            pairs.append(pair)
    if not pairs:
        raise CorpusError(f"{path}: empty corpus file")
    return Corpus(name or path.stem, pairs)


def save_corpus(corpus: Corpus, path) -> None:
    """Write a corpus as JSONL, sorted by pair_id. Inverse of load_corpus."""
    path = Path(path)
    with path.open("w", encoding="utf-8") as handle:
        for pair in corpus:
            handle.write(json.dumps(pair.to_dict(), ensure_ascii=False) + "\n")


@dataclass(frozen=True)
class QuestionRecord:
    question_id: str
    source: str
    question: str
    reference: str


@dataclass(frozen=True)
class AnswerRecord:
    question_id: str
    model: str
    answer_text: str


def build_corpus(
    name: str,
    questions: Sequence[QuestionRecord],
    answers: Sequence[AnswerRecord],
) -> Corpus:
    """Join question and answer records into a corpus.

    One pair per answer record; ``pair_id`` is ``<source>/<question_id>/<model>``.
    """
    by_qid: Dict[str, QuestionRecord] = {}
    for q in questions:
        if q.question_id in by_qid:
            raise CorpusError(f"duplicate question_id {q.question_id!r} in question records")
        by_qid[q.question_id] = q

    pairs: List[QAPair] = []
    seen: set = set()
    for a in answers:
        if a.question_id not in by_qid:
            raise CorpusError(f"answer references unknown question_id {a.question_id!r}")
        key = (a.question_id, a.model)
        if key in seen:
            raise CorpusError(f"duplicate (question_id, model) {key!r} in answer records")
        seen.add(key)
        q = by_qid[a.question_id]
        pairs.append(
            QAPair(
                pair_id=f"{q.source}/{q.question_id}/{a.model}",
                source_dataset=q.source,
                question_id=q.question_id,
                question=q.question,
                reference_answer=q.reference,
                candidate_model=a.model,
                candidate_answer=a.answer_text,
            )
        )
    return Corpus(name, pairs)


def load_question_records(path) -> List[QuestionRecord]:
    return [
        QuestionRecord(
            question_id=obj["question_id"],
            source=obj["source"],
            question=obj["question"],
            reference=obj["reference"],
        )
        for obj in _iter_jsonl(path, ("question_id", "source", "question", "reference"))
    ]


def load_answer_records(path) -> List[AnswerRecord]:
    return [
        AnswerRecord(
            question_id=obj["question_id"],
            model=obj["model"],
            answer_text=obj["answer_text"],
        )
        for obj in _iter_jsonl(path, ("question_id", "model", "answer_text"))
    ]


def _iter_jsonl(path, required: Tuple[str, ...]) -> Iterator[Dict[str, Any]]:
    path = Path(path)
    with path.open("r", encoding="utf-8") as handle:
        for line_no, line in enumerate(handle, start=1):
            stripped = line.strip()
            if not stripped:
                continue
            try:
                obj = json.loads(stripped)
            except json.JSONDecodeError as exc:
                raise CorpusError(f"{path}: line {line_no}: invalid JSON: {exc}") from exc
            missing = [k for k in required if k not in obj]
            if missing:
                raise CorpusError(
                    f"{path}: line {line_no}: missing required field(s): {', '.join(missing)}"
                )
            yield obj


def validate_distribution(corpus: Corpus, expected: Mapping[str, int]) -> List[str]:
    """Compare per-source question counts against an expectation.

    Returns a sorted list of human-readable deviations; empty when every
    source matches, which also means no unexpected sources are present.
    """
    actual = corpus.question_counts_by_source
    deviations: List[str] = []
    for source in sorted(set(expected) | set(actual)):
        want = expected.get(source, 0)
        have = actual.get(source, 0)
        if source not in expected:
            deviations.append(f"source {source!r}: unexpected, found {have} questions")
        elif have != want:
            deviations.append(f"source {source!r}: expected {want} questions, found {have}")
    return deviations
