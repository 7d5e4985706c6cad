"""Agreement metrics between evaluator verdicts and human gold labels.

Gold convention: 1 means the humans judged the candidate a match, so a
verdict of 1 against a gold of 1 counts as a true positive.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple

from qaeval.dataset import Corpus

SLICE_KEYS = ("candidate_model", "source_dataset")


@dataclass(frozen=True)
class ConfusionMatrix:
    tp: int
    tn: int
    fp: int
    fn: int

    def __post_init__(self):
        for name in ("tp", "tn", "fp", "fn"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be nonnegative")

    @property
    def total(self) -> int:
        return self.tp + self.tn + self.fp + self.fn

    def __add__(self, other: "ConfusionMatrix") -> "ConfusionMatrix":
        return ConfusionMatrix(
            tp=self.tp + other.tp,
            tn=self.tn + other.tn,
            fp=self.fp + other.fp,
            fn=self.fn + other.fn,
        )


def confusion(verdicts: Sequence[int], golds: Sequence[int]) -> ConfusionMatrix:
    """Count TP/TN/FP/FN between binary verdicts and binary gold labels."""
    if len(verdicts) != len(golds):
        raise ValueError(f"length mismatch: {len(verdicts)} verdicts vs {len(golds)} golds")
    if not verdicts:
        raise ValueError("empty input")
    tp = tn = fp = fn = 0
    for v, g in zip(verdicts, golds):
        if v not in (0, 1) or g not in (0, 1):
            raise ValueError(f"verdicts and golds must be 0 or 1, got ({v!r}, {g!r})")
        if v == 1 and g == 1:
            tp += 1
        elif v == 0 and g == 0:
            tn += 1
        elif v == 1 and g == 0:
            fp += 1
        else:
            fn += 1
    return ConfusionMatrix(tp=tp, tn=tn, fp=fp, fn=fn)


def accuracy(cm: ConfusionMatrix) -> float:
    if cm.total == 0:
        raise ValueError("empty confusion matrix")
    return (cm.tp + cm.tn) / cm.total


def f1(cm: ConfusionMatrix) -> float:
    """Positive-class F1; 0 by convention when the denominator vanishes."""
    if cm.total == 0:
        raise ValueError("empty confusion matrix")
    denom = 2 * cm.tp + cm.fp + cm.fn
    if denom == 0:
        return 0.0
    return 2 * cm.tp / denom


def mcc(cm: ConfusionMatrix) -> float:
    """Matthews correlation; 0 by convention when any marginal is empty.

    Numerator and the product under the root are computed in exact integer
    arithmetic, leaving one sqrt and one division in floating point.
    """
    if cm.total == 0:
        raise ValueError("empty confusion matrix")
    denom = (cm.tp + cm.fp) * (cm.tp + cm.fn) * (cm.tn + cm.fp) * (cm.tn + cm.fn)
    if denom == 0:
        return 0.0
    return (cm.tp * cm.tn - cm.fp * cm.fn) / math.sqrt(denom)


@dataclass(frozen=True)
class MetricReport:
    """One evaluator's agreement with the gold labels.

    ``confusion`` is present for every computed report; it is None only for
    reports reconstructed from stored summary rows that never carried one.
    """

    scorer_name: str
    n: int
    accuracy: float
    f1: float
    mcc: float
    confusion: Optional[ConfusionMatrix] = None
    excluded_failures: int = 0

    def __post_init__(self):
        if not 0.0 <= self.accuracy <= 1.0:
            raise ValueError("accuracy out of [0, 1]")
        if not 0.0 <= self.f1 <= 1.0:
            raise ValueError("f1 out of [0, 1]")
        if not -1.0 <= self.mcc <= 1.0:
            raise ValueError("mcc out of [-1, 1]")
        if self.confusion is not None and self.n != self.confusion.total:
            raise ValueError("n does not match the confusion-matrix total")

    def to_dict(self) -> Dict:
        data: Dict = {
            "scorer_name": self.scorer_name,
            "n": self.n,
            "accuracy": self.accuracy,
            "f1": self.f1,
            "mcc": self.mcc,
            "excluded_failures": self.excluded_failures,
        }
        if self.confusion is not None:
            data["confusion"] = {
                "tp": self.confusion.tp,
                "tn": self.confusion.tn,
                "fp": self.confusion.fp,
                "fn": self.confusion.fn,
            }
        return data

    @staticmethod
    def from_dict(obj: Mapping) -> "MetricReport":
        cm = None
        if obj.get("confusion") is not None:
            cm = ConfusionMatrix(**obj["confusion"])
        return MetricReport(
            scorer_name=obj["scorer_name"],
            n=obj["n"],
            accuracy=obj["accuracy"],
            f1=obj["f1"],
            mcc=obj["mcc"],
            confusion=cm,
            excluded_failures=obj.get("excluded_failures", 0),
        )


def evaluate_scorer(records, golds: Mapping[str, int]) -> MetricReport:
    """Build a MetricReport from one scorer's records and a gold-label map.

    Records with a failure note are excluded from the metrics and counted;
    every scored record must have a gold label.
    """
    records = list(records)
    if not records:
        raise ValueError("no score records")
    names = {r.scorer_name for r in records}
    if len(names) != 1:
        raise ValueError(f"records mix scorer names: {sorted(names)}")
    scored = [r for r in records if r.failure_note is None]
    failures = len(records) - len(scored)
    if not scored:
        raise ValueError(f"all {failures} records failed for scorer {names.pop()!r}")
    missing = [r.pair_id for r in scored if r.pair_id not in golds]
    if missing:
        raise ValueError(f"missing gold label(s) for pair(s): {', '.join(sorted(missing)[:5])}")
    cm = confusion([r.verdict for r in scored], [golds[r.pair_id] for r in scored])
    return MetricReport(
        scorer_name=names.pop(),
        n=cm.total,
        accuracy=accuracy(cm),
        f1=f1(cm),
        mcc=mcc(cm),
        confusion=cm,
        excluded_failures=failures,
    )


def slice_report(
    records,
    golds: Mapping[str, int],
    corpus: Corpus,
    by: str,
) -> Dict[str, MetricReport]:
    """Per-slice MetricReports keyed by candidate model or source dataset.

    Slice confusion matrices always sum componentwise to the global one.
    """
    if by not in SLICE_KEYS:
        raise ValueError(f"by must be one of {SLICE_KEYS}, got {by!r}")
    grouped: Dict[str, List] = {}
    for record in records:
        pair = corpus[record.pair_id]
        grouped.setdefault(getattr(pair, by), []).append(record)
    return {key: evaluate_scorer(recs, golds) for key, recs in sorted(grouped.items())}


def format_cell(value: float) -> str:
    """Four-decimal rendering used by every report surface."""
    return f"{value:.4f}"


def sort_reports(reports: Iterable[MetricReport]) -> List[MetricReport]:
    """Report-table row order: ascending MCC, then name for determinism."""
    return sorted(reports, key=lambda r: (r.mcc, r.scorer_name))


def format_report_table(reports: Iterable[MetricReport]) -> str:
    """Aligned four-decimal text table: Accuracy, F1-score, MCC.

    Rows ascend by MCC; per-column maxima carry a ``*`` marker, explained
    by the footer line.
    """
    rows = sort_reports(reports)
    if not rows:
        raise ValueError("no reports to format")
    headers = ("Evaluator", "Accuracy", "F1-score", "MCC")
    maxima = (
        max(r.accuracy for r in rows),
        max(r.f1 for r in rows),
        max(r.mcc for r in rows),
    )
    name_width = max(len(headers[0]), max(len(r.scorer_name) for r in rows))
    num_width = 9  # fits "*-1.0000"

    lines = [
        f"{headers[0]:<{name_width}}"
        + "".join(f"  {h:>{num_width}}" for h in headers[1:])
    ]
    lines.append("-" * len(lines[0]))
    for report in rows:
        cells = []
        for value, best in zip((report.accuracy, report.f1, report.mcc), maxima):
            text = format_cell(value)
            if value == best:
                text = "*" + text
            cells.append(f"  {text:>{num_width}}")
        lines.append(f"{report.scorer_name:<{name_width}}" + "".join(cells))
    lines.append("(* = column maximum)")
    return "\n".join(lines) + "\n"


def format_markdown_table(reports: Iterable[MetricReport]) -> str:
    """Markdown variant of the report table; column maxima in bold."""
    rows = sort_reports(reports)
    if not rows:
        raise ValueError("no reports to format")
    maxima = (
        max(r.accuracy for r in rows),
        max(r.f1 for r in rows),
        max(r.mcc for r in rows),
    )
    lines = [
        "| Evaluator | Accuracy | F1-score | MCC |",
        "|---|---|---|---|",
    ]
    for report in rows:
        cells = []
        for value, best in zip((report.accuracy, report.f1, report.mcc), maxima):
            text = format_cell(value)
            cells.append(f"**{text}**" if value == best else text)
        lines.append(f"| {report.scorer_name} | {cells[0]} | {cells[1]} | {cells[2]} |")
    return "\n".join(lines) + "\n"
