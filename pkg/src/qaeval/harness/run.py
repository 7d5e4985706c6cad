"""Evaluation runs: score every configured scorer, compare against gold.

A scorer that fails outright (bad config, dead backend, every pair
failed) is reported and skipped; the run continues so one broken
endpoint cannot sink a long evaluation. Callers surface this as a
partial-failure exit.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from typing import Dict, List, Mapping, Optional

from qaeval.dataset import Corpus, load_corpus
from qaeval.errors import ConfigError, CoverageGapError, ScorerError
from qaeval.harness.config import RunConfig, load_golds
from qaeval.hybrid import load_model, predict_corpus
from qaeval.metrics import SLICE_KEYS, MetricReport, evaluate_scorer, slice_report, sort_reports
from qaeval.scorers.records import ScoreRecord, ScorerDescriptor, save_score_records
from qaeval.scorers.runner import BackendRegistry, ScoreCache, score_corpus


def safe_name(name: str) -> str:
    """Filesystem-safe slug for scorer and slice names."""
    return re.sub(r"[^A-Za-z0-9._-]", "_", name)


@dataclass(frozen=True)
class CostPoint:
    """One scorer's compute-cost proxy against its agreement with humans."""

    scorer_name: str
    active_param_count: int
    mcc: float

    def __post_init__(self):
        if self.active_param_count < 0:
            raise ValueError(
                f"{self.scorer_name}: active_param_count must be nonnegative"
            )
        if not math.isfinite(self.mcc):
            raise ValueError(f"{self.scorer_name}: mcc must be finite")

    def to_dict(self) -> dict:
        return {
            "name": self.scorer_name,
            "params": self.active_param_count,
            "mcc": self.mcc,
        }


@dataclass
class EvaluationBundle:
    """Everything one evaluation run produced, ready for report emission."""

    reports: List[MetricReport]
    records: Dict[str, List[ScoreRecord]] = field(default_factory=dict)
    slices: Dict[str, Dict[str, List[MetricReport]]] = field(default_factory=dict)
    cost_points: List[CostPoint] = field(default_factory=list)
    failures: Dict[str, str] = field(default_factory=dict)
    meta: Dict[str, object] = field(default_factory=dict)


def cost_performance(
    reports: List[MetricReport], descriptors: Mapping[str, ScorerDescriptor]
) -> List[CostPoint]:
    """One (param count, MCC) point per report, in report order.

    Raises:
        ConfigError: a report's scorer has no descriptor.
    """
    points = []
    for report in reports:
        descriptor = descriptors.get(report.scorer_name)
        if descriptor is None:
            raise ConfigError(f"no descriptor for scorer {report.scorer_name!r}")
        points.append(
            CostPoint(
                scorer_name=report.scorer_name,
                active_param_count=descriptor.active_param_count,
                mcc=report.mcc,
            )
        )
    return points


def _score_with_failures(
    corpus: Corpus,
    descriptor: ScorerDescriptor,
    registry: BackendRegistry,
    config: RunConfig,
    cache: Optional[ScoreCache],
) -> List[ScoreRecord]:
    return score_corpus(
        corpus,
        descriptor,
        registry,
        threshold=config.threshold,
        parallelism=config.parallelism,
        cache=cache,
    )


def run_evaluation(
    config: RunConfig, registry: Optional[BackendRegistry] = None
) -> EvaluationBundle:
    """Score all configured scorers against the corpus and its gold labels.

    Persists per-scorer records under output_dir/records/ and computes the
    global plus per-model and per-dataset sliced reports, sorted ascending
    by MCC.
    """
    config.validate(require_golds=True)
    registry = registry or BackendRegistry()
    corpus = load_corpus(config.corpus_path)
    golds = load_golds(config.golds_path)
    missing = [p.pair_id for p in corpus if p.pair_id not in golds]
    if missing:
        raise ConfigError(
            f"{len(missing)} corpus pairs lack gold labels, first: {missing[0]!r}"
        )

    cache = ScoreCache(config.cache_dir) if config.cache_dir is not None else None
    records_dir = config.output_dir / "records"
    records_dir.mkdir(parents=True, exist_ok=True)

    bundle = EvaluationBundle(reports=[])
    descriptors: Dict[str, ScorerDescriptor] = {}
    reports: List[MetricReport] = []

    for descriptor in config.scorers:
        try:
            records = _score_with_failures(corpus, descriptor, registry, config, cache)
            report = evaluate_scorer(records, golds)
        except (ScorerError, ValueError) as exc:
            bundle.failures[descriptor.name] = f"{type(exc).__name__}: {exc}"
            continue
        bundle.records[descriptor.name] = records
        save_score_records(records, records_dir / f"{safe_name(descriptor.name)}.jsonl")
        descriptors[descriptor.name] = descriptor
        reports.append(report)

    if config.hybrid is not None:
        hybrid = config.hybrid
        try:
            semantic = bundle.records.get(hybrid.semantic)
            lexical = bundle.records.get(hybrid.lexical)
            if semantic is None or lexical is None:
                dead = hybrid.semantic if semantic is None else hybrid.lexical
                raise ScorerError(f"hybrid input scorer {dead!r} produced no records")
            model = load_model(hybrid.model_path)
            records = predict_corpus(corpus, semantic, lexical, model, hybrid.name)
            report = evaluate_scorer(records, golds)
        except (ScorerError, ConfigError, CoverageGapError, ValueError) as exc:
            bundle.failures[hybrid.name] = f"{type(exc).__name__}: {exc}"
        else:
            bundle.records[hybrid.name] = records
            save_score_records(records, records_dir / f"{safe_name(hybrid.name)}.jsonl")
            # Cost proxy: the semantic backend dominates; the lexical term is free.
            descriptors[hybrid.name] = ScorerDescriptor(
                name=hybrid.name,
                kind="nli",
                active_param_count=config.descriptor(hybrid.semantic).active_param_count,
            )
            reports.append(report)

    if not reports:
        raise ScorerError(
            "every configured scorer failed: "
            + "; ".join(f"{name}: {note}" for name, note in sorted(bundle.failures.items()))
        )

    bundle.reports = sort_reports(reports)
    for facet in SLICE_KEYS:
        by_value: Dict[str, List[MetricReport]] = {}
        for report in bundle.reports:
            sliced = slice_report(bundle.records[report.scorer_name], golds, corpus, facet)
            for value, sub_report in sliced.items():
                by_value.setdefault(value, []).append(sub_report)
        bundle.slices[facet] = {
            value: sort_reports(sub) for value, sub in sorted(by_value.items())
        }

    bundle.cost_points = cost_performance(bundle.reports, descriptors)
    bundle.meta = {
        "corpus": str(config.corpus_path),
        "n_pairs": len(corpus),
        "threshold": config.threshold,
        "seed": config.seed,
        "scorers": sorted(bundle.records),
        "failed_scorers": sorted(bundle.failures),
    }
    return bundle
