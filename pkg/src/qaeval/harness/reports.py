"""Report file emission: tables, CSV, JSON summary, and cost points.

Every emitter is deterministic for a given bundle, so identical runs
produce byte-identical output trees.
"""

from __future__ import annotations

import csv
import io
import json
from pathlib import Path
from typing import Dict, List

from qaeval.errors import ConfigError
from qaeval.harness.run import CostPoint, EvaluationBundle, safe_name
from qaeval.metrics import MetricReport, format_markdown_table, format_report_table

SLICE_FILE_PREFIX = {"candidate_model": "model", "source_dataset": "dataset"}


def _write_text(path: Path, text: str) -> None:
    path.write_text(text, encoding="utf-8")


def _write_json(path: Path, data) -> None:
    _write_text(path, json.dumps(data, indent=2, sort_keys=True, ensure_ascii=False) + "\n")


def _report_csv(reports: List[MetricReport]) -> str:
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(
        ["scorer", "n", "accuracy", "f1", "mcc", "tp", "tn", "fp", "fn", "excluded_failures"]
    )
    for report in reports:
        cm = report.confusion
        writer.writerow(
            [
                report.scorer_name,
                report.n,
                repr(report.accuracy),
                repr(report.f1),
                repr(report.mcc),
                cm.tp if cm else "",
                cm.tn if cm else "",
                cm.fp if cm else "",
                cm.fn if cm else "",
                report.excluded_failures,
            ]
        )
    return out.getvalue()


def _cost_csv(points: List[CostPoint]) -> str:
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(["name", "params", "mcc"])
    for point in points:
        writer.writerow([point.scorer_name, point.active_param_count, repr(point.mcc)])
    return out.getvalue()


def bundle_summary(bundle: EvaluationBundle) -> dict:
    return {
        "reports": [r.to_dict() for r in bundle.reports],
        "slices": {
            facet: {
                value: [r.to_dict() for r in reports]
                for value, reports in by_value.items()
            }
            for facet, by_value in bundle.slices.items()
        },
        "cost_points": [p.to_dict() for p in bundle.cost_points],
        "failures": dict(bundle.failures),
        "meta": dict(bundle.meta),
    }


def bundle_from_summary(data: dict) -> EvaluationBundle:
    """Rebuild a (record-free) bundle from a stored report.json summary."""
    if not isinstance(data, dict) or "reports" not in data:
        raise ConfigError("summary must be an object with a 'reports' list")
    try:
        reports = [MetricReport.from_dict(entry) for entry in data["reports"]]
        slices = {
            facet: {
                value: [MetricReport.from_dict(entry) for entry in rows]
                for value, rows in by_value.items()
            }
            for facet, by_value in data.get("slices", {}).items()
        }
        points = [
            CostPoint(
                scorer_name=entry["name"],
                active_param_count=entry["params"],
                mcc=entry["mcc"],
            )
            for entry in data.get("cost_points", [])
        ]
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"bad summary structure: {exc}") from exc
    return EvaluationBundle(
        reports=reports,
        slices=slices,
        cost_points=points,
        failures=dict(data.get("failures", {})),
        meta=dict(data.get("meta", {})),
    )


def report_emit(bundle: EvaluationBundle, output_dir) -> List[Path]:
    """Write the full report tree; returns the emitted paths in order.

    Layout: report.{txt,md,csv,json} for the global table, one table per
    slice value under slices/, and cost_points.{csv,json}.

    Raises:
        ValueError: on a bundle with no reports.
        OSError: when the output directory cannot be written.
    """
    if not bundle.reports:
        raise ValueError("empty bundle: no scorer reports to emit")
    output_dir = Path(output_dir)
    output_dir.mkdir(parents=True, exist_ok=True)
    emitted: List[Path] = []

    def emit(path: Path, text: str) -> None:
        _write_text(path, text)
        emitted.append(path)

    emit(output_dir / "report.txt", format_report_table(bundle.reports))
    emit(output_dir / "report.md", format_markdown_table(bundle.reports))
    emit(output_dir / "report.csv", _report_csv(bundle.reports))
    _write_json(output_dir / "report.json", bundle_summary(bundle))
    emitted.append(output_dir / "report.json")

    if bundle.slices:
        slices_dir = output_dir / "slices"
        slices_dir.mkdir(exist_ok=True)
        for facet in sorted(bundle.slices):
            prefix = SLICE_FILE_PREFIX.get(facet, safe_name(facet))
            for value in sorted(bundle.slices[facet]):
                reports = bundle.slices[facet][value]
                stem = f"{prefix}_{safe_name(value)}"
                emit(slices_dir / f"{stem}.txt", format_report_table(reports))
                emit(slices_dir / f"{stem}.md", format_markdown_table(reports))

    emit(output_dir / "cost_points.csv", _cost_csv(bundle.cost_points))
    _write_json(
        output_dir / "cost_points.json",
        {"points": [p.to_dict() for p in bundle.cost_points]},
    )
    emitted.append(output_dir / "cost_points.json")
    return emitted
