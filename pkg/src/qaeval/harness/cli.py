"""Command-line entry points.

Exit codes: 0 success, 1 validation error, 2 partial scorer failure,
3 I/O error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path
from typing import List, Optional

from qaeval.annotation.assignments import (
    PartitionAssignment,
    assign_partitions,
    preset_five_by_five,
)
from qaeval.annotation.agreement import iaa_report
from qaeval.annotation.store import JudgmentStore
from qaeval.dataset import (
    build_corpus,
    load_answer_records,
    load_corpus,
    load_question_records,
    save_corpus,
    validate_distribution,
)
from qaeval.errors import ConfigError, CorpusError, ScorerError
from qaeval.harness.config import build_run_config, load_config_file, load_golds
from qaeval.harness.reports import bundle_from_summary, report_emit
from qaeval.harness.run import run_evaluation, safe_name
from qaeval.hybrid import TrainOptions, build_feature_rows, save_model, train_calibration
from qaeval.metrics import format_report_table
from qaeval.scorers.records import load_score_records, save_score_records
from qaeval.scorers.runner import BackendRegistry, ScoreCache, score_corpus

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_PARTIAL = 2
EXIT_IO = 3


class UsageError(ValueError):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse exits with code 2 on usage errors; that code is reserved
    # for partial scorer failure here, so usage problems raise instead.
    def error(self, message):
        raise UsageError(message)


def _json_dump(path: Path, data) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(
        json.dumps(data, indent=2, sort_keys=True, ensure_ascii=False) + "\n",
        encoding="utf-8",
    )


def load_assignments(path) -> List[PartitionAssignment]:
    """Assignment file: explicit list, generator params, or the 5x5 preset.

    Accepted shapes:
        [{"evaluator_id": ..., "partitions": [...]}, ...]
        {"evaluators": [...], "partitions": [...], "coverage": 3}
        {"preset": "five_by_five", "evaluators": [...], "partitions": [...]}
    """
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"assignments file not found: {path}")
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: not valid JSON: {exc}") from exc
    try:
        if isinstance(data, list):
            return [
                PartitionAssignment(
                    evaluator_id=entry["evaluator_id"],
                    partitions=frozenset(entry["partitions"]),
                )
                for entry in data
            ]
        if isinstance(data, dict) and data.get("preset") == "five_by_five":
            return preset_five_by_five(data["evaluators"], data["partitions"])
        if isinstance(data, dict) and "coverage" in data:
            return assign_partitions(data["evaluators"], data["partitions"], data["coverage"])
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"{path}: bad assignments: {exc}") from exc
    raise ConfigError(f"{path}: unrecognized assignments shape")


def _config_from_args(args) -> "RunConfig":
    file_data = load_config_file(args.config) if args.config else None
    overrides = {
        "corpus": args.corpus,
        "golds": getattr(args, "golds", None),
        "threshold": args.threshold,
        "parallelism": args.parallelism,
        "cache_dir": args.cache_dir,
        "output_dir": args.output_dir,
        "seed": args.seed,
    }
    return build_run_config(file_data, overrides)


def _add_config_flags(parser, with_golds: bool = True) -> None:
    parser.add_argument("--config", help="JSON config file; flags override its fields")
    parser.add_argument("--corpus", help="corpus JSONL path")
    if with_golds:
        parser.add_argument("--golds", help="gold labels (JSON map or JSONL)")
    parser.add_argument("--threshold", type=float, help="binarization threshold")
    parser.add_argument("--parallelism", type=int, help="bounded parallel remote calls")
    parser.add_argument("--cache-dir", dest="cache_dir", help="score cache directory")
    parser.add_argument("--output-dir", dest="output_dir", help="report output directory")
    parser.add_argument("--seed", type=int, help="random seed recorded with the run")


def cmd_ingest(args) -> int:
    if args.corpus:
        corpus = load_corpus(args.corpus)
        print(f"{len(corpus)} pairs, {len(corpus.source_datasets)} sources, "
              f"{len(corpus.candidate_models)} candidate models")
        for source in corpus.source_datasets:
            print(f"  {source}: {corpus.per_source_counts[source]} pairs, "
                  f"{corpus.question_counts_by_source[source]} questions")
        if args.expect:
            expected = {}
            for part in args.expect.split(","):
                source, _, count = part.partition("=")
                if not count:
                    raise UsageError(f"--expect entries look like source=count, got {part!r}")
                expected[source.strip()] = int(count)
            deviations = validate_distribution(corpus, expected)
            if deviations:
                for line in deviations:
                    print(f"deviation: {line}", file=sys.stderr)
                return EXIT_VALIDATION
            print("distribution matches expectation")
        return EXIT_OK

    needed = (args.questions, args.answers, args.source, args.output)
    if not all(needed):
        raise UsageError(
            "either --corpus (validate) or all of --questions/--answers/--source/--output (build)"
        )
    questions = load_question_records(args.questions)
    answers = load_answer_records(args.answers)
    corpus = build_corpus(args.source, questions, answers)
    save_corpus(corpus, args.output)
    print(f"wrote {len(corpus)} pairs to {args.output}")
    return EXIT_OK


def cmd_score(args) -> int:
    config = _config_from_args(args)
    config.validate(require_golds=False)
    descriptor = config.descriptor(args.scorer)
    corpus = load_corpus(config.corpus_path)
    cache = ScoreCache(config.cache_dir) if config.cache_dir else None
    records = score_corpus(
        corpus,
        descriptor,
        BackendRegistry(),
        threshold=config.threshold,
        parallelism=config.parallelism,
        cache=cache,
    )
    output = Path(args.output) if args.output else (
        config.output_dir / "records" / f"{safe_name(descriptor.name)}.jsonl"
    )
    output.parent.mkdir(parents=True, exist_ok=True)
    save_score_records(records, output)
    failed = sum(1 for r in records if r.failed)
    print(f"scored {len(records)} pairs with {descriptor.name!r}, "
          f"{failed} failures -> {output}")
    return EXIT_PARTIAL if failed else EXIT_OK


def cmd_calibrate(args) -> int:
    golds = load_golds(args.golds)
    semantic = load_score_records(args.semantic)
    lexical = load_score_records(args.lexical)
    rows = build_feature_rows(semantic, lexical, golds)
    options = TrainOptions(
        learning_rate=args.learning_rate,
        max_iter=args.max_iter,
        tol=args.tol,
        l2=args.l2,
        fit_intercept=not args.no_intercept,
        class_weight=None if args.class_weight == "none" else args.class_weight,
    )
    model = train_calibration(rows, options, threshold=args.threshold)
    save_model(model, args.output)
    correct = sum(1 for r in rows if model.verdict(r.semantic, r.lexical) == r.gold)
    meta = model.training_meta
    print(f"trained on {len(rows)} rows: {meta['stop_reason']} "
          f"after {meta['iterations']} iterations, loss {meta['final_loss']:.6f}")
    print(f"weights: semantic {model.w_semantic:.6f}, lexical {model.w_lexical:.6f}, "
          f"intercept {model.intercept:.6f}")
    print(f"training accuracy: {correct / len(rows):.4f}")
    print(f"saved model to {args.output}")
    return EXIT_OK


def cmd_evaluate(args) -> int:
    config = _config_from_args(args)
    bundle = run_evaluation(config, BackendRegistry())
    report_emit(bundle, config.output_dir)
    print(format_report_table(bundle.reports), end="")
    if bundle.failures:
        for name, note in sorted(bundle.failures.items()):
            print(f"scorer failed: {name}: {note}", file=sys.stderr)
        return EXIT_PARTIAL
    return EXIT_OK


def cmd_report(args) -> int:
    path = Path(args.bundle)
    if not path.exists():
        raise ConfigError(f"bundle file not found: {path}")
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: not valid JSON: {exc}") from exc
    bundle = bundle_from_summary(data)
    emitted = report_emit(bundle, args.output_dir)
    print(f"emitted {len(emitted)} report files to {args.output_dir}")
    return EXIT_OK


def _open_store(args) -> JudgmentStore:
    corpus = load_corpus(args.corpus)
    assignments = load_assignments(args.assignments)
    return JudgmentStore(corpus, assignments, args.log, coverage=args.coverage)


def cmd_agreement(args) -> int:
    store = _open_store(args)
    try:
        report = iaa_report(store)
        if args.output:
            _json_dump(Path(args.output), report)
            print(f"wrote agreement report to {args.output}")
        else:
            print(json.dumps(report, indent=2, sort_keys=True))
        if args.golds_out:
            golds = {
                pair_id: label.verdict
                for pair_id, label in sorted(store.gold_labels().items())
            }
            _json_dump(Path(args.golds_out), golds)
            print(f"wrote {len(golds)} gold labels to {args.golds_out}")
        incomplete = [
            entry["partition"] for entry in report["partitions"] if not entry["complete"]
        ]
        if incomplete:
            print(f"incomplete partitions: {', '.join(incomplete)}", file=sys.stderr)
        return EXIT_OK
    finally:
        store.close()


def cmd_serve(args) -> int:
    import uvicorn

    from qaeval.annotation.service import create_app

    store = _open_store(args)
    app = create_app(store, static_dir=args.static)
    uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
    return EXIT_OK


def cmd_ui_dev_proxy(args) -> int:
    import uvicorn
    from fastapi import FastAPI, Request, Response
    from fastapi.staticfiles import StaticFiles

    app = FastAPI(title="qaeval ui dev server")
    if args.api:
        import httpx

        upstream = args.api.rstrip("/")

        # Same-origin /api for the static build, forwarded to a running service.
        @app.api_route("/api/{rest:path}", methods=["GET", "POST"])
        async def forward(rest: str, request: Request):
            async with httpx.AsyncClient() as client:
                response = await client.request(
                    request.method,
                    f"{upstream}/api/{rest}",
                    params=dict(request.query_params),
                    content=await request.body(),
                    headers={"content-type": request.headers.get("content-type", "")},
                )
            return Response(
                content=response.content,
                status_code=response.status_code,
                media_type=response.headers.get("content-type"),
            )

    app.mount("/", StaticFiles(directory=args.static, html=True), name="ui")
    uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
    return EXIT_OK


def build_parser() -> _Parser:
    parser = _Parser(prog="qaeval", description="QA answer evaluation toolkit")
    sub = parser.add_subparsers(dest="command", metavar="command")

    p = sub.add_parser("ingest", help="build a corpus from question/answer files, or validate one")
    p.add_argument("--corpus", help="validate an existing corpus JSONL")
    p.add_argument("--expect", help="expected distribution, e.g. src1=120,src2=120")
    p.add_argument("--questions", help="question records JSONL")
    p.add_argument("--answers", help="answer records JSONL")
    p.add_argument("--source", help="source dataset name for built pairs")
    p.add_argument("--output", help="corpus JSONL to write")
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("score", help="run one configured scorer over the corpus")
    _add_config_flags(p, with_golds=False)
    p.add_argument("--scorer", required=True, help="scorer name from config")
    p.add_argument("--output", help="records JSONL path (default under output dir)")
    p.set_defaults(func=cmd_score)

    p = sub.add_parser("calibrate", help="fit combiner weights from stored score records")
    p.add_argument("--golds", required=True)
    p.add_argument("--semantic", required=True, help="semantic score records JSONL")
    p.add_argument("--lexical", required=True, help="lexical score records JSONL")
    p.add_argument("--output", required=True, help="model JSON path")
    p.add_argument("--learning-rate", type=float, default=0.1)
    p.add_argument("--max-iter", type=int, default=5000)
    p.add_argument("--tol", type=float, default=1e-8)
    p.add_argument("--l2", type=float, default=0.0)
    p.add_argument("--no-intercept", action="store_true")
    p.add_argument("--class-weight", choices=["inverse_frequency", "none"],
                   default="inverse_frequency")
    p.add_argument("--threshold", type=float, default=0.5)
    p.set_defaults(func=cmd_calibrate)

    p = sub.add_parser("evaluate", help="score all configured scorers and emit reports")
    _add_config_flags(p)
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("report", help="re-emit report files from a stored report.json")
    p.add_argument("--bundle", required=True, help="report.json from a previous run")
    p.add_argument("--output-dir", dest="output_dir", required=True)
    p.set_defaults(func=cmd_report)

    p = sub.add_parser("agreement", help="inter-annotator agreement from a judgment log")
    p.add_argument("--corpus", required=True)
    p.add_argument("--assignments", required=True)
    p.add_argument("--log", required=True, help="judgment log JSONL")
    p.add_argument("--coverage", type=int, default=3)
    p.add_argument("--output", help="agreement JSON path (stdout if omitted)")
    p.add_argument("--golds-out", dest="golds_out", help="also write majority-vote golds")
    p.set_defaults(func=cmd_agreement)

    p = sub.add_parser("serve", help="run the annotation service")
    p.add_argument("--corpus", required=True)
    p.add_argument("--assignments", required=True)
    p.add_argument("--log", required=True)
    p.add_argument("--coverage", type=int, default=3)
    p.add_argument("--static", help="UI build directory to serve at /")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8765)
    p.set_defaults(func=cmd_serve)

    p = sub.add_parser("ui-dev-proxy", help="serve the UI build, optionally proxying /api")
    p.add_argument("--static", required=True)
    p.add_argument("--api", help="upstream service URL to forward /api requests to")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8766)
    p.set_defaults(func=cmd_ui_dev_proxy)

    return parser


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if not getattr(args, "func", None):
            parser.print_help()
            return EXIT_VALIDATION
        return args.func(args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except (ConfigError, CorpusError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except ScorerError as exc:
        print(f"scorer failure: {exc}", file=sys.stderr)
        return EXIT_PARTIAL
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
