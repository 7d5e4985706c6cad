"""Corpus-level scoring: backend resolution, caching, bounded parallelism.

Remote calls are retried per the descriptor's policy; a call that still
fails produces a failure record rather than aborting the run, so long
corpus runs against paid endpoints degrade instead of dying. Anything
that is not a scoring failure (a genuine crash) propagates.
"""

from __future__ import annotations

import json
import re
import threading
import time
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import Callable, Dict, List, Optional, Tuple

from qaeval.dataset import Corpus, QAPair
from qaeval.errors import ScorerError
from qaeval.scorers.backends import (
    HashSemanticBackend,
    HTTPJudgeClient,
    HTTPSemanticBackend,
    ScriptedSemanticBackend,
    content_key,
    with_retries,
)
from qaeval.scorers.judge import JUDGE_INSTRUCTION, JUDGE_USER_TEMPLATE, llm_judge
from qaeval.scorers.nli import HYPOTHESIS_TEMPLATE, PREMISE_TEMPLATE, nli_entailment, validate_probs
from qaeval.scorers.records import ScoreRecord, ScorerDescriptor, binarize
from qaeval.scorers.text import lexical_match, rouge_l, token_f1

LOCAL_KINDS = ("lexical", "token_f1", "rouge_l")


class BackendRegistry:
    """Maps scorer names to in-process backends and judge clients.

    HTTP clients are built on demand from a descriptor's endpoint config;
    registered objects take precedence so tests and local models can stand
    in for remote services.
    """

    def __init__(self):
        self._semantic: Dict[str, object] = {}
        self._judges: Dict[str, object] = {}

    def register_semantic(self, name: str, backend) -> None:
        self._semantic[name] = backend

    def register_judge(self, name: str, client) -> None:
        self._judges[name] = client

    def semantic_backend(self, descriptor: ScorerDescriptor):
        if descriptor.name in self._semantic:
            return self._semantic[descriptor.name]
        backend = _backend_from_options(descriptor)
        if backend is not None:
            return backend
        if descriptor.endpoint_config is not None:
            return HTTPSemanticBackend(descriptor.endpoint_config)
        raise ScorerError(
            f"scorer {descriptor.name!r}: no registered backend, backend spec, or endpoint"
        )

    def judge_client(self, descriptor: ScorerDescriptor):
        if descriptor.name in self._judges:
            return self._judges[descriptor.name]
        if descriptor.endpoint_config is not None:
            return HTTPJudgeClient(descriptor.endpoint_config)
        raise ScorerError(f"scorer {descriptor.name!r}: no registered judge client or endpoint")


def _backend_from_options(descriptor: ScorerDescriptor):
    """Build a local backend from the descriptor's ``backend`` option."""
    spec = descriptor.options.get("backend")
    if spec is None:
        return None
    kind = spec.get("type")
    if kind == "scripted":
        return ScriptedSemanticBackend.load(spec["path"], crash_after=spec.get("crash_after"))
    if kind == "hash":
        return HashSemanticBackend(seed=spec.get("seed", 0))
    raise ScorerError(f"scorer {descriptor.name!r}: unknown backend type {kind!r}")


class ScoreCache:
    """Append-only per-scorer cache of successful scores.

    Keyed by the content hash of (question, reference, candidate), so a
    rerun or resume never repeats a completed remote call. Safe for
    concurrent use within one process; failures are never cached.
    """

    def __init__(self, directory):
        self.directory = Path(directory)
        self.directory.mkdir(parents=True, exist_ok=True)
        self._lock = threading.Lock()
        self._loaded: Dict[str, Dict[str, Tuple[float, int]]] = {}

    def _path(self, scorer_name: str) -> Path:
        safe = re.sub(r"[^A-Za-z0-9._-]", "_", scorer_name)
        return self.directory / f"{safe}.jsonl"

    def _table(self, scorer_name: str) -> Dict[str, Tuple[float, int]]:
        if scorer_name not in self._loaded:
            table: Dict[str, Tuple[float, int]] = {}
            path = self._path(scorer_name)
            if path.exists():
                with path.open("r", encoding="utf-8") as handle:
                    for line in handle:
                        line = line.strip()
                        if line:
                            entry = json.loads(line)
                            table[entry["key"]] = (entry["raw_score"], entry["verdict"])
            self._loaded[scorer_name] = table
        return self._loaded[scorer_name]

    def get(self, scorer_name: str, key: str) -> Optional[Tuple[float, int]]:
        with self._lock:
            return self._table(scorer_name).get(key)

    def put(self, scorer_name: str, key: str, raw_score: float, verdict: int) -> None:
        with self._lock:
            table = self._table(scorer_name)
            if key in table:
                return
            table[key] = (raw_score, verdict)
            with self._path(scorer_name).open("a", encoding="utf-8") as handle:
                handle.write(
                    json.dumps({"key": key, "raw_score": raw_score, "verdict": verdict}) + "\n"
                )
                handle.flush()


def pair_content_key(pair: QAPair) -> str:
    return content_key(pair.question, pair.reference_answer, pair.candidate_answer)


def _retry_policy(descriptor: ScorerDescriptor) -> Tuple[int, float]:
    if descriptor.endpoint_config is not None:
        return descriptor.endpoint_config.max_retries, descriptor.endpoint_config.backoff_base
    return descriptor.options.get("max_retries", 3), descriptor.options.get("backoff_base", 0.5)


def _score_fn(
    descriptor: ScorerDescriptor, registry: BackendRegistry, threshold: float
) -> Callable[[QAPair], Tuple[float, int]]:
    """Resolve a descriptor to a (pair -> raw, verdict) function."""
    kind = descriptor.kind
    options = descriptor.options

    if kind == "lexical":
        return lambda pair: _with_verdict(
            float(lexical_match(pair.candidate_answer, pair.reference_answer)), threshold
        )
    if kind == "token_f1":
        return lambda pair: _with_verdict(
            token_f1(pair.candidate_answer, pair.reference_answer), threshold
        )
    if kind == "rouge_l":
        return lambda pair: _with_verdict(
            rouge_l(pair.candidate_answer, pair.reference_answer), threshold
        )
    if kind == "nli":
        backend = registry.semantic_backend(descriptor)
        premise_template = options.get("premise_template", PREMISE_TEMPLATE)
        hypothesis_template = options.get("hypothesis_template", HYPOTHESIS_TEMPLATE)

        def score_nli(pair: QAPair) -> Tuple[float, int]:
            se = nli_entailment(
                pair.question,
                pair.candidate_answer,
                pair.reference_answer,
                backend,
                premise_template,
                hypothesis_template,
            )
            return _with_verdict(se, threshold)

        return score_nli
    if kind == "external":
        # Question-blind semantic protocol: candidate vs reference only.
        backend = registry.semantic_backend(descriptor)

        def score_external(pair: QAPair) -> Tuple[float, int]:
            probs = backend.entailment_probs(pair.candidate_answer, pair.reference_answer)
            return _with_verdict(validate_probs(probs), threshold)

        return score_external
    if kind == "llm_judge":
        client = registry.judge_client(descriptor)
        instruction = options.get("instruction", JUDGE_INSTRUCTION)
        user_template = options.get("user_template", JUDGE_USER_TEMPLATE)

        def score_judge(pair: QAPair) -> Tuple[float, int]:
            verdict = llm_judge(
                pair.question,
                pair.candidate_answer,
                pair.reference_answer,
                client,
                instruction,
                user_template,
            )
            return (float(verdict), verdict)

        return score_judge
    raise ScorerError(f"unknown scorer kind {kind!r}")


def _with_verdict(raw: float, threshold: float) -> Tuple[float, int]:
    return raw, binarize(raw, threshold)


def score_corpus(
    corpus: Corpus,
    descriptor: ScorerDescriptor,
    registry: Optional[BackendRegistry] = None,
    threshold: float = 0.5,
    parallelism: int = 1,
    cache: Optional[ScoreCache] = None,
    sleep: Callable[[float], None] = time.sleep,
) -> List[ScoreRecord]:
    """Score every pair with one scorer, returning records sorted by pair_id.

    Failed remote calls become failure records; output length always equals
    the corpus size. Cached successes are reused without touching the
    backend.
    """
    registry = registry or BackendRegistry()
    score_one = _score_fn(descriptor, registry, threshold)
    max_retries, backoff_base = _retry_policy(descriptor)
    remote = descriptor.kind not in LOCAL_KINDS

    def run_pair(pair: QAPair) -> ScoreRecord:
        key = pair_content_key(pair)
        if cache is not None:
            hit = cache.get(descriptor.name, key)
            if hit is not None:
                raw, verdict = hit
                return ScoreRecord(
                    pair_id=pair.pair_id,
                    scorer_name=descriptor.name,
                    raw_score=raw,
                    verdict=verdict,
                )
        started = time.perf_counter()
        try:
            if remote:
                raw, verdict = with_retries(
                    lambda: score_one(pair), max_retries, backoff_base, sleep
                )
            else:
                raw, verdict = score_one(pair)
        except ScorerError as exc:
            return ScoreRecord(
                pair_id=pair.pair_id,
                scorer_name=descriptor.name,
                failure_note=f"{type(exc).__name__}: {exc}",
            )
        latency = time.perf_counter() - started if remote else None
        if cache is not None:
            cache.put(descriptor.name, key, raw, verdict)
        return ScoreRecord(
            pair_id=pair.pair_id,
            scorer_name=descriptor.name,
            raw_score=raw,
            verdict=verdict,
            latency=latency,
        )

    pairs = list(corpus)
    if remote and parallelism > 1 and len(pairs) > 1:
        with ThreadPoolExecutor(max_workers=parallelism) as pool:
            records = list(pool.map(run_pair, pairs))
    else:
        records = [run_pair(pair) for pair in pairs]
    return sorted(records, key=lambda r: r.pair_id)
