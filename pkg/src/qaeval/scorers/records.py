"""Score records, scorer descriptors, and score binarization."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Mapping, Optional

SCORER_KINDS = ("lexical", "nli", "token_f1", "rouge_l", "llm_judge", "external")

# Kinds that cannot run without an endpoint or a registered backend.
REMOTE_KINDS = ("nli", "llm_judge", "external")


def binarize(score: float, threshold: float) -> int:
    """1 iff score strictly exceeds the threshold; an exact tie maps to 0."""
    if not 0.0 < threshold < 1.0:
        raise ValueError(f"threshold must be in (0, 1), got {threshold}")
    if not 0.0 <= score <= 1.0:
        raise ValueError(f"score out of [0, 1]: {score}")
    return 1 if score > threshold else 0


@dataclass(frozen=True)
class ScoreRecord:
    """One evaluator's outcome on one pair.

    A failed remote call leaves ``raw_score`` and ``verdict`` unset and
    carries the reason in ``failure_note``; such records are excluded from
    metrics and counted separately.
    """

    pair_id: str
    scorer_name: str
    raw_score: Optional[float] = None
    verdict: Optional[int] = None
    latency: Optional[float] = None
    failure_note: Optional[str] = None

    def __post_init__(self):
        if self.failure_note is None:
            if self.raw_score is None or self.verdict is None:
                raise ValueError(f"pair {self.pair_id!r}: successful record needs score and verdict")
            if not 0.0 <= self.raw_score <= 1.0:
                raise ValueError(f"pair {self.pair_id!r}: raw_score out of [0, 1]")
            if self.verdict not in (0, 1):
                raise ValueError(f"pair {self.pair_id!r}: verdict must be 0 or 1")

    @property
    def failed(self) -> bool:
        return self.failure_note is not None

    def to_dict(self) -> Dict[str, Any]:
        return {
            "pair_id": self.pair_id,
            "scorer_name": self.scorer_name,
            "raw_score": self.raw_score,
            "verdict": self.verdict,
            "latency": self.latency,
            "failure_note": self.failure_note,
        }

    @staticmethod
    def from_dict(obj: Mapping[str, Any]) -> "ScoreRecord":
        return ScoreRecord(
            pair_id=obj["pair_id"],
            scorer_name=obj["scorer_name"],
            raw_score=obj.get("raw_score"),
            verdict=obj.get("verdict"),
            latency=obj.get("latency"),
            failure_note=obj.get("failure_note"),
        )


def save_score_records(records, path) -> None:
    path = Path(path)
    with path.open("w", encoding="utf-8") as handle:
        for record in records:
            handle.write(json.dumps(record.to_dict(), ensure_ascii=False) + "\n")


def load_score_records(path) -> List[ScoreRecord]:
    path = Path(path)
    records = []
    with path.open("r", encoding="utf-8") as handle:
        for line in handle:
            line = line.strip()
            if line:
                records.append(ScoreRecord.from_dict(json.loads(line)))
    return records


@dataclass(frozen=True)
class EndpointConfig:
    """Where a remote scorer lives and how hard to try reaching it."""

    base_url: str
    credential_env: Optional[str] = None
    model: Optional[str] = None
    timeout: float = 30.0
    max_retries: int = 3
    backoff_base: float = 0.5

    @staticmethod
    def from_dict(obj: Mapping[str, Any]) -> "EndpointConfig":
        return EndpointConfig(
            base_url=obj["base_url"],
            credential_env=obj.get("credential_env"),
            model=obj.get("model"),
            timeout=obj.get("timeout", 30.0),
            max_retries=obj.get("max_retries", 3),
            backoff_base=obj.get("backoff_base", 0.5),
        )

    def to_dict(self) -> Dict[str, Any]:
        return {
            "base_url": self.base_url,
            "credential_env": self.credential_env,
            "model": self.model,
            "timeout": self.timeout,
            "max_retries": self.max_retries,
            "backoff_base": self.backoff_base,
        }


@dataclass(frozen=True)
class ScorerDescriptor:
    """Names a scorer, its kind, its compute cost, and how to reach it.

    ``active_param_count`` is an operator-declared cost proxy, zero for the
    non-neural scorers. ``options`` carries kind-specific settings such as
    template overrides or a local backend spec.
    """

    name: str
    kind: str
    active_param_count: int = 0
    endpoint_config: Optional[EndpointConfig] = None
    options: Mapping[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in SCORER_KINDS:
            raise ValueError(f"unknown scorer kind {self.kind!r}; expected one of {SCORER_KINDS}")
        if self.active_param_count < 0:
            raise ValueError("active_param_count must be nonnegative")
        if self.kind in ("llm_judge", "external"):
            if self.endpoint_config is None and "backend" not in self.options:
                raise ValueError(
                    f"scorer {self.name!r} of kind {self.kind!r} needs an endpoint or backend"
                )

    @staticmethod
    def from_dict(obj: Mapping[str, Any]) -> "ScorerDescriptor":
        endpoint = obj.get("endpoint")
        return ScorerDescriptor(
            name=obj["name"],
            kind=obj["kind"],
            active_param_count=obj.get("active_param_count", 0),
            endpoint_config=EndpointConfig.from_dict(endpoint) if endpoint else None,
            options=dict(obj.get("options", {})),
        )

    def to_dict(self) -> Dict[str, Any]:
        data: Dict[str, Any] = {
            "name": self.name,
            "kind": self.kind,
            "active_param_count": self.active_param_count,
        }
        if self.endpoint_config is not None:
            data["endpoint"] = self.endpoint_config.to_dict()
        if self.options:
            data["options"] = dict(self.options)
        return data
