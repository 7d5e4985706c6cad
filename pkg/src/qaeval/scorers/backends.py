"""Backends and clients: scripted mocks, a deterministic hash backend, and
HTTP clients for the semantic-scorer and judge wire protocols.

Semantic-scorer wire protocol: POST with body ``{"premise": str,
"hypothesis": str}``; response ``{"entailment": x, "neutral": y,
"contradiction": z}`` with components in [0, 1] summing to 1 within 1e-3.
The batch variant sends equal-length arrays and gets arrays back.

Clients make single attempts and raise TransportError on retriable
failures; retry with backoff is applied per descriptor by the scoring
pipeline (see ``qaeval.scorers.runner``).
"""

from __future__ import annotations

import hashlib
import json
import os
import threading
import time
from pathlib import Path
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import httpx

from qaeval.errors import ProtocolError, TransportError
from qaeval.scorers.records import EndpointConfig


def content_key(*parts: str) -> str:
    """Stable hash of text fields, used for scripted lookups and caching."""
    joined = "\x1f".join(parts)
    return hashlib.sha256(joined.encode("utf-8")).hexdigest()


def with_retries(
    call: Callable,
    max_retries: int,
    backoff_base: float = 0.5,
    sleep: Callable[[float], None] = time.sleep,
):
    """Run a callable, retrying TransportError with exponential backoff.

    ``max_retries`` counts retries, not attempts; retry i sleeps
    ``backoff_base * 2**i`` first. The final error propagates.
    """
    attempt = 0
    while True:
        try:
            return call()
        except TransportError:
            if attempt >= max_retries:
                raise
            sleep(backoff_base * (2 ** attempt))
            attempt += 1


class ScriptedSemanticBackend:
    """Deterministic mock: maps (premise, hypothesis) content to fixed probs.

    ``crash_after`` aborts the run with a plain RuntimeError once that many
    calls have been served, simulating a killed process for resume tests.
    ``fail_keys`` raise TransportError permanently for those inputs.
    """

    def __init__(
        self,
        entries: Optional[Dict[str, Tuple[float, float, float]]] = None,
        default: Optional[Tuple[float, float, float]] = None,
        crash_after: Optional[int] = None,
        fail_keys: Optional[set] = None,
    ):
        self.entries = dict(entries or {})
        self.default = default
        self.crash_after = crash_after
        self.fail_keys = set(fail_keys or ())
        self.calls = 0
        self._lock = threading.Lock()

    def entailment_probs(self, premise: str, hypothesis: str) -> Tuple[float, float, float]:
        with self._lock:
            if self.crash_after is not None and self.calls >= self.crash_after:
                raise RuntimeError("scripted crash: backend call budget exhausted")
            self.calls += 1
        key = content_key(premise, hypothesis)
        if key in self.fail_keys:
            raise TransportError(f"scripted transport failure for key {key[:12]}")
        if key in self.entries:
            return self.entries[key]
        if self.default is not None:
            return self.default
        raise ProtocolError(f"scripted backend has no entry for key {key[:12]}")

    def script(self, premise: str, hypothesis: str, probs: Tuple[float, float, float]) -> None:
        self.entries[content_key(premise, hypothesis)] = probs

    def fail_on(self, premise: str, hypothesis: str) -> None:
        self.fail_keys.add(content_key(premise, hypothesis))

    def save(self, path) -> None:
        data = {
            "entries": {k: list(v) for k, v in sorted(self.entries.items())},
            "default": list(self.default) if self.default else None,
            "fail_keys": sorted(self.fail_keys),
        }
        Path(path).write_text(json.dumps(data, indent=2) + "\n", encoding="utf-8")

    @staticmethod
    def load(path, crash_after: Optional[int] = None) -> "ScriptedSemanticBackend":
        data = json.loads(Path(path).read_text(encoding="utf-8"))
        return ScriptedSemanticBackend(
            entries={k: tuple(v) for k, v in data.get("entries", {}).items()},
            default=tuple(data["default"]) if data.get("default") else None,
            crash_after=crash_after,
            fail_keys=set(data.get("fail_keys", ())),
        )


class HashSemanticBackend:
    """Deterministic pseudo-random probabilities derived from input content.

    Useful for benchmarks and determinism checks where the actual values do
    not matter, only their stability.
    """

    def __init__(self, seed: int = 0):
        self.seed = seed

    def entailment_probs(self, premise: str, hypothesis: str) -> Tuple[float, float, float]:
        digest = hashlib.sha256(f"{self.seed}\x1f{premise}\x1f{hypothesis}".encode()).digest()
        raw = [int.from_bytes(digest[i : i + 4], "big") + 1 for i in (0, 4, 8)]
        total = sum(raw)
        probs = [r / total for r in raw]
        # close the rounding gap; grouping mirrors sum()'s left-to-right
        # order so the vector sums to exactly 1.0
        probs[2] = 1.0 - (probs[0] + probs[1])
        return (probs[0], probs[1], probs[2])


def _auth_headers(config: EndpointConfig) -> Dict[str, str]:
    if not config.credential_env:
        return {}
    token = os.environ.get(config.credential_env)
    return {"Authorization": f"Bearer {token}"} if token else {}


class HTTPSemanticBackend:
    """Single-attempt client for the semantic-scorer wire protocol."""

    def __init__(self, config: EndpointConfig, transport: Optional[httpx.BaseTransport] = None):
        self.config = config
        self._client = httpx.Client(
            timeout=config.timeout, headers=_auth_headers(config), transport=transport
        )

    def _post(self, body: dict) -> dict:
        try:
            response = self._client.post(self.config.base_url, json=body)
        except httpx.HTTPError as exc:
            raise TransportError(f"semantic backend unreachable: {exc}") from exc
        if response.status_code >= 500:
            raise TransportError(f"semantic backend returned {response.status_code}")
        if response.status_code != 200:
            raise ProtocolError(f"semantic backend returned {response.status_code}")
        try:
            return response.json()
        except ValueError as exc:
            raise ProtocolError(f"semantic backend sent non-JSON body: {exc}") from exc

    def entailment_probs(self, premise: str, hypothesis: str) -> Tuple[float, float, float]:
        data = self._post({"premise": premise, "hypothesis": hypothesis})
        return _probs_from_payload(data)

    def entailment_probs_batch(
        self, premises: Sequence[str], hypotheses: Sequence[str]
    ) -> List[Tuple[float, float, float]]:
        if len(premises) != len(hypotheses):
            raise ValueError("premises and hypotheses must have equal length")
        data = self._post({"premise": list(premises), "hypothesis": list(hypotheses)})
        try:
            columns = [data["entailment"], data["neutral"], data["contradiction"]]
        except (KeyError, TypeError) as exc:
            raise ProtocolError(f"semantic backend reply missing field: {exc}") from exc
        if not all(isinstance(c, list) and len(c) == len(premises) for c in columns):
            raise ProtocolError("batch reply arrays do not match request length")
        return [tuple(col[i] for col in columns) for i in range(len(premises))]

    def close(self) -> None:
        self._client.close()


def _probs_from_payload(data: dict) -> Tuple[float, float, float]:
    try:
        return (data["entailment"], data["neutral"], data["contradiction"])
    except (KeyError, TypeError) as exc:
        raise ProtocolError(f"semantic backend reply missing field: {exc}") from exc


class ScriptedJudgeClient:
    """Mock judge driven by a per-key reply script.

    Each value is a list consumed one element per attempt; the sentinel
    "transport-error" raises TransportError, anything else is returned as
    the completion. Unscripted inputs fall back to ``default``.
    """

    def __init__(self, replies: Optional[Dict[str, List[str]]] = None, default: Optional[str] = None):
        self.replies = {k: list(v) for k, v in (replies or {}).items()}
        self.default = default
        self.calls = 0
        self._lock = threading.Lock()

    def complete(self, system: str, user: str) -> str:
        with self._lock:
            self.calls += 1
            key = content_key(user)
            queue = self.replies.get(key)
            if queue:
                reply = queue.pop(0)
            elif self.default is not None:
                reply = self.default
            else:
                raise ProtocolError(f"scripted judge has no reply for key {key[:12]}")
        if reply == "transport-error":
            raise TransportError("scripted transport failure")
        return reply

    def script(self, user: str, replies: List[str]) -> None:
        self.replies[content_key(user)] = list(replies)


class HTTPJudgeClient:
    """Chat-completions-style client with the output constrained to 0/1.

    Sends model, system + user messages, temperature 0, a one-token budget,
    and a guided-choice constraint limiting completions to "0" or "1".
    Credentials come from the environment variable named in the config.
    """

    def __init__(self, config: EndpointConfig, transport: Optional[httpx.BaseTransport] = None):
        self.config = config
        self._client = httpx.Client(
            timeout=config.timeout, headers=_auth_headers(config), transport=transport
        )

    def complete(self, system: str, user: str) -> str:
        body = {
            "model": self.config.model,
            "messages": [
                {"role": "system", "content": system},
                {"role": "user", "content": user},
            ],
            "temperature": 0,
            "max_tokens": 1,
            "guided_choice": ["0", "1"],
        }
        try:
            response = self._client.post(self.config.base_url, json=body)
        except httpx.HTTPError as exc:
            raise TransportError(f"judge endpoint unreachable: {exc}") from exc
        if response.status_code >= 500 or response.status_code == 429:
            raise TransportError(f"judge endpoint returned {response.status_code}")
        if response.status_code != 200:
            raise ProtocolError(f"judge endpoint returned {response.status_code}")
        try:
            data = response.json()
            return data["choices"][0]["message"]["content"]
        except (ValueError, KeyError, IndexError, TypeError) as exc:
            raise ProtocolError(f"judge reply not chat-completion shaped: {exc}") from exc

    def close(self) -> None:
        self._client.close()
