"""Run configuration: a JSON file sets every knob, flags override fields.

Credentials never appear in config files; endpoint entries name the
environment variable holding the key and the client reads it at call
time.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional

from qaeval.errors import ConfigError
from qaeval.scorers.records import ScorerDescriptor


@dataclass(frozen=True)
class HybridSpec:
    """Which stored scorer outputs feed the calibrated combiner."""

    name: str = "nli+lex"
    semantic: str = "nli"
    lexical: str = "lexical"
    model_path: Optional[Path] = None

    @classmethod
    def from_dict(cls, data: dict, base_dir: Path) -> "HybridSpec":
        if not isinstance(data, dict):
            raise ConfigError("hybrid section must be an object")
        model = data.get("model")
        return cls(
            name=data.get("name", "nli+lex"),
            semantic=data.get("semantic", "nli"),
            lexical=data.get("lexical", "lexical"),
            model_path=_resolve(model, base_dir) if model is not None else None,
        )


@dataclass
class RunConfig:
    corpus_path: Path
    scorers: List[ScorerDescriptor] = field(default_factory=list)
    golds_path: Optional[Path] = None
    hybrid: Optional[HybridSpec] = None
    threshold: float = 0.5
    parallelism: int = 1
    cache_dir: Optional[Path] = None
    output_dir: Path = Path("qaeval-out")
    seed: int = 0

    def validate(self, require_golds: bool = False) -> None:
        """Check invariants and referenced input paths.

        Raises:
            ConfigError: on any violation.
        """
        if not self.corpus_path.exists():
            raise ConfigError(f"corpus file not found: {self.corpus_path}")
        if require_golds and self.golds_path is None:
            raise ConfigError("gold labels required: set 'golds' in config or --golds")
        if self.golds_path is not None and not self.golds_path.exists():
            raise ConfigError(f"golds file not found: {self.golds_path}")
        if not 0.0 < self.threshold < 1.0:
            raise ConfigError(f"threshold must be in (0, 1), got {self.threshold}")
        if self.parallelism < 1:
            raise ConfigError(f"parallelism must be >= 1, got {self.parallelism}")
        names = [d.name for d in self.scorers]
        if len(set(names)) != len(names):
            raise ConfigError("duplicate scorer names in config")
        if self.hybrid is not None:
            for role, source in (("semantic", self.hybrid.semantic),
                                 ("lexical", self.hybrid.lexical)):
                if source not in names:
                    raise ConfigError(
                        f"hybrid {role} source {source!r} is not a configured scorer"
                    )
            if self.hybrid.name in names:
                raise ConfigError(f"hybrid name {self.hybrid.name!r} collides with a scorer")
            if self.hybrid.model_path is None:
                raise ConfigError("hybrid section needs a 'model' path")
            if not self.hybrid.model_path.exists():
                raise ConfigError(f"hybrid model file not found: {self.hybrid.model_path}")

    def descriptor(self, name: str) -> ScorerDescriptor:
        for descriptor in self.scorers:
            if descriptor.name == name:
                return descriptor
        raise ConfigError(f"no scorer named {name!r} in config")


def _resolve(value, base_dir: Path) -> Path:
    path = Path(value)
    return path if path.is_absolute() else base_dir / path


def load_config_file(path) -> dict:
    """Read a JSON config file, tagging it with its directory for paths."""
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"config file not found: {path}")
    try:
        with path.open("r", encoding="utf-8") as handle:
            data = json.load(handle)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: not valid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError(f"{path}: config root must be an object")
    data["_base_dir"] = str(path.parent)
    return data


_KNOWN_KEYS = {
    "_base_dir", "corpus", "golds", "scorers", "hybrid", "threshold",
    "parallelism", "cache_dir", "output_dir", "seed",
}


def build_run_config(file_data: Optional[dict] = None,
                     overrides: Optional[Dict[str, object]] = None) -> RunConfig:
    """Merge config-file values with flag overrides into a RunConfig.

    File paths are resolved relative to the config file; override paths
    are taken as given (the shell already anchored them).
    """
    file_data = dict(file_data or {})
    overrides = {k: v for k, v in (overrides or {}).items() if v is not None}
    base_dir = Path(file_data.pop("_base_dir", "."))

    unknown = set(file_data) - _KNOWN_KEYS
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")

    def picked(key, default=None):
        if key in overrides:
            return overrides[key]
        return file_data.get(key, default)

    def picked_path(key) -> Optional[Path]:
        if key in overrides:
            return Path(overrides[key])
        if key in file_data and file_data[key] is not None:
            return _resolve(file_data[key], base_dir)
        return None

    corpus_path = picked_path("corpus")
    if corpus_path is None:
        raise ConfigError("corpus path required: set 'corpus' in config or --corpus")

    scorers = []
    raw_scorers = file_data.get("scorers", [])
    if not isinstance(raw_scorers, list):
        raise ConfigError("'scorers' must be a list of descriptor objects")
    for entry in raw_scorers:
        try:
            scorers.append(ScorerDescriptor.from_dict(entry))
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigError(f"bad scorer entry {entry!r}: {exc}") from exc

    hybrid = None
    if file_data.get("hybrid") is not None:
        hybrid = HybridSpec.from_dict(file_data["hybrid"], base_dir)

    try:
        threshold = float(picked("threshold", 0.5))
        parallelism = int(picked("parallelism", 1))
        seed = int(picked("seed", 0))
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad numeric config value: {exc}") from exc

    cache_dir = picked_path("cache_dir")
    output_dir = picked_path("output_dir") or Path("qaeval-out")
    return RunConfig(
        corpus_path=corpus_path,
        scorers=scorers,
        golds_path=picked_path("golds"),
        hybrid=hybrid,
        threshold=threshold,
        parallelism=parallelism,
        cache_dir=cache_dir,
        output_dir=output_dir,
        seed=seed,
    )


def load_golds(path) -> Dict[str, int]:
    """Gold labels: a JSON object {pair_id: 0|1} or JSONL judgment lines."""
    path = Path(path)
    text = path.read_text(encoding="utf-8")
    try:
        data = json.loads(text)
    except json.JSONDecodeError:
        data = None
    golds: Dict[str, int] = {}
    if isinstance(data, dict):
        items = data.items()
        for pair_id, verdict in items:
            golds[pair_id] = _check_verdict(path, pair_id, verdict)
        return golds
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.strip()
        if not line:
            continue
        try:
            entry = json.loads(line)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}:{lineno}: not valid JSON: {exc}") from exc
        if not isinstance(entry, dict) or "pair_id" not in entry or "verdict" not in entry:
            raise ConfigError(f"{path}:{lineno}: need pair_id and verdict fields")
        golds[entry["pair_id"]] = _check_verdict(path, entry["pair_id"], entry["verdict"])
    if not golds:
        raise ConfigError(f"{path}: no gold labels found")
    return golds


def _check_verdict(path: Path, pair_id: str, verdict) -> int:
    if isinstance(verdict, bool) or verdict not in (0, 1):
        raise ConfigError(f"{path}: pair {pair_id!r} verdict must be 0 or 1, got {verdict!r}")
    return int(verdict)
