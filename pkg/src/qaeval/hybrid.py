"""Hybrid semantic + lexical verdicts via calibrated logistic combination.

The combiner maps a semantic probability and a binary lexical match to a
single correctness probability. Weights come from a small logistic
regression fit on labeled pairs; training is deterministic (full-batch
gradient descent from zero init) so a rerun on the same data reproduces
the same model bit for bit.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from qaeval.dataset import Corpus
from qaeval.errors import ConfigError, CoverageGapError
from qaeval.scorers.records import ScoreRecord, binarize

MODEL_VERSION = 1
HYBRID_SCORER_NAME = "nli+lex"


@dataclass(frozen=True)
class FeatureRow:
    """One labeled training example for the combiner."""

    pair_id: str
    semantic: float
    lexical: float
    gold: int

    def __post_init__(self):
        if not 0.0 <= self.semantic <= 1.0:
            raise ValueError(f"{self.pair_id}: semantic score {self.semantic} outside [0, 1]")
        if not 0.0 <= self.lexical <= 1.0:
            raise ValueError(f"{self.pair_id}: lexical score {self.lexical} outside [0, 1]")
        if self.gold not in (0, 1):
            raise ValueError(f"{self.pair_id}: gold label must be 0 or 1, got {self.gold!r}")


@dataclass(frozen=True)
class TrainOptions:
    learning_rate: float = 0.1
    max_iter: int = 5000
    tol: float = 1e-8
    l2: float = 0.0
    fit_intercept: bool = True
    class_weight: Optional[str] = "inverse_frequency"

    def __post_init__(self):
        if self.learning_rate <= 0:
            raise ValueError("learning_rate must be positive")
        if self.max_iter < 1:
            raise ValueError("max_iter must be at least 1")
        if self.tol < 0:
            raise ValueError("tol must be nonnegative")
        if self.l2 < 0:
            raise ValueError("l2 must be nonnegative")
        if self.class_weight not in (None, "inverse_frequency"):
            raise ValueError(f"unknown class_weight {self.class_weight!r}")


@dataclass(frozen=True)
class CalibrationModel:
    """Learned combiner weights plus the decision threshold."""

    w_semantic: float
    w_lexical: float
    intercept: float = 0.0
    threshold: float = 0.5
    version: int = MODEL_VERSION
    training_meta: Dict[str, object] = field(default_factory=dict)

    def __post_init__(self):
        for name in ("w_semantic", "w_lexical", "intercept", "threshold"):
            value = getattr(self, name)
            if not math.isfinite(value):
                raise ValueError(f"{name} must be finite, got {value!r}")
        if not 0.0 < self.threshold < 1.0:
            raise ValueError(f"threshold must be in (0, 1), got {self.threshold}")

    def probability(self, semantic: float, lexical: float) -> float:
        return combine(semantic, lexical, self.w_semantic, self.w_lexical, self.intercept)

    def verdict(self, semantic: float, lexical: float) -> int:
        return binarize(self.probability(semantic, lexical), self.threshold)

    def to_dict(self) -> dict:
        return {
            "w_semantic": self.w_semantic,
            "w_lexical": self.w_lexical,
            "intercept": self.intercept,
            "threshold": self.threshold,
            "version": self.version,
            "training_meta": dict(self.training_meta),
        }


def combine(semantic: float, lexical: float, w_semantic: float, w_lexical: float,
            intercept: float = 0.0) -> float:
    """Weighted logistic blend of the two signals.

    Args:
        semantic: entailment probability in [0, 1].
        lexical: lexical match signal in [0, 1], typically binary.
        w_semantic: weight on the semantic signal.
        w_lexical: weight on the lexical signal.
        intercept: additive bias term.

    Returns:
        Probability in (0, 1).
    """
    if not 0.0 <= semantic <= 1.0:
        raise ValueError(f"semantic score {semantic} outside [0, 1]")
    if not 0.0 <= lexical <= 1.0:
        raise ValueError(f"lexical score {lexical} outside [0, 1]")
    z = w_semantic * semantic + w_lexical * lexical + intercept
    if z >= 0:
        return 1.0 / (1.0 + math.exp(-z))
    ez = math.exp(z)
    return ez / (1.0 + ez)


def classify(semantic: float, lexical: float, model: CalibrationModel) -> int:
    return model.verdict(semantic, lexical)


def _design_matrix(rows: Sequence[FeatureRow]) -> Tuple[np.ndarray, np.ndarray]:
    x = np.array([[row.semantic, row.lexical] for row in rows], dtype=np.float64)
    y = np.array([row.gold for row in rows], dtype=np.float64)
    return x, y


def _sample_weights(y: np.ndarray, class_weight: Optional[str]) -> np.ndarray:
    if class_weight is None:
        return np.ones_like(y)
    # inverse_frequency: each class contributes half the total weight,
    # so duplicating the whole dataset cannot move the optimum.
    n = y.size
    n_pos = float(np.sum(y))
    n_neg = n - n_pos
    weights = np.where(y == 1.0, n / (2.0 * n_pos), n / (2.0 * n_neg))
    return weights


def loss_and_gradient(
    params: np.ndarray,
    x: np.ndarray,
    y: np.ndarray,
    weights: np.ndarray,
    l2: float = 0.0,
    fit_intercept: bool = True,
) -> Tuple[float, np.ndarray]:
    """Weighted logistic loss and its gradient.

    ``params`` is [w_semantic, w_lexical, intercept]. The loss is
    normalized by the total sample weight; the L2 penalty never touches
    the intercept. When ``fit_intercept`` is false the intercept slot is
    held at zero and its gradient reported as zero.
    """
    w = params[:2]
    b = params[2] if fit_intercept else 0.0
    z = x @ w + b
    # log(1 + e^-z) for y=1 and log(1 + e^z) for y=0, computed stably.
    losses = np.where(y == 1.0, np.logaddexp(0.0, -z), np.logaddexp(0.0, z))
    total_weight = float(np.sum(weights))
    loss = float(np.sum(weights * losses)) / total_weight
    loss += 0.5 * l2 * float(w @ w)

    p = 1.0 / (1.0 + np.exp(-np.clip(z, -500.0, 500.0)))
    residual = weights * (p - y)
    grad_w = (x.T @ residual) / total_weight + l2 * w
    grad_b = float(np.sum(residual)) / total_weight if fit_intercept else 0.0
    return loss, np.array([grad_w[0], grad_w[1], grad_b], dtype=np.float64)


def train_calibration(
    rows: Sequence[FeatureRow],
    options: TrainOptions = TrainOptions(),
    threshold: float = 0.5,
) -> CalibrationModel:
    """Fit combiner weights by full-batch gradient descent.

    Deterministic: zero initialization, fixed step size, stop on gradient
    max-norm below ``options.tol`` or after ``options.max_iter`` steps.

    Raises:
        ValueError: on fewer than two rows, non-finite features, or
            training labels that are all one class.
    """
    rows = list(rows)
    if len(rows) < 2:
        raise ValueError(f"need at least 2 training rows, got {len(rows)}")
    x, y = _design_matrix(rows)
    if not np.all(np.isfinite(x)):
        raise ValueError("non-finite feature values in training rows")
    n_pos = int(np.sum(y))
    if n_pos == 0 or n_pos == len(rows):
        raise ValueError("single-class input: training rows must include both labels")

    weights = _sample_weights(y, options.class_weight)
    params = np.zeros(3, dtype=np.float64)
    stop_reason = "max_iter"
    iterations = options.max_iter
    loss, grad = loss_and_gradient(params, x, y, weights, options.l2, options.fit_intercept)
    for step in range(options.max_iter):
        if float(np.max(np.abs(grad))) < options.tol:
            stop_reason = "converged"
            iterations = step
            break
        params = params - options.learning_rate * grad
        loss, grad = loss_and_gradient(params, x, y, weights, options.l2, options.fit_intercept)

    meta = {
        "n_rows": len(rows),
        "n_positive": n_pos,
        "learning_rate": options.learning_rate,
        "max_iter": options.max_iter,
        "tol": options.tol,
        "l2": options.l2,
        "fit_intercept": options.fit_intercept,
        "class_weight": options.class_weight,
        "stop_reason": stop_reason,
        "iterations": iterations,
        "final_loss": loss,
        "final_gradient_norm": float(np.max(np.abs(grad))),
    }
    return CalibrationModel(
        w_semantic=float(params[0]),
        w_lexical=float(params[1]),
        intercept=float(params[2]) if options.fit_intercept else 0.0,
        threshold=threshold,
        training_meta=meta,
    )


def save_model(model: CalibrationModel, path) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8") as handle:
        json.dump(model.to_dict(), handle, indent=2, sort_keys=True)
        handle.write("\n")


def load_model(path) -> CalibrationModel:
    path = Path(path)
    try:
        with path.open("r", encoding="utf-8") as handle:
            data = json.load(handle)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: not valid JSON: {exc}") from exc
    for key in ("w_semantic", "w_lexical", "intercept", "threshold", "version"):
        if key not in data:
            raise ConfigError(f"{path}: missing model field {key!r}")
    if data["version"] != MODEL_VERSION:
        raise ConfigError(
            f"{path}: unsupported model version {data['version']!r}, expected {MODEL_VERSION}"
        )
    return CalibrationModel(
        w_semantic=float(data["w_semantic"]),
        w_lexical=float(data["w_lexical"]),
        intercept=float(data["intercept"]),
        threshold=float(data["threshold"]),
        training_meta=dict(data.get("training_meta", {})),
    )


def build_feature_rows(
    semantic_records: Sequence[ScoreRecord],
    lexical_records: Sequence[ScoreRecord],
    golds: Dict[str, int],
) -> List[FeatureRow]:
    """Join per-scorer records with gold labels into training rows.

    Pairs whose semantic or lexical score failed are dropped; a pair with
    a gold label but no record at all is a coverage gap and raises.
    """
    semantic_by_id = {r.pair_id: r for r in semantic_records}
    lexical_by_id = {r.pair_id: r for r in lexical_records}
    rows = []
    for pair_id in sorted(golds):
        se = semantic_by_id.get(pair_id)
        lm = lexical_by_id.get(pair_id)
        if se is None or lm is None:
            missing = "semantic" if se is None else "lexical"
            raise CoverageGapError(f"pair {pair_id!r} has no {missing} score record")
        if se.failed or lm.failed:
            continue
        rows.append(
            FeatureRow(
                pair_id=pair_id,
                semantic=se.raw_score,
                lexical=lm.raw_score,
                gold=golds[pair_id],
            )
        )
    return rows


def predict_corpus(
    corpus: Corpus,
    semantic_records: Sequence[ScoreRecord],
    lexical_records: Sequence[ScoreRecord],
    model: CalibrationModel,
    scorer_name: str = HYBRID_SCORER_NAME,
) -> List[ScoreRecord]:
    """Combine stored per-scorer records into hybrid records for a corpus.

    Every corpus pair must have both input records (else CoverageGapError).
    A failed input record yields a failed hybrid record carrying the
    upstream failure note.
    """
    semantic_by_id = {r.pair_id: r for r in semantic_records}
    lexical_by_id = {r.pair_id: r for r in lexical_records}
    out: List[ScoreRecord] = []
    for pair in corpus:
        se = semantic_by_id.get(pair.pair_id)
        lm = lexical_by_id.get(pair.pair_id)
        if se is None or lm is None:
            missing = "semantic" if se is None else "lexical"
            raise CoverageGapError(f"pair {pair.pair_id!r} has no {missing} score record")
        if se.failed or lm.failed:
            source = se if se.failed else lm
            out.append(
                ScoreRecord(
                    pair_id=pair.pair_id,
                    scorer_name=scorer_name,
                    failure_note=f"{source.scorer_name}: {source.failure_note}",
                )
            )
            continue
        probability = model.probability(se.raw_score, lm.raw_score)
        out.append(
            ScoreRecord(
                pair_id=pair.pair_id,
                scorer_name=scorer_name,
                raw_score=probability,
                verdict=binarize(probability, model.threshold),
            )
        )
    return sorted(out, key=lambda r: r.pair_id)
