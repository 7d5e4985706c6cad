"""Entailment scoring against a pluggable semantic backend.

A backend is anything with ``entailment_probs(premise, hypothesis)``
returning the (entailment, neutral, contradiction) probabilities. The
question is folded into both sides of the input so the backend sees full
context; any sequence-delimiter tokens are the backend tokenizer's job and
never appear here as literal text.
"""

from __future__ import annotations

import warnings
from typing import Protocol, Tuple

from qaeval.errors import ProtocolError

PREMISE_TEMPLATE = "question: {question} answer: {answer}"
HYPOTHESIS_TEMPLATE = "question: {question} ground truth: {reference}"

PROBABILITY_SUM_TOLERANCE = 1e-3

# Inputs longer than this probably exceed typical encoder limits; the
# truncation policy belongs to the backend, we only warn.
DEFAULT_CHAR_BUDGET = 4000


class SemanticBackend(Protocol):
    def entailment_probs(self, premise: str, hypothesis: str) -> Tuple[float, float, float]:
        ...


def format_nli_input(
    question: str,
    answer: str,
    reference: str,
    premise_template: str = PREMISE_TEMPLATE,
    hypothesis_template: str = HYPOTHESIS_TEMPLATE,
) -> Tuple[str, str]:
    """Render the (premise, hypothesis) pair for entailment scoring."""
    for name, value in (("question", question), ("answer", answer), ("reference", reference)):
        if not value.strip():
            raise ValueError(f"{name} must be nonempty")
    premise = premise_template.format(question=question, answer=answer, reference=reference)
    hypothesis = hypothesis_template.format(question=question, answer=answer, reference=reference)
    return premise, hypothesis


def nli_entailment(
    question: str,
    answer: str,
    reference: str,
    backend: SemanticBackend,
    premise_template: str = PREMISE_TEMPLATE,
    hypothesis_template: str = HYPOTHESIS_TEMPLATE,
    char_budget: int = DEFAULT_CHAR_BUDGET,
) -> float:
    """Entailment probability for the pair, validated against the protocol.

    Raises ProtocolError when the backend's probability vector has a
    component outside [0, 1] or does not sum to 1 within tolerance.
    """
    premise, hypothesis = format_nli_input(
        question, answer, reference, premise_template, hypothesis_template
    )
    if len(premise) > char_budget or len(hypothesis) > char_budget:
        warnings.warn(
            f"NLI input exceeds {char_budget} characters; the backend may truncate",
            stacklevel=2,
        )
    probs = backend.entailment_probs(premise, hypothesis)
    return validate_probs(probs)


def validate_probs(probs) -> float:
    """Check a 3-way probability vector; return the entailment component."""
    if len(probs) != 3:
        raise ProtocolError(f"expected 3 probabilities, got {len(probs)}")
    entail, neutral, contra = probs
    for value in (entail, neutral, contra):
        if not 0.0 <= value <= 1.0:
            raise ProtocolError(f"probability out of [0, 1]: {value}")
    total = entail + neutral + contra
    if abs(total - 1.0) > PROBABILITY_SUM_TOLERANCE:
        raise ProtocolError(f"probabilities sum to {total}, outside 1 +/- {PROBABILITY_SUM_TOLERANCE}")
    return entail
