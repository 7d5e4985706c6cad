import json
from typing import Callable, Dict, List, Tuple

import pytest

from qaeval.dataset import Corpus, QAPair
from qaeval.scorers.backends import ScriptedSemanticBackend
from qaeval.scorers.nli import format_nli_input

SOURCES = ("src-a", "src-b", "src-c", "src-d", "src-e")
MODELS = ("model-a", "model-b", "model-c", "model-d")


def make_pair(
    source: str = "src-a",
    question_id: str = "q001",
    model: str = "model-a",
    question: str = "what color is the sky?",
    reference: str = "blue",
    candidate: str = "the sky is blue",
) -> QAPair:
    return QAPair(
        pair_id=f"{source}/{question_id}/{model}",
        source_dataset=source,
        question_id=question_id,
        question=question,
        reference_answer=reference,
        candidate_answer=candidate,
        candidate_model=model,
    )


def synthetic_gold(index: int) -> int:
    # Fixed mixed pattern, roughly balanced, deterministic.
    return 1 if index % 7 in (0, 2, 3, 5) else 0


def build_synthetic_corpus(
    sources=SOURCES,
    n_questions: int = 5,
    models=MODELS,
    gold_fn: Callable[[int], int] = synthetic_gold,
) -> Tuple[Corpus, Dict[str, int]]:
    """Corpus where the candidate embeds the reference exactly when gold is 1.

    That makes the lexical scorer a perfect oracle for the gold labels,
    which end-to-end tests exploit.
    """
    pairs: List[QAPair] = []
    golds: Dict[str, int] = {}
    index = 0
    for source in sources:
        for q in range(1, n_questions + 1):
            question_id = f"{source}-q{q:03d}"
            question = f"what is fact {question_id} of {source}?"
            reference = f"fact {question_id} of {source}"
            for model in models:
                gold = gold_fn(index)
                index += 1
                if gold:
                    candidate = f"I believe the answer is {reference}, as noted."
                else:
                    candidate = "that topic is entirely unclear to me."
                pair = QAPair(
                    pair_id=f"{source}/{question_id}/{model}",
                    source_dataset=source,
                    question_id=question_id,
                    question=question,
                    reference_answer=reference,
                    candidate_answer=candidate,
                    candidate_model=model,
                )
                pairs.append(pair)
                golds[pair.pair_id] = gold
    return Corpus("synthetic", pairs), golds


@pytest.fixture
def synthetic_corpus() -> Tuple[Corpus, Dict[str, int]]:
    return build_synthetic_corpus()


def write_json(path, data) -> None:
    path.write_text(json.dumps(data, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def scripted_oracle_file(corpus, golds, path):
    """Scripted semantic backend file that agrees with the gold labels."""
    backend = ScriptedSemanticBackend()
    for pair in corpus:
        premise, hypothesis = format_nli_input(
            pair.question, pair.candidate_answer, pair.reference_answer
        )
        probs = (0.98, 0.01, 0.01) if golds[pair.pair_id] else (0.02, 0.97, 0.01)
        backend.script(premise, hypothesis, probs)
    backend.save(path)
    return path
