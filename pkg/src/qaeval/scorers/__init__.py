"""Per-pair evaluators: lexical, token-overlap, LCS, entailment, judges."""

from qaeval.scorers.backends import (
    HashSemanticBackend,
    HTTPJudgeClient,
    HTTPSemanticBackend,
    ScriptedJudgeClient,
    ScriptedSemanticBackend,
)
from qaeval.scorers.judge import llm_judge
from qaeval.scorers.nli import format_nli_input, nli_entailment
from qaeval.scorers.records import (
    EndpointConfig,
    ScoreRecord,
    ScorerDescriptor,
    binarize,
    load_score_records,
    save_score_records,
)
from qaeval.scorers.runner import BackendRegistry, ScoreCache, score_corpus
from qaeval.scorers.text import lexical_match, normalize, rouge_l, token_f1, tokenize

__all__ = [
    "BackendRegistry",
    "EndpointConfig",
    "HTTPJudgeClient",
    "HTTPSemanticBackend",
    "HashSemanticBackend",
    "ScoreCache",
    "ScoreRecord",
    "ScorerDescriptor",
    "ScriptedJudgeClient",
    "ScriptedSemanticBackend",
    "binarize",
    "format_nli_input",
    "lexical_match",
    "llm_judge",
    "load_score_records",
    "nli_entailment",
    "normalize",
    "rouge_l",
    "save_score_records",
    "score_corpus",
    "token_f1",
    "tokenize",
]
