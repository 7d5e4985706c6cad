"""Reference-based text scorers: substring match, token F1, ROUGE-L."""

from __future__ import annotations

import re
from collections import Counter
from typing import List

from qaeval.kernels import lcs_length

# Maximal runs of Unicode alphanumerics; underscore excluded on purpose.
_TOKEN_RE = re.compile(r"[^\W_]+", re.UNICODE)


def _require_nonempty(candidate: str, reference: str) -> None:
    if not candidate.strip() or not reference.strip():
        raise ValueError("candidate and reference must be nonempty")


def normalize(text: str) -> str:
    """Case-fold, collapse whitespace runs to single spaces, and trim."""
    return " ".join(text.casefold().split())


def lexical_match(candidate: str, reference: str) -> int:
    """1 iff the normalized reference occurs contiguously in the candidate."""
    _require_nonempty(candidate, reference)
    return 1 if normalize(reference) in normalize(candidate) else 0


def tokenize(text: str) -> List[str]:
    """Case-folded tokens split on maximal non-alphanumeric runs."""
    return _TOKEN_RE.findall(text.casefold())


def token_f1(candidate: str, reference: str) -> float:
    """Token-level F1 with multiset overlap; 0 when nothing overlaps."""
    _require_nonempty(candidate, reference)
    cand = tokenize(candidate)
    ref = tokenize(reference)
    if not cand or not ref:
        return 0.0
    overlap = sum((Counter(cand) & Counter(ref)).values())
    if overlap == 0:
        return 0.0
    precision = overlap / len(cand)
    recall = overlap / len(ref)
    return 2 * precision * recall / (precision + recall)


def rouge_l(candidate: str, reference: str) -> float:
    """LCS-based F-measure over token sequences, equal P/R weighting."""
    _require_nonempty(candidate, reference)
    cand = tokenize(candidate)
    ref = tokenize(reference)
    if not cand or not ref:
        return 0.0
    lcs = lcs_length(cand, ref)
    if lcs == 0:
        return 0.0
    precision = lcs / len(cand)
    recall = lcs / len(ref)
    return 2 * precision * recall / (precision + recall)
