"""Binary LLM-judge scoring through a chat-style client.

The client sends one request whose output is constrained to the single
token "0" or "1"; anything else is a protocol violation recorded as a
failure, never coerced.
"""

from __future__ import annotations

from typing import Protocol

from qaeval.errors import ProtocolError

JUDGE_INSTRUCTION = (
    "You are grading question-answering output. Reply with exactly one "
    "character: 1 if the candidate answer matches the reference answer for "
    "the question, 0 otherwise."
)

JUDGE_USER_TEMPLATE = (
    "question: {question}\nreference answer: {reference}\ncandidate answer: {answer}"
)


class JudgeClient(Protocol):
    def complete(self, system: str, user: str) -> str:
        ...


def llm_judge(
    question: str,
    answer: str,
    reference: str,
    client: JudgeClient,
    instruction: str = JUDGE_INSTRUCTION,
    user_template: str = JUDGE_USER_TEMPLATE,
) -> int:
    """Ask the judge for a binary verdict on the pair."""
    user = user_template.format(question=question, reference=reference, answer=answer)
    completion = client.complete(instruction, user)
    return parse_verdict(completion)


def parse_verdict(completion: str) -> int:
    text = completion.strip()
    if text not in ("0", "1"):
        raise ProtocolError(f"judge reply is not the single token 0 or 1: {completion!r}")
    return int(text)
