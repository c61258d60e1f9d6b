"""Scoring responses correct/incorrect: an LLM judge and a deterministic matcher.

The deterministic matcher implements the inclusion rule: a response naming
several options still counts as correct when the correct one is among them.
A letter only matches as a standalone token so "D" never matches inside a
word; option-text matches are discarded when they sit entirely inside a
longer competing option's text that the response actually names.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, asdict
from fractions import Fraction

from .backends import ChatBackend

ADJUDICATOR_PROMPT_TEMPLATE = (
    "You are a highly knowledgeable medical expert. Determine whether the Correct "
    "Answer appears within the LLMs response, fully or as a clear part of the "
    "explanation, even if the wording differs. Respond with 'Yes' if the Correct "
    "Answer can be found in the LLMs response; otherwise respond with 'No'.\n"
    "\n"
    "LLMs response:\n"
    "\n"
    "{llms_response}\n"
    "\n"
    "Correct Answer:\n"
    "\n"
    "{correct_answer}"
)


class AdjudicationError(Exception):
    """The judge's output was neither yes nor no."""


@dataclass(frozen=True)
class Verdict:
    question_id: str
    model_id: str
    strategy: str
    correct: bool
    method: str  # "llm" or "exact"

    def to_json(self) -> dict:
        return asdict(self)


def render_adjudicator_prompt(response: str, correct_answer: str) -> str:
    return ADJUDICATOR_PROMPT_TEMPLATE.format(
        llms_response=response, correct_answer=correct_answer
    )


def adjudicate_llm(response: str, correct_answer: str, judge: ChatBackend) -> bool:
    """Yes/No verdict from the judge backend; anything else is surfaced, not guessed."""
    prompt = render_adjudicator_prompt(response, correct_answer)
    raw = judge.chat(prompt).response
    word = raw.strip().strip(".,!:;\"'").lower()
    if word.startswith("yes"):
        return True
    if word.startswith("no"):
        return False
    raise AdjudicationError(f"unparseable judge output: {raw[:80]!r}")


def _letter_present(response: str, letter: str) -> bool:
    return (
        re.search(rf"(?<![A-Za-z0-9]){re.escape(letter)}(?![A-Za-z0-9])", response)
        is not None
    )


def _text_spans(response: str, text: str) -> list[tuple[int, int]]:
    spans = []
    if not text:
        return spans
    for m in re.finditer(re.escape(text), response, re.I):
        spans.append(m.span())
    return spans


def adjudicate_exact(
    response: str,
    correct_letter: str,
    correct_text: str,
    all_options: dict[str, str] | None = None,
) -> bool:
    """True iff the correct option appears as a standalone letter or as option text.

    Longer competing option texts shadow substring matches of the correct
    text: "oil cyst secondary to fat necrosis" in the response does not count
    as a match for a different option "fat necrosis".
    """
    if _letter_present(response, correct_letter.upper()):
        return True
    candidate_spans = _text_spans(response, correct_text)
    if not candidate_spans:
        return False
    shadow_spans: list[tuple[int, int]] = []
    for letter, text in (all_options or {}).items():
        if letter == correct_letter or len(text) <= len(correct_text):
            continue
        if correct_text.lower() in text.lower():
            shadow_spans.extend(_text_spans(response, text))
    for start, end in candidate_spans:
        if not any(s <= start and end <= e for s, e in shadow_spans):
            return True
    return False


def correct_answer_text(letter: str, option_text: str) -> str:
    """Judge-facing rendering of the reference answer: letter plus option text."""
    return f"{letter}: {option_text}"


def percent(count: int, total: int) -> int:
    """Integer percent with round-half-to-even, computed exactly."""
    if total <= 0:
        raise ValueError("total must be positive")
    return int(round(Fraction(100 * count, total)))


def accuracy(verdicts: list[Verdict]) -> tuple[float, int, int]:
    """(fraction, correct count, total) over verdicts of one (model, strategy)."""
    if not verdicts:
        raise ValueError("accuracy over an empty verdict list")
    keys = {(v.model_id, v.strategy) for v in verdicts}
    if len(keys) > 1:
        raise ValueError(f"verdicts mix (model, strategy) pairs: {sorted(keys)}")
    correct = sum(1 for v in verdicts if v.correct)
    total = len(verdicts)
    return correct / total, correct, total
