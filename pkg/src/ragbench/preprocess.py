"""Diagnostic abstraction: condense a question stem into retrieval keywords.

The summary guides retrieval only; it is never injected into any
answer-selection prompt.
"""

from __future__ import annotations

from dataclasses import dataclass

from .backends import ChatBackend
from .dataset import Question

KEYWORD_PROMPT_TEMPLATE = (
    "Extract and summarize the key clinical details from the following radiology "
    "question. Provide a concise, comma-separated summary of keywords and key "
    "phrases in one sentence only.\n"
    "Question: {question_text}.\n"
    "Summary:"
)


class KeywordExtractionError(Exception):
    """The summarizer returned no usable keyword phrases."""


@dataclass(frozen=True)
class KeywordSummary:
    question_id: str
    keywords: tuple[str, ...]
    raw: str


def render_keyword_prompt(stem: str) -> str:
    """Instantiate the keyword-summary template; the stem appears exactly once."""
    if not stem.strip():
        raise ValueError("cannot render keyword prompt for an empty stem")
    return KEYWORD_PROMPT_TEMPLATE.format(question_text=stem)


def parse_keywords(raw: str) -> list[str]:
    """Split on commas, trim, drop empties. Phrases with embedded commas over-split."""
    return [phrase.strip() for phrase in raw.split(",") if phrase.strip()]


def extract_keywords(question: Question, backend: ChatBackend) -> KeywordSummary:
    """Ask the summarizer backend for a comma-separated concept summary."""
    prompt = render_keyword_prompt(question.stem)
    exchange = backend.chat(prompt)
    keywords = parse_keywords(exchange.response)
    if not keywords:
        raise KeywordExtractionError(
            f"question {question.id}: summarizer produced zero keyword phrases"
        )
    return KeywordSummary(
        question_id=question.id,
        keywords=tuple(keywords),
        raw=exchange.response,
    )
