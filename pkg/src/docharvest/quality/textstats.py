from __future__ import annotations

import unicodedata
from dataclasses import asdict, dataclass


@dataclass(frozen=True)
class TextStats:
    char_count: int = 0
    word_count: int = 0
    alpha_chars: int = 0
    numeric_chars: int = 0
    alnum_proportion: float = 0.0
    alpha_to_numeric_ratio: float | None = None  # None when there are no digits

    def to_dict(self) -> dict:
        return asdict(self)


def strip_punctuation(token: str) -> str:
    return "".join(ch for ch in token if not unicodedata.category(ch).startswith("P"))


def words(text: str) -> list[str]:
    """Whitespace-delimited tokens with Unicode punctuation removed; empty leftovers dropped."""
    out = []
    for token in text.split():
        token = strip_punctuation(token)
        if token:
            out.append(token)
    return out


def text_stats(text: str) -> TextStats:
    if not text:
        return TextStats()
    alpha = sum(ch.isalpha() for ch in text)
    numeric = sum(ch.isnumeric() for ch in text)
    return TextStats(
        char_count=len(text),
        word_count=len(words(text)),
        alpha_chars=alpha,
        numeric_chars=numeric,
        alnum_proportion=(alpha + numeric) / len(text),
        alpha_to_numeric_ratio=alpha / numeric if numeric else None,
    )
