"""Per-document quality metadata: text statistics, language, perplexity and annotation reliability."""
from __future__ import annotations

from collections import Counter

from ..docx.model import DocumentModel
from .filters import FilterResult, FilterSpec, apply_filters
from .kn import CorpusTooSmall, KneserNeyModel, perplexity, train_kn, whitespace_tokenizer
from .langid import (
    LanguageGuess,
    Level,
    ProfileClassifier,
    default_classifier,
    identify_language,
    training_text,
)
from .reliability import NoEntities, ReliabilityInput, reliability_score
from .textstats import TextStats, text_stats


class LanguageModels:
    """Lazily trained per-language n-gram models over the bundled sample texts."""

    def __init__(self, order: int = 5, tokenizer=whitespace_tokenizer, texts: dict[str, str] | None = None):
        self.order = order
        self.tokenizer = tokenizer
        self.texts = texts
        self._models: dict[str, KneserNeyModel | None] = {}

    def get(self, code: str) -> KneserNeyModel | None:
        if code not in self._models:
            try:
                text = self.texts[code] if self.texts is not None else training_text(code)
            except (KeyError, FileNotFoundError):
                text = None
            try:
                self._models[code] = train_kn(self.tokenizer(text), self.order) if text else None
            except CorpusTooSmall:
                self._models[code] = None
        return self._models[code]

    def perplexity(self, code: str, text: str) -> float | None:
        model = self.get(code)
        tokens = self.tokenizer(text)
        if model is None or not tokens:
            return None
        return perplexity(model, tokens)


def compute_metadata(model: DocumentModel, doc_text: str, page_texts: list[str],
                     lms: LanguageModels | None = None, classifier=None,
                     weight_by: str = "entities", zero_text: str = "table_figure") -> dict:
    """The quality record stored next to a document's annotations."""
    lms = lms or LanguageModels()
    doc_lang = identify_language(doc_text, classifier, Level.Document)
    pages = [identify_language(t, classifier, Level.Page) for t in page_texts]
    try:
        reliability = reliability_score(ReliabilityInput.from_model(model), weight_by, zero_text)
    except NoEntities:
        reliability = None
    entity_counts = Counter(e.category.value for e in model.elements if e.category is not None)
    return {
        "text_stats": text_stats(doc_text).to_dict(),
        "language": doc_lang.code,
        "language_confidence": doc_lang.confidence,
        "page_languages": [g.to_dict() for g in pages],
        "perplexity": lms.perplexity(doc_lang.code, doc_text),
        "reliability": reliability,
        "entity_counts": dict(sorted(entity_counts.items())),
    }


__all__ = [
    "CorpusTooSmall", "FilterResult", "FilterSpec", "KneserNeyModel", "LanguageGuess", "LanguageModels",
    "Level", "NoEntities", "ProfileClassifier", "ReliabilityInput", "TextStats", "apply_filters",
    "compute_metadata", "default_classifier", "identify_language", "perplexity", "reliability_score",
    "text_stats", "train_kn", "whitespace_tokenizer",
]
