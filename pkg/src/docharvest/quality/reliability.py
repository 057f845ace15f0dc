"""How much of a document's annotation rests on built-in styles and XML tags."""
from __future__ import annotations

from dataclasses import dataclass, field

from ..docx.model import DocumentModel, SemanticCategory

ALWAYS_RELIABLE = frozenset({SemanticCategory.Table, SemanticCategory.Figure})


class NoEntities(ValueError):
    """The document has no classified entities, so R is undefined."""


@dataclass
class CategoryCounts:
    entities: int = 0
    reliable_chars: int = 0   # b: characters in BuiltinStyle / XmlTag entities
    heuristic_chars: int = 0  # h: characters in everything else


@dataclass
class ReliabilityInput:
    categories: dict[SemanticCategory, CategoryCounts] = field(default_factory=dict)

    def add(self, category: SemanticCategory, chars: int, reliable: bool) -> None:
        counts = self.categories.setdefault(category, CategoryCounts())
        counts.entities += 1
        if reliable:
            counts.reliable_chars += chars
        else:
            counts.heuristic_chars += chars

    @classmethod
    def from_model(cls, model: DocumentModel) -> "ReliabilityInput":
        out = cls()
        for e in model.elements:
            if e.category is None or e.provenance is None:
                continue
            out.add(e.category, e.char_count, e.provenance.reliable)
        return out


def category_ratio(category: SemanticCategory, counts: CategoryCounts, zero_text: str = "table_figure") -> float:
    """r_i for one category.

    zero_text picks the rule for categories without characters: "table_figure" pins
    Table and Figure to 1 and treats any other empty category as fully reliable too;
    "empty_only" applies only the empty-category rule, so a Table with heuristic text
    is scored by its characters like everything else.
    """
    total = counts.reliable_chars + counts.heuristic_chars
    if zero_text == "table_figure" and category in ALWAYS_RELIABLE:
        return 1.0
    if zero_text not in ("table_figure", "empty_only"):
        raise ValueError(f"unknown zero_text rule {zero_text!r}")
    if total == 0:
        return 1.0
    return counts.reliable_chars / total


def reliability_score(data: ReliabilityInput, weight_by: str = "entities", zero_text: str = "table_figure") -> float:
    used = {cat: c for cat, c in data.categories.items() if c.entities > 0}
    if weight_by == "entities":
        weights = {cat: float(c.entities) for cat, c in used.items()}
    elif weight_by == "characters":
        weights = {cat: float(c.reliable_chars + c.heuristic_chars) for cat, c in used.items()}
    else:
        raise ValueError(f"unknown weight_by {weight_by!r}")
    total = sum(weights.values())
    if not used:
        raise NoEntities("no entities to score")
    if total == 0:  # character weighting on a document without any text
        weights = {cat: float(c.entities) for cat, c in used.items()}
        total = sum(weights.values())
    score = sum(weights[cat] / total * category_ratio(cat, c, zero_text) for cat, c in used.items())
    return min(1.0, max(0.0, score))
