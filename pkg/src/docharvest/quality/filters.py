"""Subset selection over per-document (or per-page) metadata records."""
from __future__ import annotations

from dataclasses import dataclass, field, fields
from typing import Any, Callable

Record = dict[str, Any]


@dataclass(frozen=True)
class FilterSpec:
    min_perplexity: float | None = None
    max_perplexity: float | None = None
    min_reliability: float | None = None
    languages: tuple[str, ...] | None = None
    min_language_confidence: float | None = None
    min_entities: dict[str, int] = field(default_factory=dict)  # category name -> at least k

    @classmethod
    def from_dict(cls, raw: dict | None) -> "FilterSpec":
        raw = dict(raw or {})
        known = {f.name for f in fields(cls)}
        unknown = set(raw) - known
        if unknown:
            raise ValueError(f"unknown filter keys: {sorted(unknown)}")
        if raw.get("languages") is not None:
            raw["languages"] = tuple(raw["languages"])
        return cls(**raw)

    def predicates(self) -> list[tuple[str, Callable[[Record], bool]]]:
        """Active predicates in evaluation order; a record missing a field fails that predicate."""
        out: list[tuple[str, Callable[[Record], bool]]] = []

        def has(rec: Record, key: str) -> bool:
            return rec.get(key) is not None

        if self.min_perplexity is not None:
            lo = self.min_perplexity
            out.append(("min_perplexity", lambda r: has(r, "perplexity") and r["perplexity"] >= lo))
        if self.max_perplexity is not None:
            hi = self.max_perplexity
            out.append(("max_perplexity", lambda r: has(r, "perplexity") and r["perplexity"] <= hi))
        if self.min_reliability is not None:
            rmin = self.min_reliability
            out.append(("min_reliability", lambda r: has(r, "reliability") and r["reliability"] >= rmin))
        if self.languages is not None:
            allowed = frozenset(self.languages)
            out.append(("languages", lambda r: r.get("language") in allowed))
        if self.min_language_confidence is not None:
            cmin = self.min_language_confidence
            out.append(("min_language_confidence",
                        lambda r: has(r, "language_confidence") and r["language_confidence"] >= cmin))
        for cat, k in sorted(self.min_entities.items()):
            out.append((f"min_entities:{cat}",
                        lambda r, cat=cat, k=k: (r.get("entity_counts") or {}).get(cat, 0) >= k))
        return out


@dataclass
class FilterResult:
    accepted: list[Record]
    rejected_by: dict[str, int]  # first failing predicate -> count
    total: int

    def reconciles(self) -> bool:
        return len(self.accepted) + sum(self.rejected_by.values()) == self.total


def apply_filters(records: list[Record], spec: FilterSpec) -> FilterResult:
    preds = spec.predicates()
    rejected = {name: 0 for name, _ in preds}
    accepted = []
    for rec in records:
        failed = next((name for name, test in preds if not test(rec)), None)
        if failed is None:
            accepted.append(rec)
        else:
            rejected[failed] += 1
    return FilterResult(accepted, rejected, len(records))
