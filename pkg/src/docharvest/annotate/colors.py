from __future__ import annotations

import itertools
from dataclasses import dataclass

from ..docx.model import SemanticCategory

LEVELS = (0, 85, 170, 255)
TOLERANCE = 8

RGB = tuple[int, int, int]


def _palette(n: int) -> list[RGB]:
    """n non-gray colors from a 4-level cube, spread by greedy farthest-point selection."""
    pool = [c for c in itertools.product(LEVELS, repeat=3) if len(set(c)) > 1]
    chosen = [(255, 0, 0)]
    pool.remove(chosen[0])
    while len(chosen) < n:
        best = max(pool, key=lambda c: (min(sum((a - b) ** 2 for a, b in zip(c, d)) for d in chosen), c))
        chosen.append(best)
        pool.remove(best)
    return chosen


@dataclass(frozen=True)
class ColorMap:
    colors: dict

    @classmethod
    def default(cls) -> "ColorMap":
        cats = list(SemanticCategory)
        return cls(dict(zip(cats, _palette(len(cats)))))

    @classmethod
    def from_overrides(cls, overrides: dict[str, list[int]] | None) -> "ColorMap":
        base = dict(cls.default().colors)
        for name, rgb in (overrides or {}).items():
            base[SemanticCategory(name)] = tuple(int(v) for v in rgb)
        cmap = cls(base)
        cmap.validate()
        return cmap

    def validate(self, tolerance: int = TOLERANCE) -> None:
        values = list(self.colors.values())
        if len(set(values)) != len(values):
            raise ValueError("color map is not injective")
        for a, b in itertools.combinations(values, 2):
            if max(abs(x - y) for x, y in zip(a, b)) < 4 * tolerance:
                raise ValueError(f"colors {a} and {b} are closer than {4 * tolerance}")
        for c in values:
            if max(c) - min(c) <= 2 * tolerance:
                raise ValueError(f"color {c} is too close to gray")

    def __getitem__(self, cat: SemanticCategory) -> RGB:
        return self.colors[cat]

    def hex(self, cat: SemanticCategory) -> str:
        return "%02X%02X%02X" % self.colors[cat]

    def lookup(self, rgb, tolerance: int = TOLERANCE) -> SemanticCategory | None:
        for cat, c in self.colors.items():
            if all(abs(int(a) - b) <= tolerance for a, b in zip(rgb, c)):
                return cat
        return None
