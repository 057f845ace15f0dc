"""Rank-order language identification over character n-gram profiles.

Each language is a ranked list of its most frequent character 1-3 grams. A text
is profiled the same way and scored against every language by summing, for each
of its n-grams, how far its rank is from the rank in the language profile
(n-grams missing from a profile cost the profile size).
"""
from __future__ import annotations

import enum
import re
import unicodedata
from collections import Counter
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Protocol

PROFILE_SIZE = 300
MAX_N = 3
MIN_CHARS = 20
UNDETERMINED = "und"

_non_letters = re.compile(r"[^\w\s]|[\d_]", re.UNICODE)


class Level(str, enum.Enum):
    Document = "Document"
    Page = "Page"


@dataclass(frozen=True)
class LanguageGuess:
    code: str
    confidence: float
    level: Level = Level.Document

    def to_dict(self) -> dict:
        return {"code": self.code, "confidence": self.confidence, "level": self.level.value}


def ngram_counts(text: str, max_n: int = MAX_N) -> Counter:
    text = unicodedata.normalize("NFC", text).lower()
    counts: Counter = Counter()
    for word in _non_letters.sub(" ", text).split():
        padded = f"_{word}_"
        for n in range(1, max_n + 1):
            for i in range(len(padded) - n + 1):
                gram = padded[i:i + n]
                if gram != "_":
                    counts[gram] += 1
    return counts


def build_profile(text: str, size: int = PROFILE_SIZE) -> list[str]:
    """Most frequent n-grams, ties broken alphabetically so profiles are reproducible."""
    counts = ngram_counts(text)
    return [g for g, _ in sorted(counts.items(), key=lambda kv: (-kv[1], kv[0]))[:size]]


def out_of_place(doc: list[str], ranks: dict[str, int], penalty: int) -> int:
    return sum(abs(i - ranks[g]) if g in ranks else penalty for i, g in enumerate(doc))


class Classifier(Protocol):
    def classify(self, text: str) -> tuple[str, float]:
        ...


class ProfileClassifier:
    def __init__(self, profiles: dict[str, list[str]], size: int = PROFILE_SIZE):
        if len(profiles) < 2:
            raise ValueError("need at least two language profiles")
        self.size = size
        self.profiles = {code: p[:size] for code, p in profiles.items()}
        self._ranks = {code: {g: i for i, g in enumerate(p)} for code, p in self.profiles.items()}

    @classmethod
    def from_texts(cls, texts: dict[str, str], size: int = PROFILE_SIZE) -> "ProfileClassifier":
        return cls({code: build_profile(t, size) for code, t in texts.items()}, size)

    @classmethod
    def from_directory(cls, path: Path) -> "ProfileClassifier":
        return cls({p.stem: read_profile(p) for p in sorted(Path(path).glob("*.profile"))})

    def distances(self, text: str) -> dict[str, int]:
        doc = build_profile(text, self.size)
        return {code: out_of_place(doc, ranks, self.size) for code, ranks in self._ranks.items()}

    def classify(self, text: str) -> tuple[str, float]:
        dist = self.distances(text)
        ranked = sorted(dist.items(), key=lambda kv: (kv[1], kv[0]))
        (best, d1), (_, d2), worst = ranked[0], ranked[1], ranked[-1][1]
        if worst == d1:
            return best, 0.0
        # margin to the runner-up, as a share of the spread across all profiles
        return best, (d2 - d1) / (worst - d1)


def write_profile(path: Path, profile: list[str]) -> None:
    # one n-gram per line in rank order; "_" marks word boundaries
    Path(path).write_text("\n".join(profile) + "\n", encoding="utf-8")


def read_profile(path: Path) -> list[str]:
    return [line for line in Path(path).read_text(encoding="utf-8").split("\n") if line]


_default: ProfileClassifier | None = None


def default_classifier() -> ProfileClassifier:
    """Profiles shipped in docharvest/data/langid."""
    global _default
    if _default is None:
        root = resources.files("docharvest") / "data" / "langid"
        profiles = {}
        for entry in root.iterdir():
            if entry.name.endswith(".profile"):
                profiles[entry.name[:-len(".profile")]] = [g for g in entry.read_text("utf-8").split("\n") if g]
        _default = ProfileClassifier(profiles)
    return _default


def identify_language(text: str, classifier: Classifier | None = None,
                      level: Level = Level.Document) -> LanguageGuess:
    if len(text.strip()) < MIN_CHARS:
        return LanguageGuess(UNDETERMINED, 0.0, level)
    code, confidence = (classifier or default_classifier()).classify(text)
    return LanguageGuess(code, round(confidence, 6), level)


def training_text(code: str) -> str:
    """The bundled sample text a language profile was built from."""
    return (resources.files("docharvest") / "data" / "langid" / f"{code}.txt").read_text("utf-8")


def rebuild_profiles(directory: Path) -> list[str]:
    """Regenerate <code>.profile from every <code>.txt in a directory."""
    written = []
    for src in sorted(Path(directory).glob("*.txt")):
        write_profile(src.with_suffix(".profile"), build_profile(src.read_text(encoding="utf-8")))
        written.append(src.stem)
    return written


if __name__ == "__main__":
    import sys

    print(" ".join(rebuild_profiles(Path(sys.argv[1]))))
