"""Interpolated Kneser-Ney n-gram model with one absolute discount per order.

The top order uses raw counts; every lower order uses continuation counts (the
number of distinct words seen before the n-gram). The unigram level interpolates
with a uniform distribution over the vocabulary plus an unknown token, so words
never seen in training still get probability mass.
"""
from __future__ import annotations

import math
from collections import Counter, defaultdict
from dataclasses import dataclass, field
from typing import Callable, Iterable

BOS = "<s>"
UNK = "<unk>"
FALLBACK_DISCOUNT = 0.5

Tokenizer = Callable[[str], list[str]]


class CorpusTooSmall(ValueError):
    pass


def whitespace_tokenizer(text: str) -> list[str]:
    return text.lower().split()


def discount(n1: int, n2: int) -> float:
    """D = n1 / (n1 + 2 n2); falls back when there are no singletons to estimate from."""
    if n1 == 0:
        return FALLBACK_DISCOUNT
    return n1 / (n1 + 2 * n2)


@dataclass
class _Order:
    counts: dict[tuple, int] = field(default_factory=dict)  # raw at the top order, continuation below
    context_total: dict[tuple, int] = field(default_factory=dict)
    context_types: dict[tuple, int] = field(default_factory=dict)
    discount: float = FALLBACK_DISCOUNT

    def finish(self) -> None:
        total: dict[tuple, int] = defaultdict(int)
        types: dict[tuple, int] = defaultdict(int)
        for gram, c in self.counts.items():
            total[gram[:-1]] += c
            types[gram[:-1]] += 1
        self.context_total, self.context_types = dict(total), dict(types)
        coc = Counter(self.counts.values())
        self.discount = discount(coc.get(1, 0), coc.get(2, 0))


class KneserNeyModel:
    def __init__(self, order: int, vocab: Iterable[str], levels: list[_Order], raw: dict[tuple, int]):
        self.order = order
        self.vocab = frozenset(vocab) | {UNK}
        self.levels = levels  # levels[k - 1] holds order k
        self.raw = raw  # raw n-gram counts of every order, kept for serialization

    @property
    def discounts(self) -> list[float]:
        return [lvl.discount for lvl in self.levels]

    def _map(self, token: str) -> str:
        return token if token in self.vocab or token == BOS else UNK

    def prob(self, word: str, context: tuple[str, ...] = ()) -> float:
        word = self._map(word)
        context = tuple(self._map(t) for t in context)[-(self.order - 1):] if self.order > 1 else ()
        return self._prob(word, context)

    def _prob(self, word: str, context: tuple[str, ...]) -> float:
        k = len(context) + 1
        lvl = self.levels[k - 1]
        if k == 1:
            lower = 1.0 / len(self.vocab)
        else:
            lower = self._prob(word, context[1:])
        total = lvl.context_total.get(context, 0)
        if total == 0:
            return lower
        c = lvl.counts.get(context + (word,), 0)
        d = lvl.discount
        return max(c - d, 0.0) / total + d * lvl.context_types[context] / total * lower

    def distribution(self, context: tuple[str, ...]) -> dict[str, float]:
        return {w: self.prob(w, context) for w in sorted(self.vocab)}

    def logprob(self, tokens: list[str]) -> float:
        history = [BOS] * (self.order - 1)
        total = 0.0
        for tok in tokens:
            ctx = tuple(history[len(history) - (self.order - 1):]) if self.order > 1 else ()
            total += math.log(self.prob(tok, ctx))
            history.append(self._map(tok))
        return total

    # serialization ----------------------------------------------------------

    def to_text(self) -> str:
        """Sorted, diffable: a header, then `order<TAB>n-gram<TAB>count<TAB>continuation` lines."""
        lines = [f"order\t{self.order}", "discounts\t" + " ".join(repr(d) for d in self.discounts),
                 "vocab\t" + " ".join(sorted(self.vocab - {UNK}))]
        for gram in sorted(self.raw, key=lambda g: (len(g), g)):
            k = len(gram)
            cont = self.levels[k - 1].counts.get(gram, 0) if k < self.order else self.raw[gram]
            lines.append(f"{k}\t{' '.join(gram)}\t{self.raw[gram]}\t{cont}")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "KneserNeyModel":
        rows = text.rstrip("\n").split("\n")
        order = int(rows[0].split("\t")[1])
        vocab = rows[2].split("\t")[1].split()
        raw: dict[tuple, int] = {}
        levels = [_Order() for _ in range(order)]
        for row in rows[3:]:
            k, gram, count, cont = row.split("\t")
            g = tuple(gram.split(" "))
            raw[g] = int(count)
            if int(cont):
                levels[int(k) - 1].counts[g] = int(cont)
        for lvl in levels:
            lvl.finish()
        return cls(order, vocab, levels, raw)


def train_kn(tokens: list[str], order: int = 5) -> KneserNeyModel:
    if order < 1:
        raise ValueError("order must be at least 1")
    if len(tokens) < order:
        raise CorpusTooSmall(f"{len(tokens)} tokens, need at least {order}")
    seq = [BOS] * (order - 1) + list(tokens)
    raw: dict[tuple, int] = Counter()
    for k in range(1, order + 1):
        for i in range(len(seq) - k + 1):
            gram = tuple(seq[i:i + k])
            if gram[-1] == BOS:  # padding is only ever context
                continue
            raw[gram] += 1
    levels = [_Order() for _ in range(order)]
    levels[-1].counts = {g: c for g, c in raw.items() if len(g) == order}
    for k in range(1, order):
        # continuation count of a k-gram: distinct words seen right before it
        left: dict[tuple, set] = defaultdict(set)
        for g in raw:
            if len(g) == k + 1:
                left[g[1:]].add(g[0])
        levels[k - 1].counts = {g: len(s) for g, s in left.items()}
    for lvl in levels:
        lvl.finish()
    return KneserNeyModel(order, set(tokens), levels, dict(raw))


def perplexity(model: KneserNeyModel, tokens: list[str]) -> float:
    if not tokens:
        raise ValueError("cannot score an empty token sequence")
    return math.exp(-model.logprob(tokens) / len(tokens))
