"""Seeded synthetic documents with a mix of element kinds."""
from __future__ import annotations

import random

from .docxgen import DocxBuilder

WORDS = (
    "the of and to in is that for it as was with be by on not he this are or his from at which "
    "but have an they you were her she there been one all we their has would when if so no will "
    "report table market water system county river school office council plan study results data "
    "annual budget members project health service public local growth value total during between "
    "figure section review meeting committee program students policy research energy design model"
).split()


def sentence(rng: random.Random, n_words: int) -> str:
    words = [rng.choice(WORDS) for _ in range(n_words)]
    words[0] = words[0].capitalize()
    return " ".join(words) + "."


def prose(rng: random.Random, n_sentences: int) -> str:
    return " ".join(sentence(rng, rng.randint(6, 14)) for _ in range(n_sentences))


def synthetic_document(seed: int, max_blocks: int = 9) -> bytes:
    """A one-to-two page document drawn from headings, prose, tables, figures and friends."""
    rng = random.Random(seed)
    b = DocxBuilder()
    if rng.random() < 0.5:
        b.header(f"Quarterly bulletin {seed}")
    if rng.random() < 0.5:
        b.footer(f"Page footer {seed}")
    b.paragraph(sentence(rng, 4).rstrip("."), "Title")
    b.paragraph(prose(rng, 3))
    for _ in range(rng.randint(3, max_blocks)):
        kind = rng.choice(["heading", "prose", "prose", "table", "image", "list", "quote", "textbox",
                           "equation", "toc"])
        if kind == "heading":
            b.paragraph(sentence(rng, 3).rstrip("."), f"Heading{rng.randint(1, 3)}")
        elif kind == "prose":
            b.paragraph(prose(rng, rng.randint(1, 3)))
        elif kind == "table":
            n_rows, n_cols = rng.randint(2, 4), rng.randint(2, 4)
            rows: list[list] = [[rng.choice(WORDS) for _ in range(n_cols)] for _ in range(n_rows)]
            if n_rows >= 3 and rng.random() < 0.5:
                rows[1][0] = {"text": rng.choice(WORDS), "vmerge": "restart"}
                rows[2][0] = {"vmerge": "continue"}
            b.table(rows, header_rows=rng.randint(0, 1), widths=[rng.randint(1200, 2400)] * n_cols)
        elif kind == "image":
            b.image(rng.randint(60, 240), rng.randint(40, 160),
                    color=tuple(rng.randint(0, 255) for _ in range(3)), fmt=rng.choice(["png", "jpeg"]))
        elif kind == "list":
            for _ in range(rng.randint(2, 3)):
                b.paragraph(sentence(rng, rng.randint(3, 8)), "ListParagraph", num=True)
        elif kind == "quote":
            b.paragraph(sentence(rng, 10), "Quote")
        elif kind == "textbox":
            b.textbox(sentence(rng, 3), width_px=rng.randint(150, 300), height_px=rng.randint(40, 80))
        elif kind == "equation":
            b.equation("x = a + b")
        elif kind == "toc":
            b.toc([sentence(rng, 3) for _ in range(rng.randint(2, 3))])
    return b.build()
