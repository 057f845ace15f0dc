"""Classifier passes, applied in strict precedence order."""
from __future__ import annotations

import logging
import re
from collections import Counter

from lxml import etree

from .model import ClassProvenance as P
from .model import DocElement, ElementKind, SemanticCategory as C
from .parse import (
    ParsedDocument,
    has_display_math,
    has_legacy_form_field,
    has_inline_form_sdt,
    has_numbering,
    paragraph_style_id,
)
from .container import W
from .styles import CAPTION_NAME, NEUTRAL_NAMES, StyleRegistry, normalize_name, on_off

logger = logging.getLogger(__name__)

HEADING_MAX_CHARS = 200
UNDERSCORE_RUN = 8
BULLETS = "•◦▪–-*·"
_UNDERSCORES = re.compile("_{%d,}" % UNDERSCORE_RUN)

Assignment = tuple[C, P]


def classify_builtin(node: etree._Element, registry: StyleRegistry, *,
                     adjacent_table: bool = False) -> Assignment | None:
    """Category from the paragraph's built-in style, if any."""
    if node.tag != W + "p":
        return None
    cat, matched = registry.builtin_category(paragraph_style_id(node))
    if matched == CAPTION_NAME:
        return (C.TableCaption, P.BuiltinStyle) if adjacent_table else None
    if cat is None:
        return None
    return cat, P.BuiltinStyle


def classify_xmltag(element: DocElement, node: etree._Element) -> Assignment | None:
    kind = element.kind
    fixed = {
        ElementKind.table: C.Table,
        ElementKind.header_row: C.TableHeader,
        ElementKind.figure: C.Figure,
        ElementKind.header: C.Header,
        ElementKind.footer: C.Footer,
        ElementKind.toc_block: C.TableOfContents,
        ElementKind.form_block: C.FormTag,
        ElementKind.textbox: C.PlainText,
    }
    if kind in fixed:
        return fixed[kind], P.XmlTag
    if kind == ElementKind.cell:
        # header-row cells hang off the header row element rather than the table
        return (C.TableHeaderCell if _under_header_row(element, node) else C.TableCell), P.XmlTag
    if kind == ElementKind.paragraph:
        if has_display_math(node):
            return C.Equation, P.XmlTag
        if has_legacy_form_field(node):
            return C.FormField, P.XmlTag
        if has_inline_form_sdt(node):
            return C.FormTag, P.XmlTag
    return None


def _under_header_row(element: DocElement, node: etree._Element) -> bool:
    tr = node.getparent()
    while tr is not None and tr.tag != W + "tr":
        tr = tr.getparent()
    return tr is not None and bool(on_off(tr.find(f"{W}trPr/{W}tblHeader")))


def classify_style_match(unclassified: list[DocElement], classified: list[DocElement]) -> dict[int, Assignment]:
    """Give unstyled look-alikes the category of built-in styled elements."""
    refs: dict = {}
    for el in classified:
        # table captions are positional, so their look says nothing on its own
        if el.provenance != P.BuiltinStyle or el.category == C.TableCaption:
            continue
        per_cat = refs.setdefault(el.styling, {})
        count, first = per_cat.get(el.category, (0, el.element_id))
        per_cat[el.category] = (count + 1, min(first, el.element_id))
    out = {}
    for el in unclassified:
        if not el.text.strip():
            continue
        per_cat = refs.get(el.styling)
        if not per_cat:
            continue
        cat = min(per_cat, key=lambda c: (-per_cat[c][0], per_cat[c][1]))
        out[el.element_id] = (cat, P.HeuristicStyleMatch)
    return out


def is_list_text(text: str) -> bool:
    breaks = [i for i, ch in enumerate(text) if ch == "\n"]
    if not breaks:
        return False
    for i in breaks:
        nxt = text[i + 1: i + 2]
        if not nxt or not (nxt.isdigit() or nxt in BULLETS):
            return False
    return True


def is_form_text(text: str) -> bool:
    if not _UNDERSCORES.search(text):
        return False
    other = sum(1 for ch in text if ch != "_")
    return other < 0.5 * len(text)


def classify_content(element: DocElement, node: etree._Element | None = None) -> Assignment | None:
    text = element.text
    if node is not None and has_numbering(node):
        return C.ListItem, P.HeuristicContent
    if is_list_text(text):
        return C.ListItem, P.HeuristicContent
    if is_form_text(text):
        return C.FormField, P.HeuristicContent
    return None


def modal_size(elements: list[DocElement]) -> int | None:
    """Font size carrying the most characters; ties go to the smaller size."""
    weight: Counter = Counter()
    for el in elements:
        if el.text.strip():
            weight[el.styling.font_size] += len(el.text)
    if not weight:
        return None
    return min(weight, key=lambda s: (-weight[s], s))


def classify_font_rank(remaining: list[DocElement], everything: list[DocElement] | None = None) -> dict[int, Assignment]:
    """Rank leftover elements by font size relative to the modal size.

    The mode is taken over all text-bearing paragraphs in `everything`
    (defaults to `remaining`).
    """
    population = [e for e in (everything if everything is not None else remaining)
                  if e.kind in (ElementKind.paragraph, ElementKind.textbox)]
    mode = modal_size(population)
    out: dict[int, Assignment] = {}
    texted = [e for e in remaining if e.text.strip()]
    if mode is None:
        return {e.element_id: (C.PlainText, P.FallbackPlainText) for e in remaining}

    sizes = sorted({e.styling.font_size for e in texted if e.styling.font_size > mode}, reverse=True)
    title_id = None
    if sizes:
        top = [e for e in texted if e.styling.font_size == sizes[0]]
        all_top = [e for e in population if e.text.strip() and e.styling.font_size >= sizes[0]]
        sig_count = Counter(e.styling for e in population if e.text.strip())
        if (len(top) == 1 and len(all_top) == 1 and sig_count[top[0].styling] == 1
                and len(top[0].text) <= HEADING_MAX_CHARS):
            title_id = top[0].element_id
            sizes = sizes[1:]
    levels = {s: C.heading(i + 1) for i, s in enumerate(sizes[:9])}

    for el in remaining:
        size = el.styling.font_size
        if not el.text.strip():
            out[el.element_id] = (C.PlainText, P.FallbackPlainText)
        elif el.element_id == title_id:
            out[el.element_id] = (C.Title, P.HeuristicFontRank)
        elif size in levels:
            if len(el.text) > HEADING_MAX_CHARS:
                out[el.element_id] = (C.PlainText, P.FallbackPlainText)
            else:
                out[el.element_id] = (levels[size], P.HeuristicFontRank)
        elif size <= mode:
            out[el.element_id] = (C.PlainText, P.HeuristicFontRank)
        else:
            out[el.element_id] = (C.PlainText, P.FallbackPlainText)
    return out


def classify_document(parsed: ParsedDocument) -> ParsedDocument:
    """Run every pass; afterwards each element has exactly one category."""
    model, nodes, registry = parsed.model, parsed.nodes, parsed.registry
    elements = model.elements
    unmapped: set[str] = set()

    for el in elements:
        if el.kind not in (ElementKind.paragraph, ElementKind.textbox):
            continue
        node = nodes[el.element_id]
        hit = classify_builtin(node, registry, adjacent_table=el.element_id in parsed.table_adjacent)
        if hit:
            el.assign(*hit)
        else:
            name = registry.name(paragraph_style_id(node))
            if name and normalize_name(name) not in NEUTRAL_NAMES and normalize_name(name) != CAPTION_NAME:
                unmapped.add(name)

    for el in elements:
        if el.category is None:
            hit = classify_xmltag(el, nodes[el.element_id])
            if hit:
                el.assign(*hit)

    pending = [e for e in elements if e.category is None]
    for eid, hit in classify_style_match(pending, [e for e in elements if e.category is not None]).items():
        elements[eid].assign(*hit)

    for el in elements:
        if el.category is None:
            hit = classify_content(el, nodes[el.element_id])
            if hit:
                el.assign(*hit)

    pending = [e for e in elements if e.category is None]
    for eid, hit in classify_font_rank(pending, elements).items():
        elements[eid].assign(*hit)

    model.unmapped_styles = sorted(unmapped)
    if unmapped:
        logger.debug("unmapped styles: %s", ", ".join(sorted(unmapped)))
    return parsed
