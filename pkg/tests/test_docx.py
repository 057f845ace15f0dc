import io
import json
import zipfile
import xml.etree.ElementTree as ET

import pytest
from hypothesis import HealthCheck, given, settings
from hypothesis import strategies as st

from docharvest.docx import (
    ClassProvenance,
    DocumentModel,
    InvalidZip,
    OversizeImage,
    SemanticCategory as C,
    ZipBomb,
    classify_content,
    classify_font_rank,
    open_container,
    parse_container,
    parse_document,
    parse_tables,
)
from docharvest.docx.model import DocElement, ElementKind, StyleSignature
from docharvest.docx.parse import paragraph_style_id
from support.docxgen import DocxBuilder, png_header, zip_with_ratio

P = ClassProvenance


def _by_text(parsed, text):
    return next(e for e in parsed.model.elements if e.text == text)


# container screening -------------------------------------------------------

def test_open_normal_container():
    c = open_container(DocxBuilder().paragraph("hello").build())
    assert c.has("word/document.xml")


def test_zip_bomb_spec_example():
    # 1KB compressed file declaring 25KB uncompressed
    data = zip_with_ratio(25.0, target_size=1024)
    with pytest.raises(ZipBomb):
        open_container(data)


@pytest.mark.parametrize("ratio,bomb", [(20.01, True), (19.9, False)])
def test_zip_bomb_boundary(ratio, bomb):
    data = zip_with_ratio(ratio, target_size=4096)
    declared = sum(i.file_size for i in zipfile.ZipFile(io.BytesIO(data)).infolist())
    assert (declared > 20 * len(data)) == bomb
    if bomb:
        with pytest.raises(ZipBomb):
            open_container(data)
    else:
        open_container(data)


def _with_image(head: bytes) -> bytes:
    b = DocxBuilder().paragraph("x")
    b.extra_parts["word/media/big.png"] = head
    return b.build()


def test_oversize_image_from_header_only():
    with pytest.raises(OversizeImage):
        open_container(_with_image(png_header(5000, 5000)))


def test_image_at_pixel_limit_is_accepted():
    open_container(_with_image(png_header(4000, 5600)))  # exactly 22.4M
    with pytest.raises(OversizeImage):
        open_container(_with_image(png_header(4001, 5600)))


@pytest.mark.parametrize("data", [b"", b"not a zip", b"PK\x03\x04broken"])
def test_invalid_zip(data):
    with pytest.raises(InvalidZip):
        open_container(data)


def test_zip_without_document_part_is_invalid():
    buf = io.BytesIO()
    with zipfile.ZipFile(buf, "w") as zf:
        zf.writestr("hello.txt", "x")
    with pytest.raises(InvalidZip):
        open_container(buf.getvalue())


# built-in styles and XML tags ---------------------------------------------

def test_builtin_heading_and_custom_style():
    b = DocxBuilder(custom_styles={"MyBody": ("MyBody", None, False)})
    b.paragraph("Sec", style="Heading2").paragraph("custom", style="MyBody")
    doc = parse_document(b.build())
    assert (_by_text(doc, "Sec").category, _by_text(doc, "Sec").provenance) == (C.Heading2, P.BuiltinStyle)
    assert _by_text(doc, "custom").provenance != P.BuiltinStyle
    assert "MyBody" in doc.model.unmapped_styles


def test_builtin_resolved_through_based_on_chain_and_localized_ids():
    b = DocxBuilder(custom_styles={
        "berschrift1": ("heading 1", 34, True),
        "MyHeading": ("My Heading", None, False, "berschrift1"),
    })
    b.paragraph("loc", style="berschrift1").paragraph("derived", style="MyHeading")
    doc = parse_document(b.build())
    assert _by_text(doc, "loc").category == C.Heading1
    assert _by_text(doc, "derived").category == C.Heading1
    assert _by_text(doc, "derived").styling.font_size == 34


def test_caption_next_to_table_is_table_caption():
    b = DocxBuilder()
    b.paragraph("Table 1: numbers", style="Caption").table([["a", "b"]])
    b.paragraph("filler text " * 5).paragraph("Figure 2: a picture", style="Caption")
    doc = parse_document(b.build())
    cap = _by_text(doc, "Table 1: numbers")
    assert (cap.category, cap.provenance) == (C.TableCaption, P.BuiltinStyle)
    assert _by_text(doc, "Figure 2: a picture").category != C.TableCaption


def test_xmltag_table_textbox_figure():
    b = DocxBuilder().table([["x"]]).textbox("boxed words").image(30, 20)
    doc = parse_document(b.build())
    cats = {(e.kind, e.category, e.provenance) for e in doc.model.elements}
    assert (ElementKind.table, C.Table, P.XmlTag) in cats
    assert (ElementKind.textbox, C.PlainText, P.XmlTag) in cats
    assert (ElementKind.figure, C.Figure, P.XmlTag) in cats
    assert (ElementKind.cell, C.TableCell, P.XmlTag) in cats


def test_xmltag_other_native_structures():
    b = (DocxBuilder().table([["H"], ["v"]], header_rows=1).toc(["Intro", "Methods"])
         .form_block("enter here").legacy_form("Age:").inline_form("Name:", "x").equation("a+b")
         .header("running head").footer("page"))
    doc = parse_document(b.build())
    got = [(e.category, e.provenance) for e in doc.model.elements]
    for cat in (C.TableHeader, C.TableHeaderCell, C.TableCell, C.TableOfContents, C.FormTag,
                C.FormField, C.Equation, C.Header, C.Footer):
        assert (cat, P.XmlTag) in got, cat
    # header/footer come after the body
    assert [e.kind for e in doc.model.elements[-2:]] == [ElementKind.header, ElementKind.footer]


# heuristics ----------------------------------------------------------------

def test_style_match_copy_pasted_heading():
    b = DocxBuilder()
    b.paragraph("Real", style="Heading1").paragraph("body " * 30)
    b.paragraph("Pasted", size=34, bold=True)  # Heading1 look without the style
    doc = parse_document(b.build())
    el = _by_text(doc, "Pasted")
    assert (el.category, el.provenance) == (C.Heading1, P.HeuristicStyleMatch)


def test_style_match_tie_break_most_frequent():
    # Quote styled to look exactly like Heading1
    b = DocxBuilder(custom_styles={"Quote": ("Quote", 34, True)})
    b.paragraph("q", style="Quote")
    for i in range(3):
        b.paragraph(f"h{i}", style="Heading1")
    b.paragraph("look-alike", size=34, bold=True)
    assert _by_text(parse_document(b.build()), "look-alike").category == C.Heading1


def test_style_match_tie_break_earliest_on_equal_counts():
    b = DocxBuilder(custom_styles={"Quote": ("Quote", 34, True)})
    b.paragraph("q", style="Quote").paragraph("h", style="Heading1")
    b.paragraph("look-alike", size=34, bold=True)
    assert _by_text(parse_document(b.build()), "look-alike").category == C.Quote


def test_style_match_no_signature_leaves_unassigned_for_later_passes():
    b = DocxBuilder().paragraph("Real", style="Heading1").paragraph("other look", size=30, italic=True)
    assert _by_text(parse_document(b.build()), "other look").provenance != P.HeuristicStyleMatch


def _el(text, size=24, kind=ElementKind.paragraph, eid=0, **kw):
    return DocElement(eid, kind, text, StyleSignature(size, **kw), f"x:{eid}")


@pytest.mark.parametrize("text,expected", [
    ("1. a\n2. b\n3. c", C.ListItem),
    ("• one\n• two", C.ListItem),
    ("Name: ________", C.FormField),
    ("plain sentence", None),
    ("line one\nline two", None),
    ("1. only one item", None),
    ("Sign here: ________ and write a long explanation next to it", None),
])
def test_content_heuristics(text, expected):
    hit = classify_content(_el(text))
    assert (hit[0] if hit else None) == expected
    if hit:
        assert hit[1] == P.HeuristicContent


def test_numbered_paragraph_is_list_item():
    doc = parse_document(DocxBuilder().paragraph("item", num=True).build())
    assert (_by_text(doc, "item").category, _by_text(doc, "item").provenance) == (C.ListItem, P.HeuristicContent)


def test_font_rank_paper_example():
    b = DocxBuilder(default_size=24)
    b.paragraph("Chapter", size=40).paragraph("Chapter again", size=40)
    b.paragraph("Section", size=32).paragraph("Section again", size=32)
    for i in range(4):
        b.paragraph(f"Ordinary body paragraph number {i} with enough words.", size=24)
    doc = parse_document(b.build())
    assert _by_text(doc, "Chapter").category == C.Heading1
    assert _by_text(doc, "Section again").category == C.Heading2
    body = [e for e in doc.model.elements if e.text.startswith("Ordinary")]
    assert {(e.category, e.provenance) for e in body} == {(C.PlainText, P.HeuristicFontRank)}


def test_font_rank_uniform_size_all_plain():
    els = [_el(f"text {i}", size=22, eid=i) for i in range(5)]
    assert {v[0] for v in classify_font_rank(els).values()} == {C.PlainText}


def test_font_rank_length_cap():
    els = [_el("x" * 250, size=40, eid=0)] + [_el("body " * 80, size=24, eid=i) for i in range(1, 4)]
    assert classify_font_rank(els)[0][0] == C.PlainText


def test_font_rank_unique_largest_is_title():
    els = [_el("The Title", size=48, eid=0), _el("Head", size=32, eid=1), _el("Head 2", size=32, eid=2)]
    els += [_el("body " * 20, size=24, eid=i) for i in range(3, 6)]
    out = classify_font_rank(els)
    assert out[0] == (C.Title, P.HeuristicFontRank)
    assert out[1][0] == C.Heading1


def test_empty_paragraph_falls_back():
    out = classify_font_rank([_el("", eid=0), _el("words here", eid=1)])
    assert out[0] == (C.PlainText, P.FallbackPlainText)


# tables ----------------------------------------------------------------------

def test_table_2x2_plain():
    (t,) = parse_tables(open_container(DocxBuilder().table([["a", "b"], ["c", "d"]]).build()))
    assert len(t.cells) == 4 and (t.n_rows, t.n_cols) == (2, 2)
    assert all(c.row_span == c.col_span == 1 for c in t.cells)


def test_table_vertical_merge():
    rows = [[{"text": "m", "vmerge": "restart"}, "b"], [{"vmerge": "continue"}, "d"]]
    (t,) = parse_tables(open_container(DocxBuilder().table(rows).build()))
    assert len(t.cells) == 3
    merged = next(c for c in t.cells if c.text == "m")
    assert (merged.row_index, merged.col_index, merged.row_span) == (0, 0, 2)


def test_table_grid_span():
    rows = [[{"text": "wide", "span": 2}], ["c", "d"]]
    (t,) = parse_tables(open_container(DocxBuilder().table(rows).build()))
    assert next(c for c in t.cells if c.text == "wide").col_span == 2


def test_malformed_table_skipped_and_counted():
    rows = [["a", "b"], [{"vmerge": "continue", "span": 2}]]  # continuation with no matching origin
    doc = parse_document(DocxBuilder().table(rows).table([["ok"]]).build())
    assert doc.model.malformed_tables == 1
    assert len(doc.model.tables) == 1
    ragged = parse_document(DocxBuilder().table([["a", "b"], ["c"]]).build())
    assert ragged.model.malformed_tables == 1 and ragged.model.tables == []


@st.composite
def merged_grids(draw):
    n_rows, n_cols = draw(st.integers(1, 6)), draw(st.integers(1, 6))
    owner = [[None] * n_cols for _ in range(n_rows)]
    rects = []
    for r in range(n_rows):
        for c in range(n_cols):
            if owner[r][c] is not None:
                continue
            max_w = 1
            while c + max_w < n_cols and owner[r][c + max_w] is None:
                max_w += 1
            w = draw(st.integers(1, max_w))
            h = draw(st.integers(1, n_rows - r))
            # shrink height until the block is free
            while any(owner[rr][cc] is not None for rr in range(r, r + h) for cc in range(c, c + w)):
                h -= 1
            for rr in range(r, r + h):
                for cc in range(c, c + w):
                    owner[rr][cc] = len(rects)
            rects.append((r, c, h, w))
    return n_rows, n_cols, rects


def _rows_from_rects(n_rows, rects):
    rows = [[] for _ in range(n_rows)]
    for i, (r, c, h, w) in enumerate(rects):
        rows[r].append((c, {"text": f"cell{i}", "span": w, "vmerge": "restart" if h > 1 else None}))
        for rr in range(r + 1, r + h):
            rows[rr].append((c, {"span": w, "vmerge": "continue"}))
    return [[spec for _, spec in sorted(row, key=lambda x: x[0])] for row in rows]


@settings(max_examples=60, deadline=None, suppress_health_check=[HealthCheck.too_slow])
@given(merged_grids())
def test_table_grid_matches_generating_rectangles(grid):
    n_rows, n_cols, rects = grid
    data = DocxBuilder().table(_rows_from_rects(n_rows, rects), widths=[1000] * n_cols).build()
    (t,) = parse_tables(open_container(data))
    got = sorted((c.row_index, c.col_index, c.row_span, c.col_span) for c in t.cells)
    assert got == sorted(rects)
    # brute-force occupancy: exact rectangle, no overlaps
    occ = [[0] * t.n_cols for _ in range(t.n_rows)]
    for c in t.cells:
        for r in range(c.row_index, c.row_index + c.row_span):
            for k in range(c.col_index, c.col_index + c.col_span):
                occ[r][k] += 1
    assert all(v == 1 for row in occ for v in row)


# whole-model invariants ------------------------------------------------------

block = st.one_of(
    st.tuples(st.just("p"), st.text("abc XYZ_•1\n", min_size=0, max_size=40),
              st.sampled_from([None, "Heading1", "Heading3", "Title", "Quote", "BodyText", "Caption"]),
              st.sampled_from([20, 24, 28, 40])),
    st.tuples(st.just("t"), st.lists(st.lists(st.text("abc ", max_size=6), min_size=2, max_size=2),
                                      min_size=1, max_size=3), st.booleans(), st.none()),
    st.tuples(st.just("img"), st.integers(5, 40), st.none(), st.none()),
    st.tuples(st.just("box"), st.text("abc ", min_size=1, max_size=10), st.none(), st.none()),
)


def _build(blocks):
    b = DocxBuilder()
    for kind, a, bb, c in blocks:
        if kind == "p":
            b.paragraph(a, style=bb, size=c)
        elif kind == "t":
            b.table(a, header_rows=1 if bb else 0)
        elif kind == "img":
            b.image(a, a)
        else:
            b.textbox(a)
    return b.build()


def _oracle_body_text(data: bytes) -> str:
    """Independent walk: every w:t / m:t in document order, skipping fallback copies."""
    root = ET.fromstring(zipfile.ZipFile(io.BytesIO(data)).read("word/document.xml"))
    w = "{http://schemas.openxmlformats.org/wordprocessingml/2006/main}"
    m = "{http://schemas.openxmlformats.org/officeDocument/2006/math}"
    fallback = "{http://schemas.openxmlformats.org/markup-compatibility/2006}Fallback"
    out = []

    def walk(el):
        if el.tag == fallback:
            return
        if el.tag in (w + "t", m + "t"):
            out.append(el.text or "")
        for child in el:
            walk(child)
    walk(root)
    return "".join(out)


def _squash(s):
    return "".join(s.split())


@settings(max_examples=60, deadline=None, suppress_health_check=[HealthCheck.too_slow])
@given(st.lists(block, max_size=8))
def test_totality_precedence_reading_order_determinism(blocks):
    data = _build(blocks)
    doc = parse_document(data)
    for e in doc.model.elements:
        assert e.category is not None and e.provenance is not None
        assert e.category not in (C.TableRow, C.TableColumn)
        assert e.char_count == len(e.text)
    # built-in styled paragraphs are never overridden by later passes
    for e in doc.model.elements:
        if e.kind != ElementKind.paragraph:
            continue
        cat, _ = doc.registry.builtin_category(paragraph_style_id(doc.nodes[e.element_id]))
        if cat is not None:
            assert (e.category, e.provenance) == (cat, P.BuiltinStyle)
    body = [e for e in doc.model.elements if e.kind not in (ElementKind.header, ElementKind.footer)]
    assert _squash("".join(e.text for e in body)) == _squash(_oracle_body_text(data))
    again = parse_document(data)
    assert again.model.to_json() == doc.model.to_json()
    assert DocumentModel.from_dict(json.loads(doc.model.to_json())).to_json() == doc.model.to_json()


def test_precedence_builtin_wins_over_heuristics():
    b = DocxBuilder().paragraph("1. a\n2. b", style="Heading2").paragraph("Name: ________", style="Quote")
    doc = parse_document(b.build())
    assert _by_text(doc, "1. a\n2. b").category == C.Heading2
    assert _by_text(doc, "Name: ________").category == C.Quote


def test_locators_resolve_uniquely():
    from lxml import etree
    b = DocxBuilder().paragraph("a").table([["x", "y"]]).textbox("t").image(10, 10).header("h")
    doc = parse_document(b.build())
    c = doc.container
    locs = [e.xml_locator for e in doc.model.elements]
    assert len(set(locs)) == len(locs)
    for e in doc.model.elements:
        part, path = e.xml_locator.split(":", 1)
        tree = etree.parse(io.BytesIO(c.read(part)))
        hits = tree.xpath(path, namespaces={
            "w": "http://schemas.openxmlformats.org/wordprocessingml/2006/main",
            "mc": "http://schemas.openxmlformats.org/markup-compatibility/2006",
            "wp": "http://schemas.openxmlformats.org/drawingml/2006/wordprocessingDrawing",
            "a": "http://schemas.openxmlformats.org/drawingml/2006/main",
            "wps": "http://schemas.microsoft.com/office/word/2010/wordprocessingShape"})
        assert len(hits) == 1


def test_unclassified_model_then_classified():
    data = DocxBuilder().paragraph("x").build()
    raw = parse_container(open_container(data))
    assert raw.model.elements[0].category is None
