"""Walk a WordprocessingML package into ordered elements and table grids."""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Iterator

from lxml import etree

from .container import MAIN_PART, NS, W, Container
from .model import DocElement, DocumentModel, ElementKind, StyleSignature, TableCellModel, TableModel
from .styles import ParaProps, RunProps, StyleRegistry, on_off, parse_ppr, parse_rpr

logger = logging.getLogger(__name__)

MC = "{%s}" % NS["mc"]
M = "{%s}" % NS["m"]
A = "{%s}" % NS["a"]
V = "{%s}" % NS["v"]
R = "{%s}" % NS["r"]
W14 = "{%s}" % NS["w14"]

# content-control types that make an SDT a fillable form field
FORM_SDT_TYPES = {W + "text", W + "dropDownList", W + "comboBox", W + "date", W14 + "checkbox",
                  W + "checkbox"}
TOC_GALLERIES = ("table of contents",)


class MalformedTable(ValueError):
    pass


def _skip(el: etree._Element) -> bool:
    return el.tag in (W + "txbxContent", MC + "Fallback", W + "del", W + "moveFrom")


def iter_paragraph_content(p: etree._Element) -> Iterator[etree._Element]:
    """Descendants of a paragraph in document order, excluding nested text boxes."""
    stack = list(reversed(p))
    while stack:
        el = stack.pop()
        if not isinstance(el.tag, str) or _skip(el):
            continue
        yield el
        stack.extend(reversed(el))


def paragraph_text(p: etree._Element) -> str:
    parts = []
    for el in iter_paragraph_content(p):
        tag = el.tag
        if tag == W + "t" or tag == M + "t":
            parts.append(el.text or "")
        elif tag == W + "tab":
            parts.append("\t")
        elif tag == W + "br":
            if el.get(W + "type") not in ("page", "column"):
                parts.append("\n")
        elif tag == W + "cr":
            parts.append("\n")
        elif tag == W + "noBreakHyphen":
            parts.append("-")
    return "".join(parts)


def paragraph_style_id(p: etree._Element) -> str | None:
    ps = p.find(f"{W}pPr/{W}pStyle")
    return ps.get(W + "val") if ps is not None else None


def run_text(r: etree._Element) -> str:
    out = []
    for el in r.iter(W + "t", W + "tab"):
        out.append(el.text or "" if el.tag == W + "t" else "\t")
    return "".join(out)


def paragraph_runs(p: etree._Element) -> list[etree._Element]:
    return [el for el in iter_paragraph_content(p) if el.tag == W + "r"]


def effective_run_props(p: etree._Element, run: etree._Element | None, registry: StyleRegistry) -> RunProps:
    pstyle = paragraph_style_id(p)
    if run is None:
        return registry.run_props(pstyle, None, parse_rpr(p.find(f"{W}pPr/{W}rPr")))
    rpr = run.find(W + "rPr")
    rstyle_el = rpr.find(W + "rStyle") if rpr is not None else None
    rstyle = rstyle_el.get(W + "val") if rstyle_el is not None else None
    return registry.run_props(pstyle, rstyle, parse_rpr(rpr))


def effective_para_props(p: etree._Element, registry: StyleRegistry) -> ParaProps:
    return registry.para_props(paragraph_style_id(p), parse_ppr(p.find(W + "pPr")))


def paragraph_signature(p: etree._Element, registry: StyleRegistry) -> StyleSignature:
    """Formatting of the run carrying most of the paragraph's text."""
    best, best_len = None, 0
    for run in paragraph_runs(p):
        n = len(run_text(run).strip())
        if n > best_len:
            best, best_len = run, n
    props = effective_run_props(p, best, registry)
    return StyleSignature(
        font_size=props.size or registry.doc_run.size,
        bold=bool(props.bold),
        underline=bool(props.underline),
        italic=bool(props.italic),
        style_name=registry.name(paragraph_style_id(p)),
    )


def paragraph_figures(p: etree._Element) -> list[etree._Element]:
    """Picture-bearing drawing/VML nodes directly in this paragraph."""
    out = []
    for el in iter_paragraph_content(p):
        if el.tag == W + "drawing":
            if any(b.get(R + "embed") for b in el.iter(A + "blip")):
                out.append(el)
        elif el.tag == W + "pict":
            if any(i.get(R + "id") for i in el.iter(V + "imagedata")):
                out.append(el)
    return out


def paragraph_textboxes(p: etree._Element) -> list[etree._Element]:
    out = []
    for el in iter_paragraph_content(p):
        for child in el:
            if child.tag == W + "txbxContent":
                out.append(child)
    return out


def has_inline_form_sdt(p: etree._Element) -> bool:
    for el in iter_paragraph_content(p):
        if el.tag == W + "sdtPr" and any(c.tag in FORM_SDT_TYPES for c in el):
            return True
    return False


def has_legacy_form_field(p: etree._Element) -> bool:
    return any(el.tag == W + "ffData" for el in iter_paragraph_content(p))


def has_display_math(p: etree._Element) -> bool:
    return any(el.tag == M + "oMathPara" for el in iter_paragraph_content(p))


def has_numbering(p: etree._Element) -> bool:
    return p.find(f"{W}pPr/{W}numPr/{W}numId") is not None


def sdt_gallery(sdt: etree._Element) -> str:
    gal = sdt.find(f"{W}sdtPr/{W}docPartObj/{W}docPartGallery")
    if gal is None:
        gal = sdt.find(f"{W}sdtPr/{W}docPartList/{W}docPartGallery")
    return (gal.get(W + "val", "") if gal is not None else "").lower()


def is_form_sdt(sdt: etree._Element) -> bool:
    pr = sdt.find(W + "sdtPr")
    return pr is not None and any(c.tag in FORM_SDT_TYPES for c in pr)


def block_text(container_el: etree._Element) -> str:
    texts = []
    for p in container_el.iter(W + "p"):
        if any(_skip(a) for a in p.iterancestors()):
            continue
        t = paragraph_text(p)
        if t:
            texts.append(t)
    return "\n".join(texts)


@dataclass
class ParsedDocument:
    container: Container
    registry: StyleRegistry
    model: DocumentModel
    nodes: dict[int, etree._Element] = field(default_factory=dict, repr=False)
    # element ids of paragraphs directly before/after a table, for caption context
    table_adjacent: set[int] = field(default_factory=set)


class _Walker:
    def __init__(self, container: Container, registry: StyleRegistry):
        self.container = container
        self.registry = registry
        self.elements: list[DocElement] = []
        self.nodes: dict[int, etree._Element] = {}
        self.tables: list[TableModel] = []
        self.malformed_tables = 0
        self.table_adjacent: set[int] = set()

    def add(self, kind: ElementKind, node: etree._Element, part: str, text: str,
            signature: StyleSignature | None = None, parent: int | None = None) -> DocElement:
        if signature is None:
            signature = StyleSignature(self.registry.doc_run.size or 20)
        locator = f"{part}:{node.getroottree().getpath(node)}"
        el = DocElement(len(self.elements), kind, text, signature, locator, parent_id=parent)
        self.elements.append(el)
        self.nodes[el.element_id] = node
        return el

    def blocks(self, parent: etree._Element, part: str) -> None:
        children = [c for c in parent if isinstance(c.tag, str)]
        prev_table = False
        for i, child in enumerate(children):
            tag = child.tag
            next_table = i + 1 < len(children) and children[i + 1].tag == W + "tbl"
            if tag == W + "p":
                first = len(self.elements)
                self.paragraph(child, part)
                if (prev_table or next_table) and len(self.elements) > first:
                    self.table_adjacent.add(first)
            elif tag == W + "tbl":
                self.table(child, part)
            elif tag == W + "sdt":
                self.block_sdt(child, part)
            elif tag in (W + "customXml", W + "ins", W + "moveTo", W + "smartTag"):
                self.blocks(child, part)
            elif tag == MC + "AlternateContent":
                choice = child.find(MC + "Choice")
                if choice is not None:
                    self.blocks(choice, part)
            prev_table = tag == W + "tbl"

    def paragraph(self, p: etree._Element, part: str, kind: ElementKind = ElementKind.paragraph) -> None:
        text = paragraph_text(p)
        figures = paragraph_figures(p)
        boxes = paragraph_textboxes(p)
        if text.strip() or not (figures or boxes):
            self.add(kind, p, part, text, paragraph_signature(p, self.registry))
        for fig in figures:
            self.add(ElementKind.figure, fig, part, "")
        for box in boxes:
            for inner in box:
                if inner.tag == W + "p":
                    self.paragraph(inner, part, ElementKind.textbox)

    def block_sdt(self, sdt: etree._Element, part: str) -> None:
        content = sdt.find(W + "sdtContent")
        if content is None:
            return
        gallery = sdt_gallery(sdt)
        first_p = next(content.iter(W + "p"), None)
        sig = paragraph_signature(first_p, self.registry) if first_p is not None else None
        if any(g in gallery for g in TOC_GALLERIES):
            self.add(ElementKind.toc_block, sdt, part, block_text(content), sig)
        elif is_form_sdt(sdt):
            self.add(ElementKind.form_block, sdt, part, block_text(content), sig)
        else:
            self.blocks(content, part)

    def table(self, tbl: etree._Element, part: str) -> None:
        table_el = self.add(ElementKind.table, tbl, part, "")
        grid_cells: list[dict] = []
        open_cells: dict[int, dict] = {}  # start column -> cell still open for vertical merge
        malformed = False
        rows = [tr for tr in tbl if tr.tag == W + "tr"]
        for r_idx, tr in enumerate(rows):
            trpr = tr.find(W + "trPr")
            is_header = trpr is not None and bool(on_off(trpr.find(W + "tblHeader")))
            parent_id = table_el.element_id
            if is_header:
                parent_id = self.add(ElementKind.header_row, tr, part, "", parent=table_el.element_id).element_id
            col = 0
            gb = trpr.find(W + "gridBefore") if trpr is not None else None
            if gb is not None:
                col = int(gb.get(W + "val", "0") or 0)
            still_open: dict[int, dict] = {}
            for tc in _row_cells(tr):
                tcpr = tc.find(W + "tcPr")
                span_el = tcpr.find(W + "gridSpan") if tcpr is not None else None
                span = max(1, int(span_el.get(W + "val", "1"))) if span_el is not None else 1
                vm = tcpr.find(W + "vMerge") if tcpr is not None else None
                cont = vm is not None and vm.get(W + "val", "continue") != "restart"
                if cont:
                    origin = open_cells.get(col)
                    if origin is not None and origin["col_span"] == span:
                        origin["row_span"] += 1
                        still_open[col] = origin
                        col += span
                        continue
                    malformed = True
                first_p = next(tc.iter(W + "p"), None)
                sig = paragraph_signature(first_p, self.registry) if first_p is not None else None
                cell_el = self.add(ElementKind.cell, tc, part, block_text(tc), sig, parent=parent_id)
                cell = {"cell_id": cell_el.element_id, "row_index": r_idx, "col_index": col,
                        "row_span": 1, "col_span": span, "is_header_cell": is_header,
                        "text": cell_el.text}
                grid_cells.append(cell)
                if vm is not None:
                    still_open[col] = cell
                col += span
            open_cells = still_open
        model = None
        if not malformed and grid_cells:
            try:
                model = _grid_model(len(self.tables), grid_cells)
            except MalformedTable:
                malformed = True
        if malformed:
            self.malformed_tables += 1
            logger.debug("malformed table at %s", table_el.xml_locator)
        elif model is not None:
            self.tables.append(model)


def _row_cells(tr: etree._Element) -> Iterator[etree._Element]:
    for child in tr:
        if child.tag == W + "tc":
            yield child
        elif child.tag in (W + "sdt", W + "customXml"):
            content = child.find(W + "sdtContent") if child.tag == W + "sdt" else child
            if content is not None:
                yield from (c for c in content if c.tag == W + "tc")


def _grid_model(table_id: int, cells: list[dict]) -> TableModel:
    n_rows = max(c["row_index"] + c["row_span"] for c in cells)
    n_cols = max(c["col_index"] + c["col_span"] for c in cells)
    occupied: set[tuple[int, int]] = set()
    for c in cells:
        for r in range(c["row_index"], c["row_index"] + c["row_span"]):
            for k in range(c["col_index"], c["col_index"] + c["col_span"]):
                if (r, k) in occupied:
                    raise MalformedTable("overlapping cells")
                occupied.add((r, k))
    if len(occupied) != n_rows * n_cols:
        raise MalformedTable("ragged grid")
    return TableModel(table_id, [TableCellModel(**c) for c in cells], n_rows, n_cols)


def _section_parts(container: Container, body: etree._Element) -> list[tuple[str, ElementKind]]:
    sect = body.find(W + "sectPr")
    if sect is None:
        sects = list(body.iter(W + "sectPr"))
        sect = sects[-1] if sects else None
    if sect is None:
        return []
    rels = container.rels(MAIN_PART)
    out = []
    for tag, kind in (("headerReference", ElementKind.header), ("footerReference", ElementKind.footer)):
        for ref in sect.findall(W + tag):
            if ref.get(W + "type", "default") != "default":
                continue
            rel = rels.get(ref.get(R + "id", ""))
            if rel and not rel.external and container.has(rel.target):
                out.append((rel.target, kind))
    return out


def parse_container(container: Container, source_hash: str = "") -> ParsedDocument:
    """Unclassified element model of a package (see classify.classify_document)."""
    registry = StyleRegistry.from_container(container)
    walker = _Walker(container, registry)
    root = container.xml(MAIN_PART).getroot()
    body = root.find(W + "body")
    if body is not None:
        walker.blocks(body, MAIN_PART)
        for part, kind in _section_parts(container, body):
            part_root = container.xml(part).getroot()
            first_p = next(part_root.iter(W + "p"), None)
            sig = paragraph_signature(first_p, registry) if first_p is not None else None
            walker.add(kind, part_root, part, block_text(part_root), sig)
    model = DocumentModel(walker.elements, walker.tables, source_hash,
                          malformed_tables=walker.malformed_tables)
    return ParsedDocument(container, registry, model, walker.nodes, walker.table_adjacent)


def parse_tables(container: Container) -> list[TableModel]:
    return parse_container(container).model.tables
