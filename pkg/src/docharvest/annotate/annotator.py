"""Per-document annotation: colorize in passes, render, detect, derive table grids, read page text."""
from __future__ import annotations

import json
import logging
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from PIL import Image

from ..docx import parse_document
from ..docx.container import ContainerError
from ..docx.model import DocumentModel, ElementKind, SemanticCategory
from .colorize import ColorizeReport, colorize
from .colors import ColorMap
from .detect import Box, detect_bboxes
from .grid import DegenerateTable, TableGrid, derive_table_grid
from .pdf import PdfDocument, UnsupportedPdfFeature, Word, extract_page_text
from .render import MAX_PAGES, RenderCrash, RenderError, Renderer, RenderTimeout, TooManyPages

logger = logging.getLogger(__name__)

MIN_DOC_CHARS = 200
CELL_CATEGORIES = (SemanticCategory.TableCell, SemanticCategory.TableHeaderCell)


@dataclass
class PageAnnotation:
    page_index: int
    width: int
    height: int
    boxes: list[Box] = field(default_factory=list)
    words: list[Word] = field(default_factory=list)
    page_text: str = ""
    page_language: tuple[str, float] | None = None
    text_flag: str | None = None

    def check(self) -> None:
        for b in self.boxes:
            if b.w < 1 or b.h < 1:
                raise ValueError(f"empty box {b}")
            if b.x < 0 or b.y < 0 or b.x1 > self.width or b.y1 > self.height:
                raise ValueError(f"box {b} outside {self.width}x{self.height} page")

    def to_dict(self) -> dict:
        return {
            "page_index": self.page_index,
            "width": self.width,
            "height": self.height,
            "boxes": [{"category": b.category.value, "x": b.x, "y": b.y, "w": b.w, "h": b.h,
                       "element_id": b.element_id} for b in self.boxes],
            "words": [{"text": w.text, "x": w.x, "y": w.y, "w": w.w, "h": w.h} for w in self.words],
            "page_text": self.page_text,
            "page_language": ({"code": self.page_language[0], "confidence": self.page_language[1]}
                              if self.page_language else None),
            "text_flag": self.text_flag,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "PageAnnotation":
        lang = d.get("page_language")
        return cls(
            d["page_index"], d["width"], d["height"],
            [Box(SemanticCategory(b["category"]), b["x"], b["y"], b["w"], b["h"], b.get("element_id"))
             for b in d.get("boxes", [])],
            [Word(w["text"], w["x"], w["y"], w["w"], w["h"]) for w in d.get("words", [])],
            d.get("page_text", ""),
            (lang["code"], lang["confidence"]) if lang else None,
            d.get("text_flag"),
        )


@dataclass
class AnnotationResult:
    source_hash: str
    status: str  # ok | rejected | failed
    reason: str | None = None
    model: DocumentModel | None = None
    doc_text: str = ""
    pages: list[PageAnnotation] = field(default_factory=list)
    images: list[np.ndarray] = field(default_factory=list, repr=False)
    passes: int = 0
    colorize_failures: int = 0
    page_count_mismatch: bool = False
    timings: dict[str, float] = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return self.status == "ok"


def extract_doc_text(model: DocumentModel) -> str:
    """Element texts in document order, one per line."""
    return "\n".join(e.text for e in model.elements if e.text)


# pass planning ---------------------------------------------------------------

def _alternate(elements) -> list[list[int]]:
    """Two passes; consecutive elements of one category go to different passes."""
    slots: list[list[int]] = [[], []]
    prev_cat, prev_slot = None, 1
    for e in elements:
        slot = 1 - prev_slot if e.category == prev_cat else 0
        slots[slot].append(e.element_id)
        prev_cat, prev_slot = e.category, slot
    return slots


def _cell_adjacency(model: DocumentModel, cell_ids: set[int]) -> dict[int, set[int]]:
    adj: dict[int, set[int]] = {i: set() for i in cell_ids}
    covered: set[int] = set()
    for table in model.tables:
        cells = [c for c in table.cells if c.cell_id in cell_ids]
        covered.update(c.cell_id for c in cells)
        for i, a in enumerate(cells):
            for b in cells[i + 1:]:
                rows_overlap = a.row_index < b.row_index + b.row_span and b.row_index < a.row_index + a.row_span
                cols_overlap = a.col_index < b.col_index + b.col_span and b.col_index < a.col_index + a.col_span
                rows_touch = a.row_index + a.row_span == b.row_index or b.row_index + b.row_span == a.row_index
                cols_touch = a.col_index + a.col_span == b.col_index or b.col_index + b.col_span == a.col_index
                if (rows_overlap and cols_touch) or (cols_overlap and rows_touch):
                    adj[a.cell_id].add(b.cell_id)
                    adj[b.cell_id].add(a.cell_id)
    # back-to-back tables can touch: bottom row of one against the top row of the next
    for upper, lower in zip(model.tables, model.tables[1:]):
        bottom = [c.cell_id for c in upper.cells if c.cell_id in cell_ids and c.row_index + c.row_span == upper.n_rows]
        top = [c.cell_id for c in lower.cells if c.cell_id in cell_ids and c.row_index == 0]
        for a in bottom:
            for b in top:
                adj[a].add(b)
                adj[b].add(a)
    # cells of malformed tables: neighbours in document order within the same parent
    loose = sorted(cell_ids - covered)
    by_parent: dict = {}
    for cid in loose:
        by_parent.setdefault(model.elements[cid].parent_id, []).append(cid)
    for group in by_parent.values():
        for i, cid in enumerate(group):
            for other in group[i + 1:i + 4]:
                adj[cid].add(other)
                adj[other].add(cid)
    return adj


def plan_passes(model: DocumentModel) -> list[list[int]]:
    """Element ids per colorization pass, so that no two same-category regions touch within a pass."""
    visible = [e for e in model.elements if e.category is not None and e.visible]
    layer_a = [e for e in visible if e.kind not in (ElementKind.header_row, ElementKind.cell)]
    layer_b = [e for e in visible if e.kind == ElementKind.header_row]
    cells = [e for e in visible if e.kind == ElementKind.cell]
    passes = _alternate(layer_a) + _alternate(layer_b)
    if cells:
        adj = _cell_adjacency(model, {e.element_id for e in cells})
        color: dict[int, int] = {}
        for e in cells:
            used = {color[n] for n in adj[e.element_id] if n in color}
            k = 0
            while k in used:
                k += 1
            color[e.element_id] = k
        for k in range(max(color.values()) + 1):
            passes.append([e.element_id for e in cells if color[e.element_id] == k])
    return [p for p in passes if p]


# detection across passes -----------------------------------------------------

def _link_ids(model: DocumentModel, pass_ids: list[int], page_boxes: list[list[Box]]) -> list[list[Box]]:
    """Attach element ids when a category's boxes and elements pair up one to one in reading order."""
    by_cat: dict[SemanticCategory, list[int]] = {}
    for eid in pass_ids:
        by_cat.setdefault(model.elements[eid].category, []).append(eid)
    out = [list(boxes) for boxes in page_boxes]
    for cat, ids in by_cat.items():
        found = [(pi, bi) for pi, boxes in enumerate(out) for bi, b in enumerate(boxes) if b.category == cat]
        if len(found) != len(ids):
            continue
        for (pi, bi), eid in zip(found, ids):
            out[pi][bi] = out[pi][bi].with_id(eid)
    return out


def table_structure_boxes(boxes: list[Box]) -> tuple[list[Box], list[TableGrid]]:
    """TableRow/TableColumn boxes for every detected table on one page."""
    tables = [b for b in boxes if b.category == SemanticCategory.Table]
    cells = [b for b in boxes if b.category in CELL_CATEGORIES]
    out: list[Box] = []
    grids: list[TableGrid] = []
    for t in tables:
        inside = [c for c in cells
                  if t.x <= c.x + c.w / 2 < t.x1 and t.y <= c.y + c.h / 2 < t.y1]
        rects = [(c.x, c.y, c.x1, c.y1) for c in inside]
        if not rects:
            continue
        try:
            grid = derive_table_grid(rects, (t.x, t.y, t.x1, t.y1))
        except DegenerateTable as exc:
            grid = exc.grid
        grids.append(grid)
        for cat, bands in ((SemanticCategory.TableRow, grid.rows), (SemanticCategory.TableColumn, grid.columns)):
            for band in bands:
                x0, y0, x1, y1 = band.box
                if x1 > x0 and y1 > y0:
                    out.append(Box(cat, x0, y0, x1 - x0, y1 - y0))
    return out, grids


def annotate_document(data: bytes, renderer: Renderer, colormap: ColorMap | None = None, *,
                      source_hash: str = "", max_pages: int = MAX_PAGES,
                      min_chars: int = MIN_DOC_CHARS) -> AnnotationResult:
    colormap = colormap or ColorMap.default()
    result = AnnotationResult(source_hash, "ok")
    clock = time.perf_counter
    t0 = clock()
    try:
        parsed = parse_document(data, source_hash)
    except ContainerError as exc:
        result.status, result.reason = "rejected", exc.kind
        return result
    except Exception as exc:  # unparsable XML and friends
        result.status, result.reason = "failed", f"ParseError: {type(exc).__name__}"
        return result
    model = parsed.model
    result.model = model
    result.timings["parse"] = clock() - t0

    result.doc_text = extract_doc_text(model)
    if len(result.doc_text) < min_chars:
        result.status, result.reason = "rejected", "TooShort"
        return result

    t0 = clock()
    try:
        base = renderer.render(data, max_pages=max_pages, want_pdf=True)
        if base.page_count > max_pages:
            raise TooManyPages(base.page_count, max_pages)
        model.page_count = base.page_count
        passes = plan_passes(model)
        result.passes = len(passes)
        page_boxes: list[list[Box]] = [[] for _ in base.pages]
        report = ColorizeReport()
        for ids in passes:
            colored = colorize(parsed.container, model, colormap, ids, report)
            res = renderer.render(colored, max_pages=max_pages, want_pdf=False)
            if res.page_count != base.page_count:
                result.page_count_mismatch = True
            cats = {model.elements[i].category for i in ids}
            found = [detect_bboxes(img, colormap, cats) for img in res.pages[:base.page_count]]
            found += [[] for _ in range(base.page_count - len(found))]
            for pi, boxes in enumerate(_link_ids(model, ids, found)):
                page_boxes[pi].extend(boxes)
        result.colorize_failures = report.failure_count
    except TooManyPages as exc:
        result.status, result.reason = "rejected", exc.kind
        return result
    except (RenderTimeout, RenderCrash, RenderError) as exc:
        result.status, result.reason = "failed", exc.kind
        logger.info("render failed for %s: %s", source_hash, exc)
        return result
    result.timings["render_detect"] = clock() - t0

    t0 = clock()
    doc = None
    doc_flag = None
    if base.pdf:
        try:
            doc = PdfDocument(base.pdf)
        except UnsupportedPdfFeature as exc:
            doc_flag = str(exc)
    else:
        doc_flag = "no PDF"
    for pi, img in enumerate(base.pages):
        boxes = page_boxes[pi]
        extra, _ = table_structure_boxes(boxes)
        page = PageAnnotation(pi, int(img.shape[1]), int(img.shape[0]), boxes + extra)
        if doc is not None:
            pt = extract_page_text(doc, pi, renderer.dpi)
            page.page_text, page.words, page.text_flag = pt.text, pt.words, pt.unsupported
        else:
            page.text_flag = doc_flag
        page.check()
        result.pages.append(page)
    result.images = list(base.pages)
    result.timings["page_text"] = clock() - t0
    return result


# outputs ------------------------------------------------------------------------

def write_document_outputs(result: AnnotationResult, out_dir: Path) -> list[str]:
    """pages/<hash>_<page>.png and ann/<hash>.json; returns the page image names."""
    out_dir = Path(out_dir)
    (out_dir / "pages").mkdir(parents=True, exist_ok=True)
    (out_dir / "ann").mkdir(parents=True, exist_ok=True)
    names = []
    for page, img in zip(result.pages, result.images):
        name = f"{result.source_hash}_{page.page_index}.png"
        Image.fromarray(img).save(out_dir / "pages" / name)
        names.append(name)
    ann = out_dir / "ann" / f"{result.source_hash}.json"
    tmp = ann.with_suffix(".json.tmp")
    tmp.write_text(json.dumps([p.to_dict() for p in result.pages]))
    tmp.replace(ann)
    return names


def load_page_annotations(path: Path) -> list[PageAnnotation]:
    return [PageAnnotation.from_dict(d) for d in json.loads(Path(path).read_text())]


COCO_CATEGORIES = [{"id": i + 1, "name": c.value} for i, c in enumerate(SemanticCategory)]
_COCO_IDS = {c["name"]: c["id"] for c in COCO_CATEGORIES}


class CocoBuilder:
    def __init__(self):
        self.images: list[dict] = []
        self.annotations: list[dict] = []

    def add_document(self, source_hash: str, pages: list[PageAnnotation]) -> None:
        for page in pages:
            image_id = len(self.images) + 1
            self.images.append({"id": image_id, "file_name": f"{source_hash}_{page.page_index}.png",
                                "width": page.width, "height": page.height})
            for b in page.boxes:
                self.annotations.append({
                    "id": len(self.annotations) + 1, "image_id": image_id,
                    "category_id": _COCO_IDS[b.category.value], "bbox": [b.x, b.y, b.w, b.h],
                    "area": b.area, "iscrowd": 0,
                })

    def to_dict(self) -> dict:
        return {"images": self.images, "categories": COCO_CATEGORIES, "annotations": self.annotations}


__all__ = ["AnnotationResult", "CocoBuilder", "COCO_CATEGORIES", "MIN_DOC_CHARS",
           "PageAnnotation", "annotate_document", "extract_doc_text", "load_page_annotations", "plan_passes",
           "table_structure_boxes", "write_document_outputs"]
