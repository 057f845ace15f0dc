"""Category colorization by direct edits of the package XML.

Every edit changes colors only: run color and shading, paragraph and cell
shading, border colors (width and style are copied from the effective
border) and image pixels (same dimensions and file format). A pass colors a
chosen subset of elements and neutralizes everything else, so regions that
would otherwise touch can be rendered separately.
"""
from __future__ import annotations

import io
import logging
import zipfile
from dataclasses import dataclass, field
from typing import Iterable

from lxml import etree
from PIL import Image

from ..docx.container import MAIN_PART, NS, W, Container
from ..docx.model import DocumentModel, ElementKind
from ..docx.parse import iter_paragraph_content
from ..docx.styles import STYLES_PART, StyleRegistry
from .colors import ColorMap

logger = logging.getLogger(__name__)

A = "{%s}" % NS["a"]
R = "{%s}" % NS["r"]
V = "{%s}" % NS["v"]
M = "{%s}" % NS["m"]
WPS = "{%s}" % NS["wps"]
NEUTRAL_TEXT = "000000"
NEUTRAL_IMAGE = (255, 255, 255)

# schema child order, needed so inserted properties keep the part valid
RPR_ORDER = ["rStyle", "rFonts", "b", "bCs", "i", "iCs", "caps", "smallCaps", "strike", "dstrike", "outline",
             "shadow", "emboss", "imprint", "noProof", "snapToGrid", "vanish", "webHidden", "color", "spacing",
             "w", "kern", "position", "sz", "szCs", "highlight", "u", "effect", "bdr", "shd", "fitText",
             "vertAlign", "rtl", "cs", "em", "lang", "eastAsianLayout", "specVanish", "oMath"]
PPR_ORDER = ["pStyle", "keepNext", "keepLines", "pageBreakBefore", "framePr", "widowControl", "numPr",
             "suppressLineNumbers", "pBdr", "shd", "tabs", "suppressAutoHyphens", "kinsoku", "wordWrap",
             "overflowPunct", "topLinePunct", "autoSpaceDE", "autoSpaceDN", "bidi", "adjustRightInd",
             "snapToGrid", "spacing", "ind", "contextualSpacing", "mirrorIndents", "suppressOverlap", "jc",
             "textDirection", "textAlignment", "textboxTightWrap", "outlineLvl", "divId", "cnfStyle", "rPr",
             "sectPr", "pPrChange"]
TCPR_ORDER = ["cnfStyle", "tcW", "gridSpan", "hMerge", "vMerge", "tcBorders", "shd", "noWrap", "tcMar",
              "textDirection", "tcFitText", "vAlign", "hideMark"]
TBLPR_ORDER = ["tblStyle", "tblpPr", "tblOverlap", "bidiVisual", "tblStyleRowBandSize", "tblStyleColBandSize",
               "tblW", "jc", "tblCellSpacing", "tblInd", "tblBorders", "shd", "tblLayout", "tblCellMar", "tblLook"]
BORDER_ORDER = ["top", "start", "left", "bottom", "end", "right", "insideH", "insideV", "tl2br", "tr2bl"]

CONTENT_PARTS = ("word/document.xml", "word/footnotes.xml", "word/endnotes.xml", "word/comments.xml")


class XmlEditFailure(Exception):
    pass


@dataclass
class ColorizeReport:
    colored: list[int] = field(default_factory=list)
    failures: dict[int, str] = field(default_factory=dict)
    image_failures: list[str] = field(default_factory=list)

    @property
    def failure_count(self) -> int:
        return len(self.failures)


def _ensure(parent: etree._Element, local: str, order: list[str], ns: str = W) -> etree._Element:
    """Child w:<local> of parent, created at its schema position if missing."""
    found = parent.find(ns + local)
    if found is not None:
        return found
    el = etree.Element(ns + local)
    rank = order.index(local) if local in order else len(order)
    for i, child in enumerate(parent):
        tag = child.tag if isinstance(child.tag, str) else ""
        name = tag.split("}")[-1]
        if tag.startswith(W) and name in order and order.index(name) > rank:
            parent.insert(i, el)
            return el
    parent.append(el)
    return el


def _ensure_first(parent: etree._Element, local: str) -> etree._Element:
    found = parent.find(W + local)
    if found is None:
        found = etree.Element(W + local)
        idx = 0
        # math runs keep m:rPr ahead of w:rPr
        if len(parent) and parent[0].tag == M + "rPr":
            idx = 1
        parent.insert(idx, found)
    return found


def _remove(parent: etree._Element, local: str) -> None:
    for el in parent.findall(W + local):
        parent.remove(el)


def _set_shading(props: etree._Element, hex_color: str, order: list[str]) -> None:
    shd = _ensure(props, "shd", order)
    for k in list(shd.attrib):
        del shd.attrib[k]
    shd.set(W + "val", "clear")
    shd.set(W + "color", "auto")
    shd.set(W + "fill", hex_color)


def _set_color(rpr: etree._Element, hex_color: str) -> None:
    color = _ensure(rpr, "color", RPR_ORDER)
    for k in list(color.attrib):
        del color.attrib[k]
    color.set(W + "val", hex_color)


def color_run(run: etree._Element, hex_color: str) -> None:
    rpr = _ensure_first(run, "rPr")
    _remove(rpr, "highlight")  # highlighting goes before anything else is set
    _set_color(rpr, hex_color)
    _set_shading(rpr, hex_color, RPR_ORDER)


def _runs(node: etree._Element, paragraph_only: bool) -> list[etree._Element]:
    if paragraph_only:
        return [el for el in iter_paragraph_content(node) if el.tag in (W + "r", M + "r")]
    out = []
    for el in node.iter(W + "r", M + "r"):
        if any(a.tag == "{%s}Fallback" % NS["mc"] for a in el.iterancestors()):
            continue
        out.append(el)
    return out


def _recolor_borders(borders: etree._Element | None, hex_color: str) -> None:
    if borders is None:
        return
    for side in borders:
        if isinstance(side.tag, str) and side.get(W + "val") not in ("none", "nil"):
            side.set(W + "color", hex_color)
            for attr in ("themeColor", "themeTint", "themeShade"):
                side.attrib.pop(W + attr, None)


# neutralization -----------------------------------------------------------

def neutralize(root: etree._Element) -> None:
    """Strip every color cue that could masquerade as a category color."""
    for rpr in list(root.iter(W + "rPr")):
        _remove(rpr, "highlight")
        _remove(rpr, "shd")
        color = rpr.find(W + "color")
        if color is not None:
            for k in list(color.attrib):
                del color.attrib[k]
            color.set(W + "val", NEUTRAL_TEXT)
    for tag in ("pPr", "tcPr", "tblPr", "tblPrEx", "trPr"):
        for props in list(root.iter(W + tag)):
            _remove(props, "shd")
    for tag in ("pBdr", "tcBorders", "tblBorders"):
        for borders in list(root.iter(W + tag)):
            _recolor_borders(borders, NEUTRAL_TEXT)
    for bdr in list(root.iter(W + "bdr")):
        bdr.set(W + "color", NEUTRAL_TEXT)
    for bg in list(root.iter(W + "background")):
        bg.getparent().remove(bg)
    for sppr in list(root.iter(WPS + "spPr")):
        for fill in [c for c in sppr if c.tag in (A + "solidFill", A + "gradFill", A + "pattFill", A + "blipFill")]:
            idx = sppr.index(fill)
            sppr.remove(fill)
            sppr.insert(idx, etree.Element(A + "noFill"))


# images ---------------------------------------------------------------------

def solid_image_like(data: bytes, rgb: tuple[int, int, int]) -> bytes:
    """A solid-color image with the same pixel size and file format as `data`."""
    with Image.open(io.BytesIO(data)) as src:
        fmt, size = src.format, src.size
    if fmt is None:
        raise XmlEditFailure("unknown image format")
    out = io.BytesIO()
    img = Image.new("RGB", size, tuple(rgb))
    kwargs = {}
    if fmt == "JPEG":
        kwargs = {"quality": 100, "subsampling": 0}
    try:
        img.save(out, format=fmt, **kwargs)
    except (KeyError, OSError, ValueError) as exc:
        raise XmlEditFailure(f"cannot write {fmt}: {exc}") from None
    return out.getvalue()


# package editing ------------------------------------------------------------

class _Package:
    def __init__(self, container: Container):
        self.container = container
        self.trees: dict[str, etree._ElementTree] = {}
        self.binary: dict[str, bytes] = {}

    def tree(self, part: str) -> etree._ElementTree:
        if part not in self.trees:
            parser = etree.XMLParser(resolve_entities=False, no_network=True)
            self.trees[part] = etree.parse(io.BytesIO(self.container.read(part)), parser)
        return self.trees[part]

    def resolve(self, locator: str) -> tuple[str, etree._Element]:
        part, _, path = locator.partition(":")
        if not self.container.has(part):
            raise XmlEditFailure(f"missing part {part}")
        tree = self.tree(part)
        root = tree.getroot()
        ns = {k: v for k, v in root.nsmap.items() if k}
        try:
            found = tree.xpath(path, namespaces=ns)
        except etree.XPathError:
            for el in root.iter():
                if isinstance(el.tag, str):
                    ns.update({k: v for k, v in el.nsmap.items() if k})
            try:
                found = tree.xpath(path, namespaces=ns)
            except etree.XPathError as exc:
                raise XmlEditFailure(f"bad locator {locator}: {exc}") from None
        if len(found) != 1:
            raise XmlEditFailure(f"locator {locator} matched {len(found)} nodes")
        return part, found[0]

    def serialize(self) -> bytes:
        buf = io.BytesIO()
        with zipfile.ZipFile(buf, "w", zipfile.ZIP_DEFLATED) as out:
            for info in self.container.zf.infolist():
                name = info.filename
                if name in self.trees:
                    data = etree.tostring(self.trees[name], xml_declaration=True, encoding="UTF-8",
                                          standalone=True)
                elif name in self.binary:
                    data = self.binary[name]
                else:
                    data = self.container.read(name)
                out.writestr(name, data)
        return buf.getvalue()


def _content_parts(container: Container) -> list[str]:
    parts = [p for p in CONTENT_PARTS if container.has(p)]
    for rel in container.rels(MAIN_PART).values():
        if not rel.external and rel.type.endswith(("/header", "/footer")) and container.has(rel.target):
            parts.append(rel.target)
    return parts


def _image_targets(container: Container, part: str, node: etree._Element) -> list[str]:
    rels = container.rels(part)
    out = []
    for el in node.iter(A + "blip", V + "imagedata"):
        rid = el.get(R + "embed") if el.tag == A + "blip" else el.get(R + "id")
        rel = rels.get(rid or "")
        if rel is not None and not rel.external and container.has(rel.target):
            out.append(rel.target)
    return out


def _effective_table_borders(tbl: etree._Element, registry: StyleRegistry) -> dict[str, etree._Element]:
    tblpr = tbl.find(W + "tblPr")
    style_el = tblpr.find(W + "tblStyle") if tblpr is not None else None
    style = style_el.get(W + "val") if style_el is not None else None
    direct = tblpr.find(W + "tblBorders") if tblpr is not None else None
    inherited = registry.table_borders(style)
    out = {}
    for side in ("top", "left", "bottom", "right", "insideH", "insideV"):
        for src in (direct, inherited):
            if src is None:
                continue
            el = src.find(W + side)
            if el is None and side in ("left", "right"):
                el = src.find(W + ("start" if side == "left" else "end"))
            if el is not None:
                out[side] = el
                break
    return out


def _copy_border(target_parent: etree._Element, side: str, source: etree._Element, hex_color: str) -> None:
    el = _ensure(target_parent, side, BORDER_ORDER)
    for k in list(el.attrib):
        del el.attrib[k]
    for k, v in source.attrib.items():
        el.set(k, v)
    if el.get(W + "val") not in ("none", "nil"):
        el.set(W + "color", hex_color)
        for attr in ("themeColor", "themeTint", "themeShade"):
            el.attrib.pop(W + attr, None)


class _Colorizer:
    def __init__(self, pkg: _Package, registry: StyleRegistry):
        self.pkg = pkg
        self.registry = registry

    def text_block(self, node: etree._Element, hex_color: str, paragraph_shading: bool) -> None:
        for run in _runs(node, paragraph_only=False):
            color_run(run, hex_color)
        if paragraph_shading:
            for p in node.iter(W + "p"):
                _set_shading(_ensure_first(p, "pPr"), hex_color, PPR_ORDER)

    def paragraph(self, node: etree._Element, hex_color: str) -> None:
        if node.tag != W + "p":
            raise XmlEditFailure(f"expected a paragraph, got {node.tag}")
        for run in _runs(node, paragraph_only=True):
            color_run(run, hex_color)

    def cell(self, tc: etree._Element, hex_color: str) -> None:
        if tc.tag != W + "tc":
            raise XmlEditFailure(f"expected a cell, got {tc.tag}")
        tcpr = _ensure_first(tc, "tcPr")
        _set_shading(tcpr, hex_color, TCPR_ORDER)
        for run in _runs(tc, paragraph_only=False):
            color_run(run, hex_color)

    def table(self, tbl: etree._Element, hex_color: str) -> None:
        if tbl.tag != W + "tbl":
            raise XmlEditFailure(f"expected a table, got {tbl.tag}")
        effective = _effective_table_borders(tbl, self.registry)
        if effective:
            tblpr = _ensure_first(tbl, "tblPr")
            borders = _ensure(tblpr, "tblBorders", TBLPR_ORDER)
            for side, src in effective.items():
                _copy_border(borders, side, src, hex_color)
        for tc in tbl.iter(W + "tc"):
            tcpr = _ensure_first(tc, "tcPr")
            _set_shading(tcpr, hex_color, TCPR_ORDER)
            _recolor_borders(tcpr.find(W + "tcBorders"), hex_color)
        for run in _runs(tbl, paragraph_only=False):
            color_run(run, hex_color)

    def header_row(self, tr: etree._Element, hex_color: str) -> None:
        if tr.tag != W + "tr":
            raise XmlEditFailure(f"expected a table row, got {tr.tag}")
        tbl = tr.getparent()
        rows = [r for r in tbl if r.tag == W + "tr"] if tbl is not None else [tr]
        effective = _effective_table_borders(tbl, self.registry) if tbl is not None else {}
        r = rows.index(tr)
        cells = [c for c in tr if c.tag == W + "tc"]
        for k, tc in enumerate(cells):
            tcpr = _ensure_first(tc, "tcPr")
            _set_shading(tcpr, hex_color, TCPR_ORDER)
            wanted = {
                "top": effective.get("top" if r == 0 else "insideH"),
                "bottom": effective.get("bottom" if r == len(rows) - 1 else "insideH"),
                "left": effective.get("left" if k == 0 else "insideV"),
                "right": effective.get("right" if k == len(cells) - 1 else "insideV"),
            }
            wanted = {s: e for s, e in wanted.items() if e is not None}
            if wanted:
                tcb = _ensure(tcpr, "tcBorders", TCPR_ORDER)
                for side, src in wanted.items():
                    _copy_border(tcb, side, src, hex_color)
            for run in _runs(tc, paragraph_only=False):
                color_run(run, hex_color)


def colorize(container: Container, model: DocumentModel, colormap: ColorMap,
             active: Iterable[int] | None = None, report: ColorizeReport | None = None) -> bytes:
    """Package bytes with `active` elements (default: all visible ones) in their category colors."""
    report = report if report is not None else ColorizeReport()
    if active is None:
        active = [e.element_id for e in model.elements if e.category is not None and e.visible]
    pkg = _Package(container)
    registry = StyleRegistry.from_container(container)

    parts = _content_parts(container)
    images: set[str] = set()
    for part in parts:
        root = pkg.tree(part).getroot()
        neutralize(root)
        images.update(_image_targets(container, part, root))
    if container.has(STYLES_PART):
        neutralize(pkg.tree(STYLES_PART).getroot())
    image_colors: dict[str, tuple[int, int, int]] = {name: NEUTRAL_IMAGE for name in images}

    col = _Colorizer(pkg, registry)
    for eid in active:
        el = model.elements[eid]
        if el.category is None:
            continue
        hex_color = colormap.hex(el.category)
        try:
            part, node = pkg.resolve(el.xml_locator)
            kind = el.kind
            if kind in (ElementKind.paragraph, ElementKind.textbox):
                col.paragraph(node, hex_color)
            elif kind == ElementKind.cell:
                col.cell(node, hex_color)
            elif kind == ElementKind.table:
                col.table(node, hex_color)
            elif kind == ElementKind.header_row:
                col.header_row(node, hex_color)
            elif kind == ElementKind.figure:
                targets = _image_targets(container, part, node)
                if not targets:
                    raise XmlEditFailure("figure without an embedded image")
                for t in targets:
                    image_colors[t] = colormap[el.category]
            else:  # header, footer, toc_block, form_block: multi-paragraph blocks
                col.text_block(node, hex_color, paragraph_shading=True)
            report.colored.append(eid)
        except XmlEditFailure as exc:
            report.failures[eid] = str(exc)
            logger.debug("element %s not colorized: %s", eid, exc)

    for name, rgb in image_colors.items():
        try:
            pkg.binary[name] = solid_image_like(container.read(name), rgb)
        except XmlEditFailure as exc:
            report.image_failures.append(f"{name}: {exc}")
        except Exception as exc:  # undecodable image: keep the original bytes
            report.image_failures.append(f"{name}: {type(exc).__name__}")
    return pkg.serialize()
