"""Deterministic page layout of a WordprocessingML package.

A deliberately plain typesetter: monospace glyph cells, greedy line breaking,
grid tables and inline pictures. It lets colorized packages be rasterized
without an office suite while every element's rectangle is known exactly,
which is what the mock renderer and the round-trip tests rely on.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field

from lxml import etree

from ..docx.container import MAIN_PART, NS, W, Container
from ..docx.parse import effective_para_props, effective_run_props
from ..docx.styles import RunProps, StyleRegistry, on_off

MC = "{%s}" % NS["mc"]
M = "{%s}" % NS["m"]
A = "{%s}" % NS["a"]
V = "{%s}" % NS["v"]
R = "{%s}" % NS["r"]
WP = "{%s}" % NS["wp"]

CHAR_WIDTH = 0.6  # em, Courier advance
LINE_PITCH = 1.2  # em
BASELINE = 0.25  # em above the line bottom
GLYPH_HEIGHT = 0.7  # em
CELL_MARGIN_TWIPS = 108
TAB_SPACES = 4
EMU_PER_INCH = 914400

RGB = tuple[int, int, int]
BLACK: RGB = (0, 0, 0)

HIGHLIGHTS: dict[str, RGB] = {
    "yellow": (255, 255, 0), "green": (0, 255, 0), "cyan": (0, 255, 255), "magenta": (255, 0, 255),
    "blue": (0, 0, 255), "red": (255, 0, 0), "darkBlue": (0, 0, 128), "darkCyan": (0, 128, 128),
    "darkGreen": (0, 128, 0), "darkMagenta": (128, 0, 128), "darkRed": (128, 0, 0),
    "darkYellow": (128, 128, 0), "darkGray": (128, 128, 128), "lightGray": (192, 192, 192),
    "black": (0, 0, 0), "white": (255, 255, 255),
}


def parse_hex(value: str | None) -> RGB | None:
    if not value or not re.fullmatch(r"[0-9A-Fa-f]{6}", value):
        return None
    return (int(value[0:2], 16), int(value[2:4], 16), int(value[4:6], 16))


def text_color(props: RunProps) -> RGB:
    return parse_hex(props.color) or BLACK


def shading_color(value: str | None) -> RGB | None:
    if value is None or value.lower() == "auto":
        return None
    return parse_hex(value)


# ops are painted in order: ("fill", x0, y0, x1, y1, rgb), ("text", x, baseline, size, str, rgb),
# ("image", x0, y0, x1, y1, part)
Op = tuple


def _shift(ops: list[Op], dx: float, dy: float) -> list[Op]:
    out = []
    for op in ops:
        if op[0] == "text":
            out.append(("text", op[1] + dx, op[2] + dy, *op[3:]))
        else:
            out.append((op[0], op[1] + dx, op[2] + dy, op[3] + dx, op[4] + dy, op[5]))
    return out


def _shift_gt(gt: list, dx: float, dy: float) -> list:
    return [(loc, (r[0] + dx, r[1] + dy, r[2] + dx, r[3] + dy)) for loc, r in gt]


@dataclass
class Block:
    """Positioned content relative to its own top-left corner."""

    width: float
    height: float
    ops: list[Op] = field(default_factory=list)
    gt: list = field(default_factory=list)  # (locator, (x0, y0, x1, y1))


@dataclass
class Slice:
    """A horizontal strip of flowed content; the paginator never splits one."""

    height: float
    ops: list[Op] = field(default_factory=list)
    gt: list = field(default_factory=list)
    break_before: bool = False
    break_after: bool = False
    spacing: bool = False


@dataclass
class Page:
    index: int
    width: int
    height: int
    ops: list[Op] = field(default_factory=list)
    gt: dict[str, tuple[int, int, int, int]] = field(default_factory=dict)

    def add_gt(self, locator: str, rect) -> None:
        x0, y0, x1, y1 = (int(round(v)) for v in rect)
        x0, y0 = max(x0, 0), max(y0, 0)
        x1, y1 = min(x1, self.width), min(y1, self.height)
        if x1 <= x0 or y1 <= y0:
            return
        old = self.gt.get(locator)
        if old:
            x0, y0, x1, y1 = min(x0, old[0]), min(y0, old[1]), max(x1, old[2]), max(y1, old[3])
        self.gt[locator] = (x0, y0, x1, y1)


@dataclass
class _Tok:
    text: str
    props: RunProps
    size: float  # px


@dataclass
class _Break:
    page: bool


class TooManyPagesInLayout(Exception):
    def __init__(self, pages: int):
        super().__init__(f"layout exceeds {pages} pages")
        self.pages = pages


class Layout:
    def __init__(self, container: Container, dpi: int = 150):
        self.container = container
        self.dpi = dpi
        self.registry = StyleRegistry.from_container(container)
        self._paths: dict[str, etree._ElementTree] = {}

    # unit helpers ---------------------------------------------------------
    def twips(self, v: float) -> float:
        return v * self.dpi / 1440.0

    def emu(self, v: float) -> float:
        return v * self.dpi / EMU_PER_INCH

    def font_px(self, half_points: int | None) -> float:
        hp = half_points or self.registry.doc_run.size or 20
        return hp / 2.0 * self.dpi / 72.0

    def locator(self, part: str, node: etree._Element) -> str:
        return f"{part}:{node.getroottree().getpath(node)}"

    # inline content -------------------------------------------------------
    def _inline_items(self, p: etree._Element, part: str, width: float) -> list:
        items: list = []

        def run(r: etree._Element) -> None:
            props = effective_run_props(p, r, self.registry)
            size = self.font_px(props.size)
            for el in r:
                tag = el.tag
                if not isinstance(tag, str):
                    continue
                if tag in (W + "t", M + "t"):
                    if el.text:
                        items.append(_Tok(el.text, props, size))
                elif tag == W + "tab":
                    items.append(_Tok(" " * TAB_SPACES, props, size))
                elif tag == W + "noBreakHyphen":
                    items.append(_Tok("-", props, size))
                elif tag == W + "br":
                    kind = el.get(W + "type")
                    items.append(_Break(page=kind == "page"))
                elif tag == W + "cr":
                    items.append(_Break(page=False))
                elif tag in (W + "drawing", W + "pict"):
                    blk = self._drawing(el, part, width)
                    if blk is not None:
                        items.append(blk)
                elif tag == MC + "AlternateContent":
                    choice = el.find(MC + "Choice")
                    if choice is not None:
                        run_like(choice)

        def run_like(container_el: etree._Element) -> None:
            # children of an AlternateContent choice inside a run
            for el in container_el:
                if el.tag in (W + "drawing", W + "pict"):
                    blk = self._drawing(el, part, width)
                    if blk is not None:
                        items.append(blk)

        def walk(el: etree._Element) -> None:
            for child in el:
                tag = child.tag
                if not isinstance(tag, str):
                    continue
                if tag in (W + "r", M + "r"):
                    run(child)
                elif tag in (W + "pPr", W + "sdtPr", W + "del", W + "moveFrom", MC + "Fallback", W + "rPr"):
                    continue
                elif tag == MC + "AlternateContent":
                    choice = child.find(MC + "Choice")
                    if choice is not None:
                        walk(choice)
                else:
                    walk(child)

        walk(p)
        return items

    def _drawing(self, el: etree._Element, part: str, max_width: float) -> Block | None:
        loc = self.locator(part, el)
        w = h = None
        ext = next(el.iter(WP + "extent"), None)
        if ext is not None:
            w, h = self.emu(float(ext.get("cx", "0"))), self.emu(float(ext.get("cy", "0")))
        else:
            shape = next((s for s in el.iter() if isinstance(s.tag, str) and s.get("style")), None)
            if shape is not None:
                w, h = _vml_size(shape.get("style", ""), self.dpi)
        if not w or not h:
            w = h = self.dpi * 0.5
        txbx = next(el.iter(W + "txbxContent"), None)
        blip = next(el.iter(A + "blip"), None)
        imagedata = next(el.iter(V + "imagedata"), None)
        blk = Block(w, h)
        if blip is not None or imagedata is not None:
            rid = blip.get(R + "embed") if blip is not None else imagedata.get(R + "id")
            rel = self.container.rels(part).get(rid or "")
            if rel is not None and not rel.external and self.container.has(rel.target):
                blk.ops.append(("image", 0.0, 0.0, w, h, rel.target))
            blk.gt.append((loc, (0.0, 0.0, w, h)))
        elif txbx is not None:
            inner = self.stack(txbx, part, w)
            blk.ops.extend(inner.ops)
            blk.gt.extend(inner.gt)
            blk.height = max(h, inner.height)
        return blk

    # paragraphs -----------------------------------------------------------
    def paragraph_slices(self, p: etree._Element, part: str, width: float,
                         owners: tuple[str, ...] = ()) -> list[Slice]:
        loc = self.locator(part, p)
        pprops = effective_para_props(p, self.registry)
        ppr = p.find(W + "pPr")
        shd = ppr.find(W + "shd") if ppr is not None else None
        para_fill = shading_color(shd.get(W + "fill")) if shd is not None else None
        break_before = ppr is not None and bool(on_off(ppr.find(W + "pageBreakBefore")))
        mark_size = self.font_px(effective_run_props(p, None, self.registry).size)
        items = self._inline_items(p, part, width)
        lines = self._break_lines(items, width, mark_size)

        slices: list[Slice] = []
        before = self.twips(pprops.space_before or 0)
        after = self.twips(pprops.space_after or 0)
        if before > 0:
            slices.append(Slice(before, spacing=True))
        for line_items, height, page_after in lines:
            sl = Slice(height, break_after=page_after)
            band = None
            for x, item in line_items:
                if isinstance(item, _Tok):
                    w = len(item.text) * CHAR_WIDTH * item.size
                    top = height - LINE_PITCH * item.size
                    fill = shading_color(item.props.shading)
                    if fill is not None:
                        sl.ops.append(("fill", x, top, x + w, height, fill))
                    hl = HIGHLIGHTS.get(item.props.highlight or "")
                    if hl is not None:
                        sl.ops.append(("fill", x, top, x + w, height, hl))
                    sl.ops.append(("text", x, height - BASELINE * item.size, item.size, item.text,
                                   text_color(item.props)))
                    r = (x, top, x + w, height)
                    band = r if band is None else (min(band[0], r[0]), min(band[1], r[1]),
                                                   max(band[2], r[2]), max(band[3], r[3]))
                else:
                    dy = height - item.height
                    sl.ops.extend(_shift(item.ops, x, dy))
                    sl.gt.extend(_shift_gt(item.gt, x, dy))
            if band is not None:
                sl.gt.append((loc, band))
            slices.append(sl)
        if after > 0:
            slices.append(Slice(after, spacing=True))
        if slices:
            slices[0].break_before = break_before
        for sl in slices:
            if para_fill is not None:
                sl.ops.insert(0, ("fill", 0.0, 0.0, width, sl.height, para_fill))
            for owner in owners:
                sl.gt.append((owner, (0.0, 0.0, width, sl.height)))
        return slices

    def _break_lines(self, items: list, width: float, mark_size: float):
        """Greedy line breaking into (positioned items, height, page_break_after) tuples."""
        lines = []
        cur: list = []
        x = 0.0
        wrapped = False

        def finish(page_after: bool = False):
            nonlocal cur, x
            while cur and isinstance(cur[-1][1], _Tok) and cur[-1][1].text.isspace():
                cur.pop()
            if cur and isinstance(cur[-1][1], _Tok):
                last = cur[-1][1]
                stripped = last.text.rstrip()
                if stripped != last.text:
                    cur[-1] = (cur[-1][0], _Tok(stripped, last.props, last.size))
            height = 0.0
            for _, it in cur:
                height = max(height, LINE_PITCH * it.size if isinstance(it, _Tok) else it.height)
            lines.append((cur, height or LINE_PITCH * mark_size, page_after))
            cur, x = [], 0.0

        for item in items:
            if isinstance(item, _Break):
                finish(item.page)
                wrapped = False
                continue
            if isinstance(item, Block):
                if x > 0 and x + item.width > width:
                    finish()
                cur.append((x, item))
                x += item.width
                continue
            cw = CHAR_WIDTH * item.size
            for tok in re.findall(r"\s+|\S+", item.text):
                if tok.isspace():
                    if x == 0 and wrapped:
                        continue
                    cur.append((x, _Tok(tok, item.props, item.size)))
                    x += len(tok) * cw
                    continue
                if x > 0 and x + len(tok) * cw > width:
                    finish()
                    wrapped = True
                while len(tok) * cw > width and len(tok) > 1:
                    n = max(1, int(width // cw))
                    cur.append((x, _Tok(tok[:n], item.props, item.size)))
                    tok = tok[n:]
                    finish()
                    wrapped = True
                cur.append((x, _Tok(tok, item.props, item.size)))
                x += len(tok) * cw
        if cur or not lines:
            finish()
        return lines

    # block containers -----------------------------------------------------
    def block_slices(self, parent: etree._Element, part: str, width: float,
                     owners: tuple[str, ...] = ()) -> list[Slice]:
        out: list[Slice] = []
        for child in parent:
            tag = child.tag
            if not isinstance(tag, str):
                continue
            if tag == W + "p":
                out.extend(self.paragraph_slices(child, part, width, owners))
            elif tag == W + "tbl":
                out.extend(self.table_slices(child, part, width, owners))
            elif tag == W + "sdt":
                content = child.find(W + "sdtContent")
                if content is not None:
                    out.extend(self.block_slices(content, part, width, owners + (self.locator(part, child),)))
            elif tag in (W + "customXml", W + "ins", W + "moveTo", W + "smartTag"):
                out.extend(self.block_slices(child, part, width, owners))
            elif tag == MC + "AlternateContent":
                choice = child.find(MC + "Choice")
                if choice is not None:
                    out.extend(self.block_slices(choice, part, width, owners))
        return out

    def stack(self, parent: etree._Element, part: str, width: float, owners: tuple[str, ...] = ()) -> Block:
        """Lay out block content without pagination."""
        blk = Block(width, 0.0)
        for sl in self.block_slices(parent, part, width, owners):
            blk.ops.extend(_shift(sl.ops, 0, blk.height))
            blk.gt.extend(_shift_gt(sl.gt, 0, blk.height))
            blk.height += sl.height
        return blk

    # tables ---------------------------------------------------------------
    def _borders(self, tbl: etree._Element):
        tblpr = tbl.find(W + "tblPr")
        style = None
        if tblpr is not None and tblpr.find(W + "tblStyle") is not None:
            style = tblpr.find(W + "tblStyle").get(W + "val")
        direct = tblpr.find(W + "tblBorders") if tblpr is not None else None
        inherited = self.registry.table_borders(style)
        sides = {}
        for side in ("top", "left", "bottom", "right", "insideH", "insideV"):
            el = None
            for src in (direct, inherited):
                if src is not None:
                    el = src.find(W + side)
                    if el is None and side in ("left", "right"):
                        el = src.find(W + ("start" if side == "left" else "end"))
                    if el is not None:
                        break
            sides[side] = el
        return sides

    def _border_width(self, sides: dict) -> float:
        widths = []
        for el in sides.values():
            if el is None or el.get(W + "val", "single") in ("none", "nil"):
                continue
            try:
                sz = float(el.get(W + "sz", "4"))
            except ValueError:
                sz = 4.0
            widths.append(max(1, round(sz / 8.0 * self.dpi / 72.0)))
        return float(max(widths)) if widths else 0.0

    @staticmethod
    def _border_color(el: etree._Element | None) -> RGB | None | bool:
        """RGB to paint, None for an explicit no-border, False when unspecified."""
        if el is None:
            return False
        if el.get(W + "val", "single") in ("none", "nil"):
            return None
        return parse_hex(el.get(W + "color")) or BLACK

    def table_slices(self, tbl: etree._Element, part: str, avail: float,
                     owners: tuple[str, ...] = ()) -> list[Slice]:
        tloc = self.locator(part, tbl)
        grid = [self.twips(float(g.get(W + "w", "0") or 0)) for g in tbl.findall(f"{W}tblGrid/{W}gridCol")]
        rows = [tr for tr in tbl if tr.tag == W + "tr"]
        if not rows:
            return []
        sides = self._borders(tbl)
        b = self._border_width(sides)
        # occupancy: cells as dicts with grid position and span
        cells: list[dict] = []
        occ: dict[tuple[int, int], dict] = {}
        open_cells: dict[int, dict] = {}
        n_cols = len(grid)
        for r, tr in enumerate(rows):
            trpr = tr.find(W + "trPr")
            col = 0
            gb = trpr.find(W + "gridBefore") if trpr is not None else None
            if gb is not None:
                col = int(gb.get(W + "val", "0") or 0)
            still: dict[int, dict] = {}
            for tc in _cells(tr):
                tcpr = tc.find(W + "tcPr")
                span_el = tcpr.find(W + "gridSpan") if tcpr is not None else None
                span = max(1, int(span_el.get(W + "val", "1"))) if span_el is not None else 1
                vm = tcpr.find(W + "vMerge") if tcpr is not None else None
                if vm is not None and vm.get(W + "val", "continue") != "restart":
                    origin = open_cells.get(col)
                    if origin is not None and origin["cs"] == span:
                        origin["rs"] += 1
                        for k in range(col, col + span):
                            occ.setdefault((r, k), origin)
                        still[col] = origin
                        col += span
                        continue
                cell = {"tc": tc, "r": r, "c": col, "rs": 1, "cs": span}
                cells.append(cell)
                for k in range(col, col + span):
                    occ.setdefault((r, k), cell)
                if vm is not None:
                    still[col] = cell
                col += span
            open_cells = still
            n_cols = max(n_cols, col)
        while len(grid) < n_cols:
            grid.append(self.twips(2000))
        xs = [0.0]
        for w in grid[:n_cols]:
            xs.append(xs[-1] + w)
        margin = self.twips(CELL_MARGIN_TWIPS)

        # cell contents and row heights
        min_line = LINE_PITCH * self.font_px(None)
        for cell in cells:
            x0 = xs[cell["c"]] + b
            x1 = xs[cell["c"] + cell["cs"]]
            inner_w = max(x1 - x0 - 2 * margin, CHAR_WIDTH * self.font_px(None))
            cell["content"] = self.stack(cell["tc"], part, inner_w)
        heights = []
        for r, tr in enumerate(rows):
            h = min_line
            for cell in cells:
                if cell["r"] == r and cell["rs"] == 1:
                    h = max(h, cell["content"].height)
            trpr = tr.find(W + "trPr")
            trh = trpr.find(W + "trHeight") if trpr is not None else None
            if trh is not None:
                want = self.twips(float(trh.get(W + "val", "0") or 0))
                h = want if trh.get(W + "hRule") == "exact" else max(h, want)
            heights.append(b + h)
        for cell in cells:
            if cell["rs"] > 1:
                last = cell["r"] + cell["rs"] - 1
                have = sum(heights[cell["r"]:last + 1]) - b
                if cell["content"].height > have:
                    heights[last] += cell["content"].height - have

        # rows grouped so vertically merged cells never straddle a slice
        groups, start, reach = [], 0, 0
        for r in range(len(rows)):
            for cell in cells:
                if cell["r"] == r:
                    reach = max(reach, r + cell["rs"] - 1)
            if reach <= r:
                groups.append((start, r))
                start = r + 1
                reach = r + 1
        if start < len(rows):
            groups.append((start, len(rows) - 1))

        width = xs[-1] + b
        n_rows = len(rows)
        slices = []
        for g0, g1 in groups:
            ys = {g0: 0.0}
            for r in range(g0, g1 + 1):
                ys[r + 1] = ys[r] + heights[r]
            last_group = g1 == n_rows - 1
            sl = Slice(ys[g1 + 1] + (b if last_group else 0.0))
            group_cells = [c for c in cells if g0 <= c["r"] <= g1]
            # fills
            for cell in group_cells:
                tcpr = cell["tc"].find(W + "tcPr")
                shd = tcpr.find(W + "shd") if tcpr is not None else None
                fill = shading_color(shd.get(W + "fill")) if shd is not None else None
                x0, x1 = xs[cell["c"]] + b, xs[cell["c"] + cell["cs"]]
                y0, y1 = ys[cell["r"]] + b, ys[cell["r"] + cell["rs"]]
                if fill is not None:
                    sl.ops.append(("fill", x0, y0, x1, y1, fill))
                sl.gt.append((self.locator(part, cell["tc"]), (x0, y0, x1, y1)))
            for r in range(g0, g1 + 1):
                # a row reaches down as far as the vertically merged cells that start in it
                bottom = max([ys[r + 1]] + [ys[c["r"] + c["rs"]] for c in group_cells if c["r"] == r])
                sl.gt.append((self.locator(part, rows[r]), (0.0, ys[r], width, bottom + b)))
            if b > 0:
                sl.ops.extend(self._border_ops(occ, rows, xs, ys, g0, g1, n_rows, n_cols, b, sides))
            for cell in group_cells:
                content = cell["content"]
                dx, dy = xs[cell["c"]] + b + margin, ys[cell["r"]] + b
                sl.ops.extend(_shift(content.ops, dx, dy))
                sl.gt.extend(_shift_gt(content.gt, dx, dy))
            sl.gt.append((tloc, (0.0, 0.0, width, sl.height)))
            for owner in owners:
                sl.gt.append((owner, (0.0, 0.0, avail, sl.height)))
            slices.append(sl)
        return slices

    def _border_ops(self, occ, rows, xs, ys, g0, g1, n_rows, n_cols, b, sides) -> list[Op]:
        ops: list[Op] = []

        def cell_side(cell, side):
            if cell is None:
                return False
            tcpr = cell["tc"].find(W + "tcPr")
            tcb = tcpr.find(W + "tcBorders") if tcpr is not None else None
            if tcb is None:
                return False
            el = tcb.find(W + side)
            if el is None and side in ("left", "right"):
                el = tcb.find(W + ("start" if side == "left" else "end"))
            return self._border_color(el)

        def resolve(candidates):
            color = False
            for c in candidates:
                if c is not False:
                    color = c
            return color

        # vertical segments
        for r in range(g0, g1 + 1):
            for k in range(n_cols + 1):
                left = occ.get((r, k - 1)) if k > 0 else None
                right = occ.get((r, k)) if k < n_cols else None
                if left is not None and left is right:
                    continue
                table_side = "left" if k == 0 else "right" if k == n_cols else "insideV"
                color = resolve([self._border_color(sides[table_side]), cell_side(left, "right"),
                                 cell_side(right, "left")])
                if color:
                    ops.append(("fill", xs[k], ys[r], xs[k] + b, ys[r + 1] + b, color))
        # horizontal segments
        for r in range(g0, g1 + 2):
            if r == g1 + 1 and r != n_rows:
                continue
            for k in range(n_cols):
                above = occ.get((r - 1, k)) if r > 0 else None
                below = occ.get((r, k)) if r < n_rows else None
                if above is not None and above is below:
                    continue
                table_side = "top" if r == 0 else "bottom" if r == n_rows else "insideH"
                color = resolve([self._border_color(sides[table_side]), cell_side(above, "bottom"),
                                 cell_side(below, "top")])
                if color:
                    ops.append(("fill", xs[k], ys[r], xs[k + 1] + b, ys[r] + b, color))
        return ops

    # pages ----------------------------------------------------------------
    def _section(self) -> dict:
        body = self.container.xml(MAIN_PART).getroot().find(W + "body")
        sect = body.find(W + "sectPr") if body is not None else None
        out = {"w": 12240.0, "h": 15840.0, "top": 1440.0, "bottom": 1440.0, "left": 1440.0,
               "right": 1440.0, "header": 720.0, "footer": 720.0}
        if sect is not None:
            sz = sect.find(W + "pgSz")
            if sz is not None:
                out["w"] = float(sz.get(W + "w", out["w"]))
                out["h"] = float(sz.get(W + "h", out["h"]))
            mar = sect.find(W + "pgMar")
            if mar is not None:
                for k in ("top", "bottom", "left", "right", "header", "footer"):
                    try:
                        out[k] = abs(float(mar.get(W + k, out[k])))
                    except ValueError:
                        pass
        return out

    def _header_footer(self) -> dict[str, tuple[str, etree._Element]]:
        body = self.container.xml(MAIN_PART).getroot().find(W + "body")
        sect = body.find(W + "sectPr") if body is not None else None
        out = {}
        if sect is None:
            return out
        rels = self.container.rels(MAIN_PART)
        for tag, key in (("headerReference", "header"), ("footerReference", "footer")):
            for ref in sect.findall(W + tag):
                if ref.get(W + "type", "default") != "default":
                    continue
                rel = rels.get(ref.get(R + "id", ""))
                if rel and not rel.external and self.container.has(rel.target):
                    out[key] = (rel.target, self.container.xml(rel.target).getroot())
        return out

    def pages(self, max_pages: int | None = None) -> list[Page]:
        sec = self._section()
        pw, ph = int(round(self.twips(sec["w"]))), int(round(self.twips(sec["h"])))
        left = self.twips(sec["left"])
        width = max(self.twips(sec["w"] - sec["left"] - sec["right"]), self.font_px(None))
        top = self.twips(sec["top"])
        bottom = ph - self.twips(sec["bottom"])

        hf = self._header_footer()
        header = footer = None
        if "header" in hf:
            part, root = hf["header"]
            header = self.stack(root, part, width, (self.locator(part, root),))
            top = max(top, self.twips(sec["header"]) + header.height)
        if "footer" in hf:
            part, root = hf["footer"]
            footer = self.stack(root, part, width, (self.locator(part, root),))
            bottom = min(bottom, ph - self.twips(sec["footer"]) - footer.height)
        if bottom - top < LINE_PITCH * self.font_px(None):
            bottom = top + LINE_PITCH * self.font_px(None)

        body = self.container.xml(MAIN_PART).getroot().find(W + "body")
        slices = self.block_slices(body, MAIN_PART, width) if body is not None else []

        pages: list[Page] = []

        def new_page() -> Page:
            if max_pages is not None and len(pages) >= max_pages:
                raise TooManyPagesInLayout(max_pages)
            page = Page(len(pages), pw, ph)
            for blk, y in ((header, self.twips(sec["header"])),
                           (footer, ph - self.twips(sec["footer"]) - (footer.height if footer else 0))):
                if blk is None:
                    continue
                page.ops.extend(_shift(blk.ops, left, y))
                for loc, rect in _shift_gt(blk.gt, left, y):
                    page.add_gt(loc, rect)
            pages.append(page)
            return page

        page = new_page()
        y = top
        force = False
        for sl in slices:
            at_top = y <= top + 1e-6
            if (sl.break_before or force) and not at_top:
                page, y = new_page(), top
            elif not sl.spacing and y + sl.height > bottom + 1e-6 and not at_top:
                page, y = new_page(), top
            force = sl.break_after
            if sl.spacing and y + sl.height > bottom:
                y = bottom
                continue
            page.ops.extend(_shift(sl.ops, left, y))
            for loc, rect in _shift_gt(sl.gt, left, y):
                page.add_gt(loc, rect)
            y += sl.height
        return pages


def _cells(tr: etree._Element):
    for child in tr:
        if child.tag == W + "tc":
            yield child
        elif child.tag in (W + "sdt", W + "customXml"):
            content = child.find(W + "sdtContent") if child.tag == W + "sdt" else child
            if content is not None:
                yield from (c for c in content if c.tag == W + "tc")


def _vml_size(style: str, dpi: int) -> tuple[float | None, float | None]:
    vals = {}
    for part in style.split(";"):
        if ":" in part:
            k, v = part.split(":", 1)
            vals[k.strip().lower()] = v.strip()

    def conv(v: str | None) -> float | None:
        if not v:
            return None
        m = re.fullmatch(r"([\d.]+)\s*(pt|in|px|cm|mm)?", v)
        if not m:
            return None
        n = float(m.group(1))
        unit = m.group(2) or "px"
        per_inch = {"pt": 72.0, "in": 1.0, "px": 96.0, "cm": 2.54, "mm": 25.4}[unit]
        return n / per_inch * dpi

    return conv(vals.get("width")), conv(vals.get("height"))
