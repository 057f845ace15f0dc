from __future__ import annotations

import logging
import re
from dataclasses import dataclass, field

from lxml import etree

from .container import W, Container
from .model import SemanticCategory

logger = logging.getLogger(__name__)

STYLES_PART = "word/styles.xml"
DEFAULT_FONT_HALF_POINTS = 20  # used when the package declares no document default

_FALSE = {"0", "false", "off", "none"}


def on_off(el: etree._Element | None) -> bool | None:
    if el is None:
        return None
    val = el.get(W + "val")
    return val is None or val.lower() not in _FALSE


@dataclass(frozen=True)
class RunProps:
    size: int | None = None
    bold: bool | None = None
    italic: bool | None = None
    underline: bool | None = None
    color: str | None = None
    shading: str | None = None
    highlight: str | None = None

    def merged(self, over: "RunProps") -> "RunProps":
        """`over` wins wherever it sets a value."""
        return RunProps(**{
            k: (getattr(over, k) if getattr(over, k) is not None else getattr(self, k))
            for k in self.__dataclass_fields__
        })


@dataclass(frozen=True)
class ParaProps:
    space_before: int | None = None  # twips
    space_after: int | None = None
    line: int | None = None  # 240ths of a line when auto

    def merged(self, over: "ParaProps") -> "ParaProps":
        return ParaProps(**{
            k: (getattr(over, k) if getattr(over, k) is not None else getattr(self, k))
            for k in self.__dataclass_fields__
        })


def parse_rpr(rpr: etree._Element | None) -> RunProps:
    if rpr is None:
        return RunProps()
    sz = rpr.find(W + "sz")
    size = None
    if sz is not None:
        try:
            size = int(float(sz.get(W + "val", "")))
        except ValueError:
            size = None
    u = rpr.find(W + "u")
    underline = None
    if u is not None:
        underline = u.get(W + "val", "single").lower() != "none"
    color = rpr.find(W + "color")
    shd = rpr.find(W + "shd")
    hl = rpr.find(W + "highlight")
    return RunProps(
        size=size,
        bold=on_off(rpr.find(W + "b")),
        italic=on_off(rpr.find(W + "i")),
        underline=underline,
        color=color.get(W + "val") if color is not None else None,
        shading=shd.get(W + "fill") if shd is not None else None,
        highlight=hl.get(W + "val") if hl is not None else None,
    )


def _twips(el: etree._Element | None, attr: str) -> int | None:
    if el is None or el.get(W + attr) is None:
        return None
    try:
        return int(float(el.get(W + attr)))
    except ValueError:
        return None


def parse_ppr(ppr: etree._Element | None) -> ParaProps:
    if ppr is None:
        return ParaProps()
    sp = ppr.find(W + "spacing")
    return ParaProps(_twips(sp, "before"), _twips(sp, "after"), _twips(sp, "line"))


@dataclass
class Style:
    style_id: str
    name: str
    type: str
    based_on: str | None
    rpr: RunProps
    ppr: ParaProps
    element: etree._Element | None = field(default=None, repr=False)


def normalize_name(name: str) -> str:
    return re.sub(r"\s+", " ", name.strip().lower())


# Built-in style names are stored in English regardless of UI locale, so the
# w:name value (not the localized styleId) is the stable key.
BUILTIN_NAMES: dict[str, SemanticCategory] = {
    "title": SemanticCategory.Title,
    **{f"heading {i}": SemanticCategory.heading(i) for i in range(1, 10)},
    "body text": SemanticCategory.PlainText,
    "body text 2": SemanticCategory.PlainText,
    "body text 3": SemanticCategory.PlainText,
    "body text indent": SemanticCategory.PlainText,
    "body text indent 2": SemanticCategory.PlainText,
    "body text indent 3": SemanticCategory.PlainText,
    "body text first indent": SemanticCategory.PlainText,
    "body text first indent 2": SemanticCategory.PlainText,
    "plain text": SemanticCategory.PlainText,
    "list paragraph": SemanticCategory.ListItem,
    **{f"list{s}": SemanticCategory.ListItem for s in ("", " 2", " 3", " 4", " 5")},
    **{f"list bullet{s}": SemanticCategory.ListItem for s in ("", " 2", " 3", " 4", " 5")},
    **{f"list number{s}": SemanticCategory.ListItem for s in ("", " 2", " 3", " 4", " 5")},
    **{f"list continue{s}": SemanticCategory.ListItem for s in ("", " 2", " 3", " 4", " 5")},
    "footnote text": SemanticCategory.Footnote,
    "endnote text": SemanticCategory.Footnote,
    "quote": SemanticCategory.Quote,
    "intense quote": SemanticCategory.Quote,
    "block text": SemanticCategory.Quote,
    "bibliography": SemanticCategory.Bibliography,
    "toc heading": SemanticCategory.TableOfContents,
    **{f"toc {i}": SemanticCategory.TableOfContents for i in range(1, 10)},
    "table of figures": SemanticCategory.TableOfContents,
    "annotation text": SemanticCategory.Annotation,
    "comment text": SemanticCategory.Annotation,
    "header": SemanticCategory.Header,
    "footer": SemanticCategory.Footer,
}
CAPTION_NAME = "caption"
# names that carry no intent: the default paragraph style is what users get without choosing
NEUTRAL_NAMES = {"normal", "default paragraph font", "no spacing", "normal (web)", "default"}


class StyleRegistry:
    def __init__(self, styles: dict[str, Style], doc_run: RunProps, doc_para: ParaProps,
                 default_paragraph: str | None, default_table: str | None = None):
        self.styles = styles
        self.doc_run = doc_run
        self.doc_para = doc_para
        self.default_paragraph = default_paragraph
        self.default_table = default_table
        self._run_cache: dict[str, RunProps] = {}

    @classmethod
    def from_container(cls, container: Container) -> "StyleRegistry":
        if not container.has(STYLES_PART):
            return cls({}, RunProps(size=DEFAULT_FONT_HALF_POINTS), ParaProps(), None)
        root = container.xml(STYLES_PART).getroot()
        return cls.from_element(root)

    @classmethod
    def from_element(cls, root: etree._Element) -> "StyleRegistry":
        doc_run = RunProps(size=DEFAULT_FONT_HALF_POINTS)
        doc_para = ParaProps()
        defaults = root.find(W + "docDefaults")
        if defaults is not None:
            doc_run = doc_run.merged(parse_rpr(defaults.find(f"{W}rPrDefault/{W}rPr")))
            doc_para = doc_para.merged(parse_ppr(defaults.find(f"{W}pPrDefault/{W}pPr")))
        styles = {}
        default_paragraph = default_table = None
        for st in root.iter(W + "style"):
            sid = st.get(W + "styleId")
            if not sid:
                continue
            name_el = st.find(W + "name")
            based = st.find(W + "basedOn")
            stype = st.get(W + "type", "paragraph")
            styles[sid] = Style(
                style_id=sid,
                name=name_el.get(W + "val", sid) if name_el is not None else sid,
                type=stype,
                based_on=based.get(W + "val") if based is not None else None,
                rpr=parse_rpr(st.find(W + "rPr")),
                ppr=parse_ppr(st.find(W + "pPr")),
                element=st,
            )
            if st.get(W + "default") in ("1", "true", "on"):
                if stype == "paragraph":
                    default_paragraph = sid
                elif stype == "table":
                    default_table = sid
        return cls(styles, doc_run, doc_para, default_paragraph, default_table)

    def chain(self, style_id: str | None) -> list[Style]:
        """The style and its basedOn ancestors, nearest first (cycle-safe)."""
        out: list[Style] = []
        seen = set()
        while style_id and style_id in self.styles and style_id not in seen:
            seen.add(style_id)
            st = self.styles[style_id]
            out.append(st)
            style_id = st.based_on
        return out

    def name(self, style_id: str | None) -> str | None:
        if style_id is None:
            style_id = self.default_paragraph
        st = self.styles.get(style_id or "")
        return st.name if st else style_id

    def style_run_props(self, style_id: str | None) -> RunProps:
        key = style_id or ""
        if key not in self._run_cache:
            props = RunProps()
            for st in reversed(self.chain(style_id)):
                props = props.merged(st.rpr)
            self._run_cache[key] = props
        return self._run_cache[key]

    def run_props(self, para_style: str | None, run_style: str | None, direct: RunProps) -> RunProps:
        if para_style is None:
            para_style = self.default_paragraph
        props = self.doc_run.merged(self.style_run_props(para_style))
        if run_style:
            props = props.merged(self.style_run_props(run_style))
        return props.merged(direct)

    def para_props(self, para_style: str | None, direct: ParaProps) -> ParaProps:
        if para_style is None:
            para_style = self.default_paragraph
        props = self.doc_para
        for st in reversed(self.chain(para_style)):
            props = props.merged(st.ppr)
        return props.merged(direct)

    def builtin_category(self, style_id: str | None) -> tuple[SemanticCategory | None, str | None]:
        """Category of the nearest built-in style in the chain, plus the matched name.

        The matched name is "caption" for caption styles, whose category
        depends on context and is settled by the caller.
        """
        for st in self.chain(style_id):
            key = normalize_name(st.name)
            if key in BUILTIN_NAMES:
                return BUILTIN_NAMES[key], key
            if key == CAPTION_NAME:
                return None, key
        return None, None

    def table_borders(self, style_id: str | None) -> etree._Element | None:
        if style_id is None:
            style_id = self.default_table
        for st in self.chain(style_id):
            if st.element is None:
                continue
            borders = st.element.find(f"{W}tblPr/{W}tblBorders")
            if borders is not None:
                return borders
        return None
