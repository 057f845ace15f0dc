from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from enum import Enum


class SemanticCategory(str, Enum):
    Title = "Title"
    Heading1 = "Heading1"
    Heading2 = "Heading2"
    Heading3 = "Heading3"
    Heading4 = "Heading4"
    Heading5 = "Heading5"
    Heading6 = "Heading6"
    Heading7 = "Heading7"
    Heading8 = "Heading8"
    Heading9 = "Heading9"
    PlainText = "PlainText"
    ListItem = "ListItem"
    Header = "Header"
    Footer = "Footer"
    TableHeader = "TableHeader"
    TableHeaderCell = "TableHeaderCell"
    Table = "Table"
    TableCell = "TableCell"
    TableOfContents = "TableOfContents"
    Bibliography = "Bibliography"
    Quote = "Quote"
    Equation = "Equation"
    Figure = "Figure"
    TableCaption = "TableCaption"
    Footnote = "Footnote"
    Annotation = "Annotation"
    FormField = "FormField"
    FormTag = "FormTag"
    TableRow = "TableRow"
    TableColumn = "TableColumn"

    @classmethod
    def heading(cls, level: int) -> "SemanticCategory":
        return cls(f"Heading{min(max(level, 1), 9)}")

    @property
    def is_heading(self) -> bool:
        return self.value.startswith("Heading")


HEADINGS = tuple(SemanticCategory.heading(i) for i in range(1, 10))
# never produced by parsing; derived from detected cell boxes
DERIVED_CATEGORIES = (SemanticCategory.TableRow, SemanticCategory.TableColumn)
# categories that count as reliable even without any characters
UNIT_RELIABLE = (SemanticCategory.Table, SemanticCategory.Figure)


class ClassProvenance(str, Enum):
    BuiltinStyle = "BuiltinStyle"
    XmlTag = "XmlTag"
    HeuristicStyleMatch = "HeuristicStyleMatch"
    HeuristicContent = "HeuristicContent"
    HeuristicFontRank = "HeuristicFontRank"
    FallbackPlainText = "FallbackPlainText"

    @property
    def reliable(self) -> bool:
        return self in (ClassProvenance.BuiltinStyle, ClassProvenance.XmlTag)


PASS_ORDER = tuple(ClassProvenance)


class ElementKind(str, Enum):
    """Structural role of an element, independent of its semantic category."""

    paragraph = "paragraph"
    textbox = "textbox"
    table = "table"
    header_row = "header_row"
    cell = "cell"
    figure = "figure"
    header = "header"
    footer = "footer"
    toc_block = "toc_block"
    form_block = "form_block"


@dataclass(frozen=True)
class StyleSignature:
    font_size: int  # half-points
    bold: bool = False
    underline: bool = False
    italic: bool = False
    # informational only: a pasted copy of a styled heading keeps the look, not the style name
    style_name: str | None = field(default=None, compare=False)


@dataclass
class DocElement:
    element_id: int
    kind: ElementKind
    text: str
    styling: StyleSignature
    xml_locator: str
    category: SemanticCategory | None = None
    provenance: ClassProvenance | None = None
    parent_id: int | None = None

    @property
    def char_count(self) -> int:
        return len(self.text)

    @property
    def visible(self) -> bool:
        return bool(self.text.strip()) or self.kind in (
            ElementKind.figure, ElementKind.table, ElementKind.header_row, ElementKind.cell)

    def assign(self, category: SemanticCategory, provenance: ClassProvenance) -> None:
        if self.category is not None:
            raise ValueError(f"element {self.element_id} already classified")
        self.category = category
        self.provenance = provenance


@dataclass(frozen=True)
class TableCellModel:
    cell_id: int
    row_index: int
    col_index: int
    row_span: int
    col_span: int
    is_header_cell: bool
    text: str


@dataclass
class TableModel:
    table_id: int
    cells: list[TableCellModel]
    n_rows: int
    n_cols: int


@dataclass
class DocumentModel:
    elements: list[DocElement]
    tables: list[TableModel]
    source_hash: str = ""
    page_count: int | None = None
    malformed_tables: int = 0
    unmapped_styles: list[str] = field(default_factory=list)

    def by_id(self, element_id: int) -> DocElement:
        return self.elements[element_id]

    def body_elements(self) -> list[DocElement]:
        return [e for e in self.elements if e.kind not in (ElementKind.header, ElementKind.footer)]

    def to_dict(self) -> dict:
        out = asdict(self)
        for el in out["elements"]:
            el["char_count"] = len(el["text"])
            el["styling"]["style_name"] = el["styling"].get("style_name")
        return out

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), ensure_ascii=False, sort_keys=True, default=_enum_value)

    @classmethod
    def from_dict(cls, data: dict) -> "DocumentModel":
        elements = []
        for el in data["elements"]:
            el = dict(el)
            el.pop("char_count", None)
            el["kind"] = ElementKind(el["kind"])
            el["styling"] = StyleSignature(**el["styling"])
            if el.get("category"):
                el["category"] = SemanticCategory(el["category"])
            if el.get("provenance"):
                el["provenance"] = ClassProvenance(el["provenance"])
            elements.append(DocElement(**el))
        tables = [
            TableModel(t["table_id"], [TableCellModel(**c) for c in t["cells"]], t["n_rows"], t["n_cols"])
            for t in data["tables"]
        ]
        return cls(elements, tables, data.get("source_hash", ""), data.get("page_count"),
                   data.get("malformed_tables", 0), list(data.get("unmapped_styles", [])))


def _enum_value(obj):
    if isinstance(obj, Enum):
        return obj.value
    raise TypeError(f"not serializable: {type(obj).__name__}")
