"""Open XML word-processing documents to classified element models."""
from .classify import (
    classify_builtin,
    classify_content,
    classify_document,
    classify_font_rank,
    classify_style_match,
    classify_xmltag,
)
from .container import Container, ContainerError, InvalidZip, OversizeImage, ZipBomb, open_container
from .model import (
    ClassProvenance,
    DocElement,
    DocumentModel,
    ElementKind,
    SemanticCategory,
    StyleSignature,
    TableCellModel,
    TableModel,
)
from .parse import MalformedTable, ParsedDocument, parse_container, parse_tables
from .styles import StyleRegistry


def parse_document(data: bytes, source_hash: str = "") -> ParsedDocument:
    """Open, parse and classify a .docx payload."""
    return classify_document(parse_container(open_container(data), source_hash))


__all__ = [
    "ClassProvenance", "Container", "ContainerError", "DocElement", "DocumentModel", "ElementKind",
    "InvalidZip", "MalformedTable", "OversizeImage", "ParsedDocument", "SemanticCategory",
    "StyleRegistry", "StyleSignature", "TableCellModel", "TableModel", "ZipBomb",
    "classify_builtin", "classify_content", "classify_document", "classify_font_rank",
    "classify_style_match", "classify_xmltag", "open_container", "parse_container",
    "parse_document", "parse_tables",
]
