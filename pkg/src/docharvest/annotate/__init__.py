"""Colorize classified documents, render them and turn colored regions into labeled boxes."""
from .annotator import (
    COCO_CATEGORIES,
    MIN_DOC_CHARS,
    AnnotationResult,
    CocoBuilder,
    PageAnnotation,
    annotate_document,
    extract_doc_text,
    load_page_annotations,
    plan_passes,
    table_structure_boxes,
    write_document_outputs,
)
from .colorize import ColorizeReport, XmlEditFailure, colorize, solid_image_like
from .colors import TOLERANCE, ColorMap
from .detect import Box, detect_bboxes, iou
from .grid import Band, DegenerateTable, TableGrid, derive_table_grid
from .pdf import PageText, UnsupportedPdfFeature, Word, extract_page_text
from .render import (
    DEFAULT_DPI,
    MAX_PAGES,
    MockRenderer,
    RenderCrash,
    RenderError,
    Renderer,
    RenderResult,
    RenderTimeout,
    SubprocessRenderer,
    TooManyPages,
)

__all__ = [
    "AnnotationResult", "Band", "Box", "COCO_CATEGORIES", "CocoBuilder", "ColorMap", "ColorizeReport",
    "DEFAULT_DPI", "DegenerateTable", "MAX_PAGES", "MIN_DOC_CHARS", "MockRenderer", "PageAnnotation",
    "PageText", "RenderCrash", "RenderError", "RenderResult", "RenderTimeout", "Renderer", "SubprocessRenderer",
    "TOLERANCE", "TableGrid", "TooManyPages", "UnsupportedPdfFeature", "Word", "XmlEditFailure",
    "annotate_document", "colorize", "derive_table_grid", "detect_bboxes", "extract_doc_text",
    "extract_page_text", "iou", "load_page_annotations", "plan_passes", "solid_image_like",
    "table_structure_boxes", "write_document_outputs",
]
