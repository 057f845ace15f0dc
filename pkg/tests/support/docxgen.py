"""Small synthetic .docx writer for fixtures."""
from __future__ import annotations

import io
import zipfile
from xml.sax.saxutils import escape

from PIL import Image

W_NS = "http://schemas.openxmlformats.org/wordprocessingml/2006/main"
NSDECL = (
    'xmlns:w="http://schemas.openxmlformats.org/wordprocessingml/2006/main" '
    'xmlns:r="http://schemas.openxmlformats.org/officeDocument/2006/relationships" '
    'xmlns:wp="http://schemas.openxmlformats.org/drawingml/2006/wordprocessingDrawing" '
    'xmlns:a="http://schemas.openxmlformats.org/drawingml/2006/main" '
    'xmlns:pic="http://schemas.openxmlformats.org/drawingml/2006/picture" '
    'xmlns:m="http://schemas.openxmlformats.org/officeDocument/2006/math" '
    'xmlns:mc="http://schemas.openxmlformats.org/markup-compatibility/2006" '
    'xmlns:wps="http://schemas.microsoft.com/office/word/2010/wordprocessingShape" '
    'xmlns:w14="http://schemas.microsoft.com/office/word/2010/wordml" '
    'xmlns:v="urn:schemas-microsoft-com:vml"'
)
EMU_PER_PX = 9525  # at 96 dpi

BUILTIN_STYLES = {
    "Title": ("Title", 56, True),
    **{f"Heading{i}": (f"heading {i}", max(36 - 2 * i, 22), True) for i in range(1, 10)},
    "Caption": ("caption", 18, False),
    "Quote": ("Quote", None, False),
    "BodyText": ("Body Text", None, False),
    "ListParagraph": ("List Paragraph", None, False),
    "FootnoteText": ("footnote text", 20, False),
    "Bibliography": ("Bibliography", None, False),
    "TOC1": ("toc 1", None, False),
    "CommentText": ("annotation text", 20, False),
}


def _t(text: str) -> str:
    return f'<w:t xml:space="preserve">{escape(text)}</w:t>'


def run_xml(text: str, size=None, bold=False, italic=False, underline=False, color=None,
            highlight=None, shading=None, rstyle=None) -> str:
    props = []
    if rstyle:
        props.append(f'<w:rStyle w:val="{rstyle}"/>')
    if bold:
        props.append("<w:b/>")
    if italic:
        props.append("<w:i/>")
    if color:
        props.append(f'<w:color w:val="{color}"/>')
    if size:
        props.append(f'<w:sz w:val="{size}"/>')
    if highlight:
        props.append(f'<w:highlight w:val="{highlight}"/>')
    if underline:
        props.append('<w:u w:val="single"/>')
    if shading:
        props.append(f'<w:shd w:val="clear" w:color="auto" w:fill="{shading}"/>')
    rpr = f"<w:rPr>{''.join(props)}</w:rPr>" if props else ""
    pieces = []
    for i, line in enumerate(text.split("\n")):
        if i:
            pieces.append("<w:br/>")
        if line:
            pieces.append(_t(line))
    return f"<w:r>{rpr}{''.join(pieces)}</w:r>"


def para_xml(text: str = "", style=None, runs: list[str] | None = None, page_break_before=False,
             num=False, **run_kw) -> str:
    ppr = []
    if style:
        ppr.append(f'<w:pStyle w:val="{style}"/>')
    if page_break_before:
        ppr.append("<w:pageBreakBefore/>")
    if num:
        ppr.append('<w:numPr><w:ilvl w:val="0"/><w:numId w:val="1"/></w:numPr>')
    ppr_xml = f"<w:pPr>{''.join(ppr)}</w:pPr>" if ppr else ""
    body = "".join(runs) if runs is not None else (run_xml(text, **run_kw) if text else "")
    return f"<w:p>{ppr_xml}{body}</w:p>"


class DocxBuilder:
    def __init__(self, default_size: int = 24, custom_styles: dict | None = None):
        self.default_size = default_size
        self.body: list[str] = []
        self.media: dict[str, bytes] = {}
        self.rels: list[tuple[str, str, str]] = []
        self.header_text: str | None = None
        self.footer_text: str | None = None
        self.custom_styles = dict(custom_styles or {})
        self.extra_parts: dict[str, bytes] = {}
        self.extra_rels: list[str] = []  # raw <Relationship .../> elements for document.xml.rels
        self.page_size = (12240, 15840)  # twips, US letter
        self.margins = 1440

    # body content -------------------------------------------------------
    def paragraph(self, text: str = "", style=None, **kw) -> "DocxBuilder":
        self.body.append(para_xml(text, style, **kw))
        return self

    def raw(self, xml: str) -> "DocxBuilder":
        self.body.append(xml)
        return self

    def _rel(self, rtype: str, target: str) -> str:
        rid = f"rId{len(self.rels) + 10}"
        self.rels.append((rid, rtype, target))
        return rid

    def image_xml(self, width_px: int, height_px: int, color=(30, 120, 200), fmt: str = "png",
                  display_px: tuple[int, int] | None = None) -> str:
        buf = io.BytesIO()
        Image.new("RGB", (width_px, height_px), color).save(buf, format="PNG" if fmt == "png" else "JPEG")
        name = f"image{len(self.media) + 1}.{fmt}"
        self.media[name] = buf.getvalue()
        rid = self._rel("http://schemas.openxmlformats.org/officeDocument/2006/relationships/image",
                        f"media/{name}")
        dw, dh = display_px or (width_px, height_px)
        cx, cy = dw * EMU_PER_PX, dh * EMU_PER_PX
        n = len(self.media)
        return (
            f'<w:r><w:drawing><wp:inline><wp:extent cx="{cx}" cy="{cy}"/>'
            f'<wp:docPr id="{n}" name="Picture {n}"/>'
            '<a:graphic><a:graphicData uri="http://schemas.openxmlformats.org/drawingml/2006/picture">'
            f'<pic:pic><pic:nvPicPr><pic:cNvPr id="{n}" name="{name}"/><pic:cNvPicPr/></pic:nvPicPr>'
            f'<pic:blipFill><a:blip r:embed="{rid}"/></pic:blipFill>'
            f'<pic:spPr><a:xfrm><a:off x="0" y="0"/><a:ext cx="{cx}" cy="{cy}"/></a:xfrm></pic:spPr>'
            '</pic:pic></a:graphicData></a:graphic></wp:inline></w:drawing></w:r>'
        )

    def image(self, width_px: int, height_px: int, caption: str = "", **kw) -> "DocxBuilder":
        runs = [self.image_xml(width_px, height_px, **kw)]
        if caption:
            runs.append(run_xml(caption))
        self.body.append(para_xml(runs=runs))
        return self

    def textbox(self, *texts: str, width_px: int = 200, height_px: int = 60) -> "DocxBuilder":
        inner = "".join(para_xml(t) for t in texts)
        cx, cy = width_px * EMU_PER_PX, height_px * EMU_PER_PX
        self.body.append(
            '<w:p><w:r><mc:AlternateContent><mc:Choice Requires="wps"><w:drawing>'
            f'<wp:inline><wp:extent cx="{cx}" cy="{cy}"/><wp:docPr id="99" name="Text Box"/>'
            '<a:graphic><a:graphicData uri="http://schemas.microsoft.com/office/word/2010/wordprocessingShape">'
            f'<wps:wsp><wps:txbx><w:txbxContent>{inner}</w:txbxContent></wps:txbx></wps:wsp>'
            '</a:graphicData></a:graphic></wp:inline></w:drawing></mc:Choice>'
            f'<mc:Fallback><w:pict><v:textbox><w:txbxContent>{inner}</w:txbxContent></v:textbox></w:pict>'
            '</mc:Fallback></mc:AlternateContent></w:r></w:p>'
        )
        return self

    def table(self, rows: list[list], header_rows: int = 0, widths: list[int] | None = None,
              border_size: int = 4, style: str | None = None) -> "DocxBuilder":
        """rows: cells are str, or dicts with text/span/vmerge ("restart"|"continue")."""
        n_cols = max(sum((c.get("span", 1) if isinstance(c, dict) else 1) for c in row) for row in rows)
        widths = widths or [2000] * n_cols
        grid = "".join(f'<w:gridCol w:w="{w}"/>' for w in widths)
        borders = "".join(
            f'<w:{side} w:val="single" w:sz="{border_size}" w:space="0" w:color="000000"/>'
            for side in ("top", "left", "bottom", "right", "insideH", "insideV"))
        style_xml = f'<w:tblStyle w:val="{style}"/>' if style else ""
        out = [f'<w:tbl><w:tblPr>{style_xml}<w:tblW w:w="0" w:type="auto"/>'
               f'<w:tblBorders>{borders}</w:tblBorders></w:tblPr><w:tblGrid>{grid}</w:tblGrid>']
        for r, row in enumerate(rows):
            trpr = "<w:trPr><w:tblHeader/></w:trPr>" if r < header_rows else ""
            cells = []
            col = 0
            for c in row:
                spec = c if isinstance(c, dict) else {"text": c}
                span = spec.get("span", 1)
                tcpr = [f'<w:tcW w:w="{sum(widths[col:col + span])}" w:type="dxa"/>']
                if span > 1:
                    tcpr.append(f'<w:gridSpan w:val="{span}"/>')
                if spec.get("vmerge") == "restart":
                    tcpr.append('<w:vMerge w:val="restart"/>')
                elif spec.get("vmerge") == "continue":
                    tcpr.append("<w:vMerge/>")
                paras = "".join(para_xml(t) for t in spec.get("text", "").split("\n\n")) or "<w:p/>"
                if spec.get("vmerge") == "continue":
                    paras = "<w:p/>"
                cells.append(f"<w:tc><w:tcPr>{''.join(tcpr)}</w:tcPr>{paras}</w:tc>")
                col += span
            out.append(f"<w:tr>{trpr}{''.join(cells)}</w:tr>")
        out.append("</w:tbl>")
        self.body.append("".join(out))
        return self

    def toc(self, entries: list[str]) -> "DocxBuilder":
        paras = "".join(para_xml(e, "TOC1") for e in entries)
        self.body.append(
            '<w:sdt><w:sdtPr><w:docPartObj><w:docPartGallery w:val="Table of Contents"/>'
            f'<w:docPartUnique/></w:docPartObj></w:sdtPr><w:sdtContent>{paras}</w:sdtContent></w:sdt>')
        return self

    def form_block(self, text: str) -> "DocxBuilder":
        self.body.append(
            '<w:sdt><w:sdtPr><w:tag w:val="field"/><w:text/></w:sdtPr>'
            f'<w:sdtContent>{para_xml(text)}</w:sdtContent></w:sdt>')
        return self

    def inline_form(self, label: str, value: str) -> "DocxBuilder":
        self.body.append(
            f'<w:p>{run_xml(label)}<w:sdt><w:sdtPr><w:tag w:val="v"/><w:text/></w:sdtPr>'
            f'<w:sdtContent>{run_xml(value)}</w:sdtContent></w:sdt></w:p>')
        return self

    def legacy_form(self, label: str) -> "DocxBuilder":
        self.body.append(
            f'<w:p>{run_xml(label)}<w:r><w:fldChar w:fldCharType="begin"><w:ffData><w:name w:val="F1"/>'
            '<w:textInput/></w:ffData></w:fldChar></w:r><w:r><w:instrText> FORMTEXT </w:instrText></w:r>'
            '<w:r><w:fldChar w:fldCharType="separate"/></w:r>' + run_xml("     ") +
            '<w:r><w:fldChar w:fldCharType="end"/></w:r></w:p>')
        return self

    def equation(self, text: str) -> "DocxBuilder":
        self.body.append(
            f'<w:p><m:oMathPara><m:oMath><m:r><m:t>{escape(text)}</m:t></m:r></m:oMath></m:oMathPara></w:p>')
        return self

    def header(self, text: str) -> "DocxBuilder":
        self.header_text = text
        return self

    def footer(self, text: str) -> "DocxBuilder":
        self.footer_text = text
        return self

    # packaging ----------------------------------------------------------
    def styles_xml(self) -> str:
        out = [f'<w:styles {NSDECL}><w:docDefaults><w:rPrDefault><w:rPr>'
               f'<w:sz w:val="{self.default_size}"/></w:rPr></w:rPrDefault>'
               '<w:pPrDefault><w:pPr><w:spacing w:after="120" w:line="240" w:lineRule="auto"/></w:pPr>'
               '</w:pPrDefault></w:docDefaults>',
               '<w:style w:type="paragraph" w:default="1" w:styleId="Normal"><w:name w:val="Normal"/></w:style>',
               '<w:style w:type="table" w:default="1" w:styleId="TableNormal"><w:name w:val="Normal Table"/>'
               '</w:style>']
        styles = {k: v for k, v in BUILTIN_STYLES.items()}
        styles.update(self.custom_styles)
        for sid, spec in styles.items():
            name, size, bold = spec[:3]
            based = spec[3] if len(spec) > 3 else "Normal"
            rpr = ""
            if size or bold:
                rpr = "<w:rPr>" + ("<w:b/>" if bold else "") + (f'<w:sz w:val="{size}"/>' if size else "") + "</w:rPr>"
            based_xml = f'<w:basedOn w:val="{based}"/>' if based else ""
            out.append(f'<w:style w:type="paragraph" w:styleId="{sid}"><w:name w:val="{name}"/>'
                       f"{based_xml}{rpr}</w:style>")
        out.append("</w:styles>")
        return "".join(out)

    def build(self) -> bytes:
        sect_refs = ""
        hdr_parts = {}
        if self.header_text is not None:
            rid = self._rel("http://schemas.openxmlformats.org/officeDocument/2006/relationships/header",
                            "header1.xml")
            sect_refs += f'<w:headerReference w:type="default" r:id="{rid}"/>'
            hdr_parts["word/header1.xml"] = f"<w:hdr {NSDECL}>{para_xml(self.header_text)}</w:hdr>"
        if self.footer_text is not None:
            rid = self._rel("http://schemas.openxmlformats.org/officeDocument/2006/relationships/footer",
                            "footer1.xml")
            sect_refs += f'<w:footerReference w:type="default" r:id="{rid}"/>'
            hdr_parts["word/footer1.xml"] = f"<w:ftr {NSDECL}>{para_xml(self.footer_text)}</w:ftr>"
        pw, ph = self.page_size
        m = self.margins
        sect = (f"<w:sectPr>{sect_refs}<w:pgSz w:w=\"{pw}\" w:h=\"{ph}\"/>"
                f'<w:pgMar w:top="{m}" w:right="{m}" w:bottom="{m}" w:left="{m}" w:header="720" '
                'w:footer="720" w:gutter="0"/></w:sectPr>')
        document = f"<w:document {NSDECL}><w:body>{''.join(self.body)}{sect}</w:body></w:document>"
        rels = ['<Relationships xmlns="http://schemas.openxmlformats.org/package/2006/relationships">',
                '<Relationship Id="rId1" Type="http://schemas.openxmlformats.org/officeDocument/2006/'
                'relationships/styles" Target="styles.xml"/>']
        rels += [f'<Relationship Id="{rid}" Type="{t}" Target="{target}"/>' for rid, t, target in self.rels]
        rels += self.extra_rels
        rels.append("</Relationships>")
        content_types = (
            '<Types xmlns="http://schemas.openxmlformats.org/package/2006/content-types">'
            '<Default Extension="rels" ContentType="application/vnd.openxmlformats-package.relationships+xml"/>'
            '<Default Extension="xml" ContentType="application/xml"/>'
            '<Default Extension="png" ContentType="image/png"/>'
            '<Default Extension="jpeg" ContentType="image/jpeg"/>'
            '<Override PartName="/word/document.xml" ContentType="application/vnd.openxmlformats-'
            'officedocument.wordprocessingml.document.main+xml"/></Types>')
        buf = io.BytesIO()
        with zipfile.ZipFile(buf, "w", zipfile.ZIP_DEFLATED) as zf:
            zf.writestr("[Content_Types].xml", content_types)
            zf.writestr("_rels/.rels",
                        '<Relationships xmlns="http://schemas.openxmlformats.org/package/2006/relationships">'
                        '<Relationship Id="rId1" Type="http://schemas.openxmlformats.org/officeDocument/2006/'
                        'relationships/officeDocument" Target="word/document.xml"/></Relationships>')
            zf.writestr("word/document.xml", document)
            zf.writestr("word/styles.xml", self.styles_xml())
            zf.writestr("word/_rels/document.xml.rels", "".join(rels))
            for name, xml in hdr_parts.items():
                zf.writestr(name, xml)
            for name, data in self.media.items():
                zf.writestr(f"word/media/{name}", data)
            for name, data in self.extra_parts.items():
                zf.writestr(name, data)
        return buf.getvalue()


def zip_with_ratio(declared_ratio: float, target_size: int = 1024) -> bytes:
    """A docx-shaped zip whose declared uncompressed total is close to ratio × file size.

    Uses stored entries with patched central-directory sizes so the ratio can
    be hit precisely without real compression.
    """
    base = DocxBuilder().paragraph("x").build()
    zf_in = zipfile.ZipFile(io.BytesIO(base))
    buf = io.BytesIO()
    with zipfile.ZipFile(buf, "w", zipfile.ZIP_STORED) as zf:
        for info in zf_in.infolist():
            zf.writestr(info.filename, zf_in.read(info.filename))
        zf.writestr("word/pad.bin", b"\0" * max(0, target_size - len(base)))
    data = bytearray(buf.getvalue())
    return bytes(_patch_declared(data, declared_ratio))


def _patch_declared(data: bytearray, ratio: float) -> bytearray:
    """Rewrite the pad entry's uncompressed size in the central directory."""
    import struct
    zf = zipfile.ZipFile(io.BytesIO(bytes(data)))
    infos = zf.infolist()
    others = sum(i.file_size for i in infos if i.filename != "word/pad.bin")
    want = int(ratio * len(data)) - others
    cd = data.find(b"PK\x01\x02")
    while cd != -1:
        name_len, = struct.unpack_from("<H", data, cd + 28)
        name = bytes(data[cd + 46: cd + 46 + name_len])
        if name == b"word/pad.bin":
            struct.pack_into("<I", data, cd + 24, want)
        cd = data.find(b"PK\x01\x02", cd + 4)
    return data


def png_header(width: int, height: int) -> bytes:
    """A PNG declaring the given size but carrying no pixel data."""
    import struct
    import zlib

    def chunk(tag: bytes, body: bytes) -> bytes:
        return (struct.pack(">I", len(body)) + tag + body
                + struct.pack(">I", zlib.crc32(tag + body) & 0xFFFFFFFF))
    ihdr = struct.pack(">IIBBBBB", width, height, 8, 2, 0, 0, 0)
    return b"\x89PNG\r\n\x1a\n" + chunk(b"IHDR", ihdr) + chunk(b"IDAT", b"") + chunk(b"IEND", b"")
