"""A small PDF writer for rendered text and a reader for page-level text extraction.

The reader handles the subset office converters emit for plain documents:
uncompressed or deflate-compressed content streams, simple fonts (with
/Widths or a standard monospace face, optional ToUnicode maps) and the
Tj/TJ/'/"/Td/TD/Tm/T* text operators. Everything else raises
UnsupportedPdfFeature so callers can keep the page with empty text.
"""
from __future__ import annotations

import re
import zlib
from dataclasses import dataclass, field


class UnsupportedPdfFeature(Exception):
    pass


# writer -----------------------------------------------------------------

def _pdf_string(text: str) -> bytes:
    raw = text.encode("cp1252", errors="replace")
    return b"(" + raw.replace(b"\\", b"\\\\").replace(b"(", b"\\(").replace(b")", b"\\)") + b")"


def write_pdf(pages: list[tuple[float, float, list[tuple[float, float, float, str]]]]) -> bytes:
    """pages: (width_pt, height_pt, [(x_pt, baseline_pt, size_pt, text)]) in PDF user space."""
    objects: list[bytes] = []
    n_pages = len(pages)
    font_id = 3
    page_ids = [4 + 2 * i for i in range(n_pages)]
    objects.append(b"<< /Type /Catalog /Pages 2 0 R >>")
    kids = b" ".join(b"%d 0 R" % i for i in page_ids)
    objects.append(b"<< /Type /Pages /Kids [" + kids + b"] /Count %d >>" % n_pages)
    objects.append(b"<< /Type /Font /Subtype /Type1 /BaseFont /Courier /Encoding /WinAnsiEncoding >>")
    for i, (w, h, texts) in enumerate(pages):
        ops = []
        for x, y, size, text in texts:
            ops.append(b"BT /F1 %s Tf 1 0 0 1 %s %s Tm %s Tj ET" % (
                _num(size), _num(x), _num(y), _pdf_string(text)))
        stream = zlib.compress(b"\n".join(ops))
        objects.append(b"<< /Type /Page /Parent 2 0 R /MediaBox [0 0 %s %s] /Resources << /Font << /F1 %d 0 R >> >>"
                       b" /Contents %d 0 R >>" % (_num(w), _num(h), font_id, page_ids[i] + 1))
        objects.append(b"<< /Length %d /Filter /FlateDecode >>\nstream\n" % len(stream) + stream + b"\nendstream")
    out = bytearray(b"%PDF-1.4\n%\xe2\xe3\xcf\xd3\n")
    offsets = []
    for n, body in enumerate(objects, start=1):
        offsets.append(len(out))
        out += b"%d 0 obj\n" % n + body + b"\nendobj\n"
    xref = len(out)
    out += b"xref\n0 %d\n0000000000 65535 f \n" % (len(objects) + 1)
    for off in offsets:
        out += b"%010d 00000 n \n" % off
    out += b"trailer\n<< /Size %d /Root 1 0 R >>\nstartxref\n%d\n%%%%EOF\n" % (len(objects) + 1, xref)
    return bytes(out)


def _num(v: float) -> bytes:
    s = ("%.4f" % v).rstrip("0").rstrip(".")
    return (s or "0").encode()


# lexer / object parser ----------------------------------------------------

@dataclass(frozen=True)
class Ref:
    num: int
    gen: int


class Name(str):
    pass


class Op(str):
    pass


@dataclass
class Stream:
    dict: dict
    raw: bytes


_WS = b" \t\r\n\f\0"
_DELIM = b"()<>[]{}/%"
_NUM = re.compile(rb"[+-]?(?:\d+\.?\d*|\.\d+)")


class Lexer:
    def __init__(self, data: bytes, pos: int = 0):
        self.data = data
        self.pos = pos

    def skip_ws(self) -> None:
        d, n = self.data, len(self.data)
        while self.pos < n:
            c = d[self.pos]
            if c in _WS:
                self.pos += 1
            elif c == 0x25:  # comment
                while self.pos < n and d[self.pos] not in b"\r\n":
                    self.pos += 1
            else:
                break

    def token(self):
        """Next primitive token, or None at end of data."""
        self.skip_ws()
        d = self.data
        if self.pos >= len(d):
            return None
        c = d[self.pos:self.pos + 1]
        if c == b"/":
            m = re.compile(rb"/[^\s()<>\[\]{}/%]*").match(d, self.pos)
            self.pos = m.end()
            name = re.sub(rb"#([0-9A-Fa-f]{2})", lambda g: bytes([int(g.group(1), 16)]), m.group()[1:])
            return Name(name.decode("latin-1"))
        if c == b"(":
            return self._literal()
        if d[self.pos:self.pos + 2] in (b"<<", b">>"):
            self.pos += 2
            return Op(d[self.pos - 2:self.pos].decode())
        if c == b"<":
            end = d.index(b">", self.pos)
            hexs = re.sub(rb"\s", b"", d[self.pos + 1:end])
            if len(hexs) % 2:
                hexs += b"0"
            self.pos = end + 1
            return bytes.fromhex(hexs.decode())
        if c in (b"[", b"]", b"{", b"}"):
            self.pos += 1
            return Op(c.decode())
        m = _NUM.match(d, self.pos)
        if m and (m.end() >= len(d) or d[m.end()] in _WS or d[m.end()] in _DELIM):
            self.pos = m.end()
            s = m.group()
            return float(s) if b"." in s else int(s)
        start = self.pos
        while self.pos < len(d) and d[self.pos] not in _WS and d[self.pos] not in _DELIM:
            self.pos += 1
        if self.pos == start:
            self.pos += 1
        word = d[start:self.pos].decode("latin-1")
        if word == "true":
            return True
        if word == "false":
            return False
        if word == "null":
            return None
        return Op(word)

    def _literal(self) -> bytes:
        d = self.data
        i = self.pos + 1
        depth = 1
        out = bytearray()
        esc = {ord("n"): b"\n", ord("r"): b"\r", ord("t"): b"\t", ord("b"): b"\b", ord("f"): b"\f"}
        while i < len(d):
            c = d[i]
            if c == 0x5C:  # backslash
                i += 1
                if i >= len(d):
                    break
                c = d[i]
                if c in esc:
                    out += esc[c]
                elif 0x30 <= c <= 0x37:
                    j = i
                    while j < len(d) and j < i + 3 and 0x30 <= d[j] <= 0x37:
                        j += 1
                    out.append(int(d[i:j], 8) & 0xFF)
                    i = j - 1
                elif c in b"\r\n":
                    if c == 0x0D and i + 1 < len(d) and d[i + 1] == 0x0A:
                        i += 1
                else:
                    out.append(c)
            elif c == 0x28:
                depth += 1
                out.append(c)
            elif c == 0x29:
                depth -= 1
                if depth == 0:
                    i += 1
                    break
                out.append(c)
            else:
                out.append(c)
            i += 1
        self.pos = i
        return bytes(out)


def parse_value(lex: Lexer, tok=None):
    """Parse one object; integer pairs followed by R become references."""
    if tok is None:
        tok = lex.token()
    if isinstance(tok, Op):
        if tok == "[":
            items = []
            while True:
                t = lex.token()
                if t is None or t == "]":
                    return _fold_refs(items)
                items.append(parse_value(lex, t))
        if tok == "<<":
            items = []
            while True:
                t = lex.token()
                if t is None or t == ">>":
                    break
                items.append(parse_value(lex, t))
            items = _fold_refs(items)
            return {items[i]: items[i + 1] for i in range(0, len(items) - 1, 2) if isinstance(items[i], Name)}
    return tok


def _fold_refs(items: list) -> list:
    out = []
    i = 0
    while i < len(items):
        if (i + 2 < len(items) and isinstance(items[i], int) and isinstance(items[i + 1], int)
                and items[i + 2] == "R" and isinstance(items[i + 2], Op)):
            out.append(Ref(items[i], items[i + 1]))
            i += 3
        else:
            out.append(items[i])
            i += 1
    return out


_OBJ = re.compile(rb"(?<![0-9])(\d+)\s+(\d+)\s+obj\b")


class PdfDocument:
    def __init__(self, data: bytes):
        if not data.startswith(b"%PDF"):
            raise UnsupportedPdfFeature("not a PDF")
        self.data = data
        self.offsets: dict[int, int] = {}
        for m in _OBJ.finditer(data):
            self.offsets[int(m.group(1))] = m.end()
        self._cache: dict[int, object] = {}
        trailer_at = data.rfind(b"trailer")
        self.trailer = {}
        if trailer_at >= 0:
            self.trailer = parse_value(Lexer(data, trailer_at + len(b"trailer")))
        if "Encrypt" in self.trailer or re.search(rb"/Encrypt\b", data[-4096:]):
            raise UnsupportedPdfFeature("encrypted PDF")
        if re.search(rb"/Type\s*/ObjStm\b", data):
            raise UnsupportedPdfFeature("object streams")
        root = self.resolve(self.trailer.get("Root")) if self.trailer else None
        if not isinstance(root, dict):
            root = next((o for o in self._all() if isinstance(o, dict) and o.get("Type") == "Catalog"), None)
        if not isinstance(root, dict):
            raise UnsupportedPdfFeature("no document catalog")
        self.pages: list[dict] = []
        self._collect(self.resolve(root.get("Pages")), {}, set())

    def _all(self):
        for num in self.offsets:
            yield self.obj(num)

    def obj(self, num: int):
        if num in self._cache:
            return self._cache[num]
        if num not in self.offsets:
            return None
        lex = Lexer(self.data, self.offsets[num])
        value = parse_value(lex)
        save = lex.pos
        tok = lex.token()
        if tok == "stream" and isinstance(value, dict):
            pos = lex.pos
            if self.data[pos:pos + 2] == b"\r\n":
                pos += 2
            elif self.data[pos:pos + 1] in (b"\n", b"\r"):
                pos += 1
            length = self.resolve(value.get("Length"))
            if not isinstance(length, int) or self.data[pos + length:pos + length + 20].find(b"endstream") < 0:
                end = self.data.find(b"endstream", pos)
                length = max(0, end - pos)
                while length and self.data[pos + length - 1] in b"\r\n":
                    length -= 1
            value = Stream(value, self.data[pos:pos + length])
        else:
            lex.pos = save
        self._cache[num] = value
        return value

    def resolve(self, value):
        seen = 0
        while isinstance(value, Ref) and seen < 32:
            value = self.obj(value.num)
            seen += 1
        return value

    def _collect(self, node, inherited: dict, seen: set) -> None:
        if not isinstance(node, dict) or id(node) in seen:
            return
        seen.add(id(node))
        inh = dict(inherited)
        for key in ("Resources", "MediaBox", "Rotate"):
            if key in node:
                inh[key] = node[key]
        if node.get("Type") == "Page" or ("Kids" not in node and "Contents" in node):
            self.pages.append({**inh, **node})
            return
        for kid in self.resolve(node.get("Kids")) or []:
            self._collect(self.resolve(kid), inh, seen)

    def stream_data(self, stream) -> bytes:
        stream = self.resolve(stream)
        if not isinstance(stream, Stream):
            raise UnsupportedPdfFeature("content is not a stream")
        filters = self.resolve(stream.dict.get("Filter"))
        if filters is None:
            filters = []
        elif not isinstance(filters, list):
            filters = [filters]
        data = stream.raw
        for f in filters:
            f = self.resolve(f)
            if f in ("FlateDecode", "Fl"):
                try:
                    data = zlib.decompress(data)
                except zlib.error:
                    data = zlib.decompressobj().decompress(data)
            else:
                raise UnsupportedPdfFeature(f"filter {f}")
        return data


# text extraction ----------------------------------------------------------

@dataclass
class Glyph:
    char: str
    x0: float
    x1: float
    baseline: float  # pixels from the page top
    size: float  # pixels

    @property
    def top(self) -> float:
        return self.baseline - 0.8 * self.size

    @property
    def bottom(self) -> float:
        return self.baseline + 0.2 * self.size


@dataclass
class Word:
    text: str
    x: float
    y: float
    w: float
    h: float


@dataclass
class PageText:
    text: str
    words: list[Word] = field(default_factory=list)
    unsupported: str | None = None


MONOSPACE_FONTS = ("Courier",)
DEFAULT_WIDTH = 500.0
WORD_GAP = 0.25
LINE_TOLERANCE = 0.3  # baseline offset, in font sizes, still on the same line


class _Font:
    def __init__(self, doc: PdfDocument, fdict: dict):
        fdict = doc.resolve(fdict) or {}
        subtype = doc.resolve(fdict.get("Subtype"))
        if subtype == "Type0":
            raise UnsupportedPdfFeature("composite font")
        if subtype == "Type3":
            raise UnsupportedPdfFeature("type3 font")
        base = str(doc.resolve(fdict.get("BaseFont")) or "")
        self.first = doc.resolve(fdict.get("FirstChar")) or 0
        self.widths = [doc.resolve(w) for w in (doc.resolve(fdict.get("Widths")) or [])]
        desc = doc.resolve(fdict.get("FontDescriptor")) or {}
        self.missing = float(doc.resolve(desc.get("MissingWidth")) or 0) if isinstance(desc, dict) else 0
        self.monospace = any(base.split("+")[-1].startswith(m) for m in MONOSPACE_FONTS)
        self.tounicode: dict[int, str] = {}
        tu = fdict.get("ToUnicode")
        if tu is not None:
            self.tounicode = _parse_cmap(doc.stream_data(tu))

    def width(self, code: int) -> float:
        i = code - int(self.first)
        if 0 <= i < len(self.widths) and isinstance(self.widths[i], (int, float)):
            return float(self.widths[i])
        if self.monospace:
            return 600.0
        return self.missing or DEFAULT_WIDTH

    def char(self, code: int) -> str:
        if code in self.tounicode:
            return self.tounicode[code]
        return bytes([code]).decode("cp1252", errors="replace")


def _parse_cmap(data: bytes) -> dict[int, str]:
    out: dict[int, str] = {}

    def uni(h: bytes) -> str:
        try:
            return h.decode("utf-16-be")
        except UnicodeDecodeError:
            return ""
    for block in re.findall(rb"beginbfchar(.*?)endbfchar", data, re.S):
        for src, dst in re.findall(rb"<([0-9A-Fa-f]+)>\s*<([0-9A-Fa-f]*)>", block):
            out[int(src, 16)] = uni(bytes.fromhex(dst.decode()))
    for block in re.findall(rb"beginbfrange(.*?)endbfrange", data, re.S):
        for lo, hi, rest in re.findall(rb"<([0-9A-Fa-f]+)>\s*<([0-9A-Fa-f]+)>\s*(<[0-9A-Fa-f]*>|\[[^\]]*\])", block):
            lo_i, hi_i = int(lo, 16), int(hi, 16)
            if hi_i - lo_i > 65535:
                continue
            if rest.startswith(b"["):
                dsts = re.findall(rb"<([0-9A-Fa-f]*)>", rest)
                for k, d in enumerate(dsts[:hi_i - lo_i + 1]):
                    out[lo_i + k] = uni(bytes.fromhex(d.decode()))
            else:
                base = bytes.fromhex(rest[1:-1].decode())
                if not base:
                    continue
                start = int.from_bytes(base, "big")
                n = len(base)
                for k in range(hi_i - lo_i + 1):
                    out[lo_i + k] = uni((start + k).to_bytes(n, "big"))
    return out


def _mul(a, b):
    """Affine 2D matrices as (a, b, c, d, e, f), PDF row-vector convention: a x b."""
    return (a[0] * b[0] + a[1] * b[2], a[0] * b[1] + a[1] * b[3],
            a[2] * b[0] + a[3] * b[2], a[2] * b[1] + a[3] * b[3],
            a[4] * b[0] + a[5] * b[2] + b[4], a[4] * b[1] + a[5] * b[3] + b[5])


IDENTITY = (1.0, 0.0, 0.0, 1.0, 0.0, 0.0)


def page_glyphs(doc: PdfDocument, page: dict, dpi: float) -> list[Glyph]:
    box = doc.resolve(page.get("MediaBox")) or [0, 0, 612, 792]
    box = [float(doc.resolve(v)) for v in box]
    top_y = box[3]
    scale = dpi / 72.0
    resources = doc.resolve(page.get("Resources")) or {}
    font_dicts = doc.resolve(resources.get("Font")) or {}
    fonts: dict[str, _Font] = {}

    contents = doc.resolve(page.get("Contents"))
    if contents is None:
        return []
    parts = contents if isinstance(contents, list) else [contents]
    data = b"\n".join(doc.stream_data(p) for p in parts)

    glyphs: list[Glyph] = []
    ctm = IDENTITY
    stack = []
    tm = tlm = IDENTITY
    font: _Font | None = None
    size = 0.0
    tc = tw = 0.0
    th = 1.0
    tl = 0.0
    rise = 0.0
    operands: list = []

    def show(s: bytes) -> None:
        nonlocal tm
        if font is None:
            raise UnsupportedPdfFeature("text shown without a font")
        for code in s:
            w0 = font.width(code)
            ch = font.char(code)
            adv = (w0 / 1000.0 * size + tc + (tw if code == 32 else 0.0)) * th
            m = _mul(tm, ctm)
            x0 = m[4] + rise * m[2]
            y0 = m[5] + rise * m[3]
            x1 = x0 + adv * m[0]
            vsize = size * abs(m[3]) if m[3] else size
            glyphs.append(Glyph(ch, x0 * scale, x1 * scale, (top_y - y0) * scale, vsize * scale))
            tm = _mul((1, 0, 0, 1, adv, 0), tm)

    def adjust(n: float) -> None:
        nonlocal tm
        tm = _mul((1, 0, 0, 1, -n / 1000.0 * size * th, 0), tm)

    lex = Lexer(data)
    while True:
        tok = lex.token()
        if tok is None:
            break
        if not isinstance(tok, Op) or tok in ("[", "<<"):
            operands.append(parse_value(lex, tok))
            continue
        op = str(tok)
        try:
            if op == "q":
                stack.append(ctm)
            elif op == "Q":
                ctm = stack.pop() if stack else IDENTITY
            elif op == "cm" and len(operands) >= 6:
                ctm = _mul(tuple(float(v) for v in operands[-6:]), ctm)
            elif op == "BT":
                tm = tlm = IDENTITY
            elif op == "Tf" and len(operands) >= 2:
                name, size = operands[-2], float(operands[-1])
                if name not in fonts:
                    fonts[name] = _Font(doc, font_dicts.get(name))
                font = fonts[name]
            elif op == "Tc":
                tc = float(operands[-1])
            elif op == "Tw":
                tw = float(operands[-1])
            elif op == "Tz":
                th = float(operands[-1]) / 100.0
            elif op == "TL":
                tl = float(operands[-1])
            elif op == "Ts":
                rise = float(operands[-1])
            elif op == "Td":
                tlm = _mul((1, 0, 0, 1, float(operands[-2]), float(operands[-1])), tlm)
                tm = tlm
            elif op == "TD":
                tl = -float(operands[-1])
                tlm = _mul((1, 0, 0, 1, float(operands[-2]), float(operands[-1])), tlm)
                tm = tlm
            elif op == "Tm":
                tlm = tm = tuple(float(v) for v in operands[-6:])
            elif op == "T*":
                tlm = _mul((1, 0, 0, 1, 0, -tl), tlm)
                tm = tlm
            elif op == "Tj":
                show(operands[-1])
            elif op == "'":
                tlm = _mul((1, 0, 0, 1, 0, -tl), tlm)
                tm = tlm
                show(operands[-1])
            elif op == '"':
                tw, tc = float(operands[-3]), float(operands[-2])
                tlm = _mul((1, 0, 0, 1, 0, -tl), tlm)
                tm = tlm
                show(operands[-1])
            elif op == "TJ":
                for item in operands[-1]:
                    if isinstance(item, bytes):
                        show(item)
                    elif isinstance(item, (int, float)):
                        adjust(float(item))
            elif op == "ID":
                end = re.compile(rb"\sEI(?=[\s]|$)").search(data, lex.pos)
                lex.pos = end.end() if end else len(data)
        except (IndexError, TypeError, ValueError) as exc:
            raise UnsupportedPdfFeature(f"malformed operator {op}: {exc}") from None
        operands = []
    return glyphs


def group_words(glyphs: list[Glyph]) -> tuple[str, list[Word]]:
    """Lines by baseline top-to-bottom, words by the horizontal gap rule."""
    lines: list[list[Glyph]] = []
    for g in sorted(glyphs, key=lambda g: (g.baseline, g.x0)):
        if lines and abs(lines[-1][0].baseline - g.baseline) <= LINE_TOLERANCE * max(lines[-1][0].size, g.size):
            lines[-1].append(g)
        else:
            lines.append([g])
    words: list[Word] = []
    line_texts = []
    for line in lines:
        line.sort(key=lambda g: g.x0)
        ink = [g for g in line if not g.char.isspace()]
        if not ink:
            continue
        avg = sum(g.x1 - g.x0 for g in ink) / len(ink)
        current: list[Glyph] = []
        line_words = []

        def flush():
            if current:
                x0 = min(g.x0 for g in current)
                x1 = max(g.x1 for g in current)
                y0 = min(g.top for g in current)
                y1 = max(g.bottom for g in current)
                line_words.append(Word("".join(g.char for g in current), round(x0, 2), round(y0, 2),
                                       round(x1 - x0, 2), round(y1 - y0, 2)))
                current.clear()
        for g in line:
            if g.char.isspace():
                flush()
                continue
            if current and g.x0 - current[-1].x1 >= WORD_GAP * avg:
                flush()
            current.append(g)
        flush()
        words.extend(line_words)
        line_texts.append(" ".join(w.text for w in line_words))
    return "\n".join(line_texts), words


def extract_page_text(pdf: bytes | PdfDocument, page_index: int, dpi: float = 150) -> PageText:
    try:
        doc = pdf if isinstance(pdf, PdfDocument) else PdfDocument(pdf)
        if not 0 <= page_index < len(doc.pages):
            raise UnsupportedPdfFeature(f"page {page_index} not in document")
        glyphs = page_glyphs(doc, doc.pages[page_index], dpi)
    except UnsupportedPdfFeature as exc:
        return PageText("", [], str(exc) or "unsupported")
    except Exception as exc:  # a broken file must not sink the page
        return PageText("", [], f"unreadable: {type(exc).__name__}")
    text, words = group_words(glyphs)
    return PageText(text, words)


def page_count(pdf: bytes) -> int:
    return len(PdfDocument(pdf).pages)
