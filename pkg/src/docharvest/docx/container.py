from __future__ import annotations

import io
import posixpath
import zipfile
from dataclasses import dataclass, field

from lxml import etree
from PIL import Image

MAX_EXPANSION_RATIO = 20.0
MAX_IMAGE_PIXELS = 22_400_000
IMAGE_EXTENSIONS = (".png", ".jpg", ".jpeg", ".jpe", ".gif", ".bmp", ".tif", ".tiff", ".webp")
# enough for JPEG headers sitting behind large EXIF blocks
HEADER_PROBE_BYTES = 256 * 1024

NS = {
    "w": "http://schemas.openxmlformats.org/wordprocessingml/2006/main",
    "r": "http://schemas.openxmlformats.org/officeDocument/2006/relationships",
    "wp": "http://schemas.openxmlformats.org/drawingml/2006/wordprocessingDrawing",
    "a": "http://schemas.openxmlformats.org/drawingml/2006/main",
    "pic": "http://schemas.openxmlformats.org/drawingml/2006/picture",
    "m": "http://schemas.openxmlformats.org/officeDocument/2006/math",
    "mc": "http://schemas.openxmlformats.org/markup-compatibility/2006",
    "v": "urn:schemas-microsoft-com:vml",
    "wps": "http://schemas.microsoft.com/office/word/2010/wordprocessingShape",
    "w14": "http://schemas.microsoft.com/office/word/2010/wordml",
    "pr": "http://schemas.openxmlformats.org/package/2006/relationships",
}
W = "{%s}" % NS["w"]
R = "{%s}" % NS["r"]

MAIN_PART = "word/document.xml"


class ContainerError(ValueError):
    kind = "InvalidContainer"


class InvalidZip(ContainerError):
    kind = "InvalidZip"


class ZipBomb(ContainerError):
    kind = "ZipBomb"


class OversizeImage(ContainerError):
    kind = "OversizeImage"


@dataclass
class Relationship:
    rid: str
    type: str
    target: str
    external: bool


@dataclass
class Container:
    """An opened, screened .docx package."""

    data: bytes
    zf: zipfile.ZipFile
    names: list[str]
    _xml: dict[str, etree._ElementTree] = field(default_factory=dict, repr=False)

    def read(self, name: str) -> bytes:
        return self.zf.read(name)

    def has(self, name: str) -> bool:
        return name in self.names

    def xml(self, name: str) -> etree._ElementTree:
        """Parsed XML part, cached; the tree is shared, copy before editing."""
        if name not in self._xml:
            parser = etree.XMLParser(resolve_entities=False, no_network=True, huge_tree=False)
            self._xml[name] = etree.parse(io.BytesIO(self.read(name)), parser)
        return self._xml[name]

    def rels(self, part: str) -> dict[str, Relationship]:
        folder, base = posixpath.split(part)
        rels_name = posixpath.join(folder, "_rels", base + ".rels")
        if rels_name not in self.names:
            return {}
        out = {}
        for rel in self.xml(rels_name).getroot():
            rid = rel.get("Id")
            target = rel.get("Target", "")
            external = rel.get("TargetMode") == "External"
            if not external:
                target = posixpath.normpath(posixpath.join(folder, target)).lstrip("/")
                if rel.get("Target", "").startswith("/"):
                    target = rel.get("Target").lstrip("/")
            out[rid] = Relationship(rid, rel.get("Type", ""), target, external)
        return out


def image_dimensions(head: bytes) -> tuple[int, int] | None:
    """Pixel size read from an image header, without decoding pixel data."""
    try:
        with Image.open(io.BytesIO(head)) as img:
            return img.size
    except Image.DecompressionBombError:
        raise
    except Exception:
        return None


def open_container(data: bytes) -> Container:
    try:
        zf = zipfile.ZipFile(io.BytesIO(data))
        infos = zf.infolist()
    except (zipfile.BadZipFile, zipfile.LargeZipFile, ValueError, OSError) as exc:
        raise InvalidZip(str(exc)) from None
    names = [i.filename for i in infos]
    if MAIN_PART not in names:
        raise InvalidZip("no word/document.xml part")
    declared = sum(i.file_size for i in infos)
    if declared > MAX_EXPANSION_RATIO * len(data):
        raise ZipBomb(f"uncompressed {declared} > {MAX_EXPANSION_RATIO:g} x {len(data)}")
    for info in infos:
        if not info.filename.lower().endswith(IMAGE_EXTENSIONS):
            continue
        try:
            with zf.open(info) as fh:
                head = fh.read(HEADER_PROBE_BYTES)
        except (zipfile.BadZipFile, OSError, RuntimeError, EOFError) as exc:
            raise InvalidZip(f"{info.filename}: {exc}") from None
        try:
            dims = image_dimensions(head)
        except Image.DecompressionBombError as exc:
            raise OversizeImage(f"{info.filename}: {exc}") from None
        if dims and dims[0] * dims[1] > MAX_IMAGE_PIXELS:
            raise OversizeImage(f"{info.filename}: {dims[0]}x{dims[1]}")
    try:
        zf.read(MAIN_PART)
    except (zipfile.BadZipFile, OSError, RuntimeError, EOFError) as exc:
        raise InvalidZip(str(exc)) from None
    return Container(data, zf, names)
