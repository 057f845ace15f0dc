"""Static screening of Word payloads for active or hidden content."""
from __future__ import annotations

import io
import posixpath
import re
import struct
import zipfile

import olefile
from lxml import etree

from .types import MaldocFlags

ZIP_MAGIC = b"PK\x03\x04"
CFB_MAGIC = bytes.fromhex("D0CF11E0A1B11AE1")

# Shockwave Flash ActiveX control, as matched by common OLE triage tooling
FLASH_CLSID = "D27CDB6E-AE6D-11CF-96B8-444553540000"
FLASH_PROGID = b"ShockwaveFlash.ShockwaveFlash"
_SWF_HEADER = re.compile(rb"(FWS|CWS|ZWS)([\x01-\x32])(....)", re.S)
HYPERLINK_REL = "/hyperlink"
VBA_STORAGES = {"macros", "vba", "_vba_project_cur"}
# text and formatting streams: large, binary, never host embedded objects
_SKIP_SCAN = {"worddocument", "1table", "0table"}
FIB_ENCRYPTED = 0x0100


class UnparsableContainer(ValueError):
    pass


def _clsid_le_bytes(clsid: str) -> bytes:
    a, b, c, d, e = clsid.split("-")
    return (struct.pack("<IHH", int(a, 16), int(b, 16), int(c, 16)) + bytes.fromhex(d) + bytes.fromhex(e))


_FLASH_CLSID_BYTES = _clsid_le_bytes(FLASH_CLSID)


def has_swf(data: bytes) -> bool:
    """An embedded SWF header whose body looks like what the signature promises."""
    for m in _SWF_HEADER.finditer(data):
        (length,) = struct.unpack("<I", m.group(3))
        start, sig = m.start(), m.group(1)
        if length < 21:
            continue
        if sig == b"FWS" and length <= len(data) - start:
            return True
        if sig == b"CWS" and data[start + 8: start + 9] == b"\x78":  # zlib header
            return True
        if sig == b"ZWS" and data[start + 12: start + 13] == b"\x5d":  # LZMA properties
            return True
    return False


def has_flash_marker(data: bytes) -> bool:
    return (_FLASH_CLSID_BYTES in data
            or FLASH_CLSID.encode() in data.upper()
            or FLASH_PROGID in data
            or FLASH_PROGID.decode().encode("utf-16-le") in data
            or has_swf(data))


def maldoc_screen(data: bytes) -> MaldocFlags:
    """Flags for a stored candidate; pure function of the bytes."""
    if data.startswith(CFB_MAGIC):
        return _screen_cfb(data)
    if data.startswith(ZIP_MAGIC):
        return _screen_zip(data)
    raise UnparsableContainer("neither a zip nor a compound file")


def _screen_zip(data: bytes) -> MaldocFlags:
    try:
        zf = zipfile.ZipFile(io.BytesIO(data))
        infos = zf.infolist()
    except (zipfile.BadZipFile, zipfile.LargeZipFile, ValueError, OSError) as exc:
        raise UnparsableContainer(str(exc)) from None
    vba = external = pool = flash = False
    for info in infos:
        name = info.filename
        low = name.lower()
        base = posixpath.basename(low)
        if base == "vbaproject.bin":
            vba = True
        if low.endswith(".rels"):
            external = external or _external_relations(_read(zf, info))
        elif "/embeddings/" in low or "/activex/" in low:
            blob = _read(zf, info)
            if has_flash_marker(blob):
                flash = True
            if blob.startswith(CFB_MAGIC):
                pool = True  # embedded OLE object
                flags = _screen_cfb(blob, nested=True)
                vba = vba or flags.has_vba
                flash = flash or flags.has_flash
    return MaldocFlags(has_vba=vba, has_external_relations=external, has_ole_object_pool=pool,
                       is_encrypted=False, has_flash=flash)


def _read(zf: zipfile.ZipFile, info: zipfile.ZipInfo) -> bytes:
    try:
        return zf.read(info)
    except (zipfile.BadZipFile, OSError, RuntimeError, EOFError, zipfile.LargeZipFile) as exc:
        raise UnparsableContainer(f"{info.filename}: {exc}") from None


def _external_relations(xml: bytes) -> bool:
    try:
        root = etree.fromstring(xml, etree.XMLParser(resolve_entities=False, no_network=True))
    except etree.XMLSyntaxError:
        return False
    for rel in root:
        if not isinstance(rel.tag, str):
            continue
        if rel.get("TargetMode", "").lower() == "external" and not rel.get("Type", "").lower().endswith(HYPERLINK_REL):
            return True
    return False


def _screen_cfb(data: bytes, nested: bool = False) -> MaldocFlags:
    try:
        ole = olefile.OleFileIO(data)
    except Exception as exc:  # olefile raises a mix of OSError and its own errors
        raise UnparsableContainer(f"compound file: {exc}") from None
    try:
        vba = pool = encrypted = flash = False
        for path in ole.listdir(streams=True, storages=True):
            names = [p.lower() for p in path]
            if any(n in VBA_STORAGES for n in names):
                vba = True
            if names and names[0] == "objectpool":
                pool = True
            if names[-1] == "encryptioninfo" and ole.get_type(path) == olefile.STGTY_STREAM:
                encrypted = True
            clsid = ole.getclsid(path)
            if clsid and clsid.upper() == FLASH_CLSID:
                flash = True
            if (ole.get_type(path) == olefile.STGTY_STREAM and not flash
                    and not (len(names) == 1 and names[0] in _SKIP_SCAN)):
                with ole.openstream(path) as fh:
                    if has_flash_marker(fh.read()):
                        flash = True
        if (ole.root.clsid or "").upper() == FLASH_CLSID:
            flash = True
        if ole.exists("WordDocument"):
            with ole.openstream("WordDocument") as fh:
                head = fh.read(12)
            if len(head) >= 12:
                (flags,) = struct.unpack_from("<H", head, 0x0A)
                encrypted = encrypted or bool(flags & FIB_ENCRYPTED)
    except UnparsableContainer:
        raise
    except Exception as exc:
        raise UnparsableContainer(f"compound file: {exc}") from None
    finally:
        ole.close()
    return MaldocFlags(has_vba=vba, has_ole_object_pool=pool and not nested, is_encrypted=encrypted,
                       has_flash=flash)
