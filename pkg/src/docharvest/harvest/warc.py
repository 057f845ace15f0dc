"""Streaming reader for gzip-member-concatenated WARC/WAT files."""
from __future__ import annotations

import json
import logging
import zlib
from dataclasses import dataclass, field
from typing import BinaryIO, Iterator

logger = logging.getLogger(__name__)

CHUNK_SIZE = 1 << 16


class MalformedWarcHeader(ValueError):
    """A record header block could not be parsed."""


class StreamCorrupt(IOError):
    """Decompression failed; the rest of the file is unreadable."""


@dataclass(frozen=True)
class WatRecordRef:
    warc_type: str
    target_uri: str
    payload: bytes

    def links(self) -> list[str]:
        """Outgoing link URLs from the structured payload (empty if absent/unparsable)."""
        try:
            doc = json.loads(self.payload.decode("utf-8", errors="replace"))
            links = (
                doc["Envelope"]["Payload-Metadata"]["HTTP-Response-Metadata"]
                ["HTML-Metadata"].get("Links", [])
            )
        except (ValueError, KeyError, TypeError, AttributeError):
            return []
        out = []
        for link in links:
            if isinstance(link, dict) and isinstance(link.get("url"), str):
                out.append(link["url"])
        return out


@dataclass
class ParseStats:
    records: int = 0
    metadata_records: int = 0
    skipped_records: int = 0
    header_errors: int = 0
    truncated: bool = False
    corrupt: bool = False
    errors: list[str] = field(default_factory=list)

    @property
    def total(self) -> int:
        """Records seen, whether yielded, skipped, or malformed."""
        return self.metadata_records + self.skipped_records + self.header_errors


def _decompress(stream: BinaryIO, stats: ParseStats) -> Iterator[bytes]:
    decomp = zlib.decompressobj(zlib.MAX_WBITS | 16)
    pending_member = False
    while True:
        chunk = stream.read(CHUNK_SIZE)
        if not chunk:
            break
        data = chunk
        while data:
            try:
                out = decomp.decompress(data)
            except zlib.error as exc:
                stats.corrupt = True
                stats.errors.append(f"StreamCorrupt: {exc}")
                return
            pending_member = True
            if out:
                yield out
            if decomp.eof:
                data = decomp.unused_data
                decomp = zlib.decompressobj(zlib.MAX_WBITS | 16)
                pending_member = False
            else:
                data = b""
    if pending_member:
        try:
            tail = decomp.flush()
        except zlib.error:
            tail = b""
        if tail:
            yield tail
        stats.truncated = True
        stats.errors.append("truncated trailing gzip member")


def _parse_headers(block: bytes) -> dict[str, str]:
    lines = block.decode("utf-8", errors="replace").split("\r\n")
    if not lines or not lines[0].startswith("WARC/"):
        raise MalformedWarcHeader("missing WARC version line")
    headers: dict[str, str] = {}
    for line in lines[1:]:
        if not line:
            continue
        name, sep, value = line.partition(":")
        if not sep:
            raise MalformedWarcHeader(f"bad header line {line[:60]!r}")
        headers[name.strip().lower()] = value.strip()
    if "content-length" not in headers:
        raise MalformedWarcHeader("missing Content-Length")
    try:
        length = int(headers["content-length"])
    except ValueError:
        raise MalformedWarcHeader("non-numeric Content-Length") from None
    if length < 0:
        raise MalformedWarcHeader("negative Content-Length")
    return headers


def _resync(buf: bytearray, start: int) -> int:
    """Offset of the next record start at or after `start`, or -1."""
    pos = buf.find(b"\nWARC/", start)
    return -1 if pos < 0 else pos + 1


def parse_wat_stream(stream: BinaryIO, stats: ParseStats | None = None) -> Iterator[WatRecordRef]:
    """Yield metadata records of a (possibly truncated) WAT file in file order.

    Malformed record headers are skipped and counted; a decompression
    failure stops the file but keeps everything yielded before it.
    Callers that need the counters pass their own `stats`.
    """
    if stats is None:
        stats = ParseStats()
    buf = bytearray()
    pos = 0
    exhausted = False
    chunks = _decompress(stream, stats)

    def fill() -> bool:
        nonlocal exhausted
        if exhausted:
            return False
        try:
            buf.extend(next(chunks))
            return True
        except StopIteration:
            exhausted = True
            return False

    while True:
        # skip blank separator lines between records
        while True:
            while pos < len(buf) and buf[pos] in b"\r\n":
                pos += 1
            if pos < len(buf) or not fill():
                break
        if pos >= len(buf):
            break
        head_end = buf.find(b"\r\n\r\n", pos)
        while head_end < 0 and fill():
            head_end = buf.find(b"\r\n\r\n", pos)
        if head_end < 0:
            if buf[pos:].strip():
                stats.truncated = True
                stats.header_errors += 1
                stats.errors.append("truncated record header at end of stream")
            break
        try:
            headers = _parse_headers(bytes(buf[pos:head_end]))
        except MalformedWarcHeader as exc:
            stats.header_errors += 1
            stats.errors.append(f"MalformedWarcHeader: {exc}")
            nxt = _resync(buf, head_end)
            while nxt < 0 and fill():
                nxt = _resync(buf, head_end)
            if nxt < 0:
                break
            pos = nxt
            continue
        body_start = head_end + 4
        length = int(headers["content-length"])
        while len(buf) < body_start + length and fill():
            pass
        if len(buf) < body_start + length:
            stats.truncated = True
            stats.skipped_records += 1
            stats.errors.append("record body truncated")
            break
        payload = bytes(buf[body_start:body_start + length])
        pos = body_start + length
        stats.records += 1
        if headers.get("warc-type", "").lower() == "metadata":
            stats.metadata_records += 1
            yield WatRecordRef("metadata", headers.get("warc-target-uri", ""), payload)
        else:
            stats.skipped_records += 1
        if pos > CHUNK_SIZE * 4:
            del buf[:pos]
            pos = 0
    if stats.corrupt:
        logger.warning("WAT stream corrupt after %d records", stats.records)
