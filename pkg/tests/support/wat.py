"""Build small WAT files for tests."""
from __future__ import annotations

import gzip
import json


def warc_record(warc_type: str, target: str, payload: bytes, *, extra_headers: str = "") -> bytes:
    head = (
        "WARC/1.0\r\n"
        f"WARC-Type: {warc_type}\r\n"
        f"WARC-Target-URI: {target}\r\n"
        "Content-Type: application/json\r\n"
        f"{extra_headers}"
        f"Content-Length: {len(payload)}\r\n"
        "\r\n"
    ).encode()
    return head + payload + b"\r\n\r\n"


def metadata_payload(links: list[str]) -> bytes:
    doc = {
        "Envelope": {
            "Payload-Metadata": {
                "HTTP-Response-Metadata": {
                    "HTML-Metadata": {"Links": [{"path": "A@/href", "url": u} for u in links]}
                }
            }
        }
    }
    return json.dumps(doc).encode()


def metadata_record(target: str, links: list[str]) -> bytes:
    return warc_record("metadata", target, metadata_payload(links))


def request_record(target: str) -> bytes:
    return warc_record("request", target, b"GET / HTTP/1.1\r\nHost: x\r\n\r\n")


def gz_members(records: list[bytes]) -> bytes:
    return b"".join(gzip.compress(r, mtime=0) for r in records)


def build_wat(pages: list[tuple[str, list[str]]], *, requests: int = 0) -> bytes:
    """One gzip member per record; `pages` are (target, links) metadata records."""
    records = [request_record(t) for t, _ in pages[:requests]]
    records += [metadata_record(t, links) for t, links in pages]
    return gz_members(records)
