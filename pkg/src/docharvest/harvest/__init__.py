"""Word-document URL harvesting from Common Crawl WAT files."""
from .dedup import UrlLedger, dedup_global, dedup_snapshot
from .run import harvest_file, harvest_snapshot, read_manifest
from .urls import UrlRecord, extract_word_urls, is_word_url, normalize_url
from .warc import MalformedWarcHeader, ParseStats, StreamCorrupt, WatRecordRef, parse_wat_stream

__all__ = [
    "MalformedWarcHeader",
    "ParseStats",
    "StreamCorrupt",
    "UrlLedger",
    "UrlRecord",
    "WatRecordRef",
    "dedup_global",
    "dedup_snapshot",
    "extract_word_urls",
    "harvest_file",
    "harvest_snapshot",
    "is_word_url",
    "normalize_url",
    "parse_wat_stream",
    "read_manifest",
]
