from __future__ import annotations

from dataclasses import dataclass
from urllib.parse import urljoin, urlsplit, urlunsplit

from .warc import WatRecordRef

WORD_SUFFIXES = (".doc", ".docx")
ALLOWED_SCHEMES = ("http", "https")


@dataclass(frozen=True, order=True)
class UrlRecord:
    url: str
    snapshot_id: str
    source_wat: str = ""


def normalize_url(link: str, base: str = "") -> str | None:
    """Resolve `link` against `base` and normalize it.

    Lowercases scheme and host, drops the fragment, keeps the query and
    any percent-encoding verbatim. Returns None for links that are not
    absolute http(s) URLs; raises ValueError for unparsable ones.
    """
    link = link.strip()
    if not link:
        raise ValueError("empty link")
    absolute = urljoin(base, link) if base else link
    parts = urlsplit(absolute)
    host = parts.hostname
    port = parts.port
    scheme = parts.scheme.lower()
    if scheme not in ALLOWED_SCHEMES or not host:
        return None
    netloc = host.lower()
    if ":" in netloc:
        netloc = f"[{netloc}]"
    if parts.username is not None:
        userinfo = parts.netloc.rpartition("@")[0]
        netloc = f"{userinfo}@{netloc}"
    if port is not None:
        netloc = f"{netloc}:{port}"
    return urlunsplit((scheme, netloc, parts.path or "/", parts.query, ""))


def is_word_url(url: str) -> bool:
    # suffix is judged on the path only: "a.doc?dl=1" matches, "a.php?f=x.doc" does not
    return urlsplit(url).path.lower().endswith(WORD_SUFFIXES)


def extract_word_urls(
    record: WatRecordRef,
    base: str | None = None,
    *,
    snapshot_id: str = "",
    source_wat: str = "",
    counters: dict[str, int] | None = None,
) -> list[UrlRecord]:
    if base is None:
        base = record.target_uri
    out = []
    for link in record.links():
        try:
            url = normalize_url(link, base)
        except ValueError:
            if counters is not None:
                counters["bad_links"] = counters.get("bad_links", 0) + 1
            continue
        if url is not None and is_word_url(url):
            out.append(UrlRecord(url, snapshot_id, source_wat))
    return out
