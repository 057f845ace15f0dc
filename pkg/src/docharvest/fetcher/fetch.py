"""HTTP retrieval under a redirect/retry/size policy."""
from __future__ import annotations

import hashlib
import logging
import time
from dataclasses import dataclass, field
from datetime import datetime, timezone
from enum import Enum
from typing import Callable, Protocol
from urllib.parse import urljoin, urlsplit

from .maldoc import CFB_MAGIC, ZIP_MAGIC, UnparsableContainer, maldoc_screen
from .types import FetchOutcome, FetchPolicy, FetchStatus, RejectionReason, RejectKind

logger = logging.getLogger(__name__)

RETRY_CODES = frozenset({429, 500, 502, 503, 504})
REDIRECT_CODES = frozenset({301, 302, 303, 307, 308})


class TransportError(Exception):
    """No usable HTTP response (timeout, refused connection, reset)."""


@dataclass
class Response:
    status: int
    headers: dict[str, str]  # lower-cased names
    body: bytes = b""
    oversize: bool = False  # body exceeded the byte cap; `body` is incomplete


class Transport(Protocol):
    def get(self, url: str, *, timeout: float, headers: dict[str, str], max_bytes: int) -> Response: ...


class RequestsTransport:
    """requests-backed transport; never follows redirects itself."""

    def __init__(self, session=None):
        import requests

        self._requests = requests
        self.session = session or requests.Session()

    def get(self, url, *, timeout, headers, max_bytes):
        req = self._requests
        try:
            with self.session.get(url, timeout=timeout, headers=headers, stream=True,
                                  allow_redirects=False) as resp:
                hdrs = {k.lower(): v for k, v in resp.headers.items()}
                declared = hdrs.get("content-length", "")
                if declared.isdigit() and int(declared) > max_bytes:
                    return Response(resp.status_code, hdrs, b"", oversize=True)
                chunks, total = [], 0
                for chunk in resp.iter_content(64 * 1024):
                    chunks.append(chunk)
                    total += len(chunk)
                    if total > max_bytes:
                        return Response(resp.status_code, hdrs, b"".join(chunks), oversize=True)
                return Response(resp.status_code, hdrs, b"".join(chunks))
        except (req.Timeout, req.ConnectionError) as exc:
            raise TransportError(f"{type(exc).__name__}: {exc}") from None
        except req.RequestException as exc:
            raise TransportError(f"{type(exc).__name__}: {exc}") from None


def utc_now() -> str:
    return datetime.now(timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")


class ContentDecision(str, Enum):
    accept = "accept"
    accept_override = "accept_override"  # header disagreed, magic bytes won
    content_type = "ContentType"
    wrong_format = "WrongFileFormat"


def sniff_format(prefix: bytes) -> str | None:
    if prefix.startswith(ZIP_MAGIC):
        return "docx"
    if prefix.startswith(CFB_MAGIC):
        return "doc"
    return None


def check_content_type(headers: dict[str, str], body_prefix: bytes,
                       policy: FetchPolicy = FetchPolicy()) -> ContentDecision:
    """Header/magic agreement; magic bytes win on disagreement."""
    raw = headers.get("content-type")
    mime = raw.split(";")[0].strip().lower() if raw else None
    header_ok = mime in policy.accepted_content_types if mime else None
    if sniff_format(body_prefix[:8]) is not None:
        return ContentDecision.accept if header_ok in (True, None) else ContentDecision.accept_override
    if header_ok is False:
        return ContentDecision.content_type
    return ContentDecision.wrong_format


def sha256_hex(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()


def _valid_url(url: str) -> bool:
    try:
        parts = urlsplit(url)
        parts.port  # raises on a malformed port
    except ValueError:
        return False
    return parts.scheme in ("http", "https") and bool(parts.hostname)


@dataclass
class _HttpResult:
    outcome: FetchOutcome | None = None  # terminal failure
    response: Response | None = None
    notes: list[str] = field(default_factory=list)


def _http_get(url: str, policy: FetchPolicy, transport: Transport,
              sleep: Callable[[float], None]) -> _HttpResult:
    """Follow redirects and retry transient failures; returns a final 200 or a terminal outcome."""
    if not _valid_url(url):
        return _HttpResult(FetchOutcome(url, FetchStatus.Rejected, reason=RejectionReason(RejectKind.InvalidUrl, url)))
    headers = {"User-Agent": policy.user_agent}
    current = url
    redirects = 0
    attempt = 0
    while True:
        try:
            resp = transport.get(current, timeout=policy.timeout, headers=headers, max_bytes=policy.max_bytes)
        except TransportError as exc:
            if attempt < policy.max_retries:
                attempt += 1
                sleep(policy.retry_backoff * 2 ** (attempt - 1))
                continue
            return _HttpResult(FetchOutcome(url, FetchStatus.Failed,
                                            reason=RejectionReason(RejectKind.NoResponse, str(exc))))
        if resp.status in REDIRECT_CODES and resp.headers.get("location"):
            redirects += 1
            if redirects > policy.max_redirects:
                return _HttpResult(FetchOutcome(
                    url, FetchStatus.Rejected, resp.status,
                    RejectionReason(RejectKind.RetryRedirect, f"more than {policy.max_redirects} redirects")))
            current = urljoin(current, resp.headers["location"])
            if not _valid_url(current):
                return _HttpResult(FetchOutcome(url, FetchStatus.Rejected, resp.status,
                                                RejectionReason(RejectKind.InvalidUrl, current)))
            continue
        if resp.status in RETRY_CODES:
            if attempt < policy.max_retries:
                attempt += 1
                delay = policy.retry_backoff * 2 ** (attempt - 1)
                retry_after = resp.headers.get("retry-after", "")
                if retry_after.isdigit():
                    delay = max(delay, min(float(retry_after), policy.timeout))
                sleep(delay)
                continue
            return _HttpResult(FetchOutcome(
                url, FetchStatus.Rejected, resp.status,
                RejectionReason(RejectKind.RetryRedirect, f"{resp.status} after {attempt + 1} attempts")))
        if resp.status != 200:
            return _HttpResult(FetchOutcome(url, FetchStatus.Rejected, resp.status,
                                            RejectionReason(RejectKind.HttpCode, str(resp.status))))
        return _HttpResult(response=resp)


def fetch_document(url: str, policy: FetchPolicy, transport: Transport, store=None, *,
                   clock: Callable[[], str] = utc_now,
                   sleep: Callable[[float], None] = time.sleep) -> FetchOutcome:
    """Download, validate, screen and store one document. Never raises."""
    try:
        outcome = _fetch(url, policy, transport, store, sleep)
    except Exception as exc:  # last-resort guard: one bad URL must not kill a worker
        logger.exception("internal error on %s", url)
        outcome = FetchOutcome(url, FetchStatus.Failed,
                               reason=RejectionReason(RejectKind.Internal, f"{type(exc).__name__}: {exc}"))
    outcome.fetched_at = clock()
    return outcome


def _fetch(url, policy, transport, store, sleep) -> FetchOutcome:
    res = _http_get(url, policy, transport, sleep)
    if res.outcome is not None:
        return res.outcome
    resp = res.response
    if resp.oversize:
        return FetchOutcome(url, FetchStatus.Rejected, resp.status,
                            RejectionReason(RejectKind.TooLarge, f"> {policy.max_bytes} bytes"))
    body = resp.body
    digest = sha256_hex(body)  # hash the full body before anything else looks at it
    base = dict(http_code=resp.status, byte_hash=digest, content_length=len(body))
    decision = check_content_type(resp.headers, body[:8], policy)
    if decision == ContentDecision.content_type:
        return FetchOutcome(url, FetchStatus.Rejected, reason=RejectionReason(
            RejectKind.ContentType, resp.headers.get("content-type", "")), **base)
    if decision == ContentDecision.wrong_format:
        return FetchOutcome(url, FetchStatus.Rejected, reason=RejectionReason(
            RejectKind.WrongFileFormat, repr(body[:8])), **base)
    try:
        flags = maldoc_screen(body)
    except UnparsableContainer as exc:
        return FetchOutcome(url, FetchStatus.Rejected, reason=RejectionReason(
            RejectKind.WrongFileFormat, str(exc)), **base)
    if flags.malicious:
        return FetchOutcome(url, FetchStatus.Rejected, reason=RejectionReason(
            RejectKind.Maldoc, ",".join(flags.names())), **base)
    fmt = sniff_format(body)
    outcome = FetchOutcome(url, FetchStatus.Stored, body=body, fmt=fmt,
                           content_type_override=decision == ContentDecision.accept_override, **base)
    if store is not None:
        outcome.stored_path = str(store.put(body, fmt, digest))
    else:
        outcome.stored_path = f"memory:{digest}"
    return outcome


class VerifyResult(str, Enum):
    Unchanged = "Unchanged"
    Changed = "Changed"
    Unavailable = "Unavailable"


def verify_unchanged(url: str, expected_hash: str, policy: FetchPolicy, transport: Transport, *,
                     sleep: Callable[[float], None] = time.sleep) -> VerifyResult:
    try:
        res = _http_get(url, policy, transport, sleep)
    except Exception:
        return VerifyResult.Unavailable
    if res.outcome is not None or res.response is None or res.response.oversize:
        return VerifyResult.Unavailable
    if sha256_hex(res.response.body) == expected_hash:
        return VerifyResult.Unchanged
    return VerifyResult.Changed
