"""Document download, validation, malware screening and byte-hash dedup."""
from .fetch import (
    ContentDecision,
    RequestsTransport,
    Response,
    Transport,
    TransportError,
    VerifyResult,
    check_content_type,
    fetch_document,
    sha256_hex,
    verify_unchanged,
)
from .maldoc import UnparsableContainer, maldoc_screen
from .run import fetch_stats, merge_journals, read_journal, read_url_list, run_fetch
from .store import ContentLedger, DocumentStore, dedup_by_hash
from .types import (
    FetchOutcome,
    FetchPolicy,
    FetchStatus,
    MaldocFlags,
    RejectionReason,
    RejectKind,
)

__all__ = [
    "ContentDecision", "ContentLedger", "DocumentStore", "FetchOutcome", "FetchPolicy", "FetchStatus",
    "MaldocFlags", "RejectKind", "RejectionReason", "RequestsTransport", "Response", "Transport",
    "TransportError", "UnparsableContainer", "VerifyResult", "check_content_type", "dedup_by_hash",
    "fetch_document", "fetch_stats", "maldoc_screen", "merge_journals", "read_journal",
    "read_url_list", "run_fetch", "sha256_hex", "verify_unchanged",
]
