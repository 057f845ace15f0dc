from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

DOCX_MIME = "application/vnd.openxmlformats-officedocument.wordprocessingml.document"
DEFAULT_CONTENT_TYPES = (
    DOCX_MIME,
    "application/msword",
    "application/vnd.ms-word",
    "application/vnd.ms-word.document.macroenabled.12",
)


class FetchStatus(str, Enum):
    Stored = "Stored"
    Rejected = "Rejected"
    Failed = "Failed"


class RejectKind(str, Enum):
    HttpCode = "HttpCode"
    InvalidUrl = "InvalidUrl"
    RetryRedirect = "RetryRedirect"
    NoResponse = "NoResponse"
    WrongFileFormat = "WrongFileFormat"
    ContentType = "ContentType"
    TooLarge = "TooLarge"
    Maldoc = "Maldoc"
    DuplicateContent = "DuplicateContent"
    Internal = "Internal"


@dataclass(frozen=True)
class RejectionReason:
    kind: RejectKind
    detail: str = ""


@dataclass(frozen=True)
class FetchPolicy:
    max_redirects: int = 5
    max_retries: int = 2
    timeout: float = 30.0
    max_bytes: int = 10 * 1024 * 1024
    accepted_content_types: tuple[str, ...] = DEFAULT_CONTENT_TYPES
    user_agent: str = "docharvest/0.1"
    retry_backoff: float = 1.0  # seconds, doubled per attempt
    host_delay: float = 0.0

    def __post_init__(self):
        if self.max_bytes <= 0:
            raise ValueError("max_bytes must be positive")
        if not self.accepted_content_types:
            raise ValueError("accepted_content_types must not be empty")
        if self.max_redirects < 0 or self.max_retries < 0 or self.timeout <= 0:
            raise ValueError("redirect/retry counts must be >= 0 and timeout > 0")
        object.__setattr__(self, "accepted_content_types",
                           tuple(t.lower() for t in self.accepted_content_types))

    @classmethod
    def from_dict(cls, data: dict) -> "FetchPolicy":
        unknown = set(data) - set(cls.__dataclass_fields__)
        if unknown:
            raise ValueError(f"unknown fetch policy keys: {sorted(unknown)}")
        data = dict(data)
        if "accepted_content_types" in data:
            data["accepted_content_types"] = tuple(data["accepted_content_types"])
        return cls(**data)


JOURNAL_FIELDS = ("url", "status", "http_code", "reason_kind", "reason_detail", "byte_hash",
                  "content_length", "fetched_at")


@dataclass
class FetchOutcome:
    url: str
    status: FetchStatus
    http_code: int | None = None
    reason: RejectionReason | None = None
    byte_hash: str | None = None
    stored_path: str | None = None
    content_length: int | None = None
    fetched_at: str = ""
    # transient, never serialized
    body: bytes | None = field(default=None, repr=False, compare=False)
    fmt: str | None = field(default=None, compare=False)  # "docx" | "doc"
    content_type_override: bool = field(default=False, compare=False)

    def to_record(self) -> dict:
        return {
            "url": self.url,
            "status": self.status.value,
            "http_code": self.http_code,
            "reason_kind": self.reason.kind.value if self.reason else None,
            "reason_detail": self.reason.detail if self.reason else None,
            "byte_hash": self.byte_hash,
            "content_length": self.content_length,
            "fetched_at": self.fetched_at,
        }

    @classmethod
    def from_record(cls, rec: dict, stored_path: str | None = None) -> "FetchOutcome":
        reason = None
        if rec.get("reason_kind"):
            reason = RejectionReason(RejectKind(rec["reason_kind"]), rec.get("reason_detail") or "")
        return cls(rec["url"], FetchStatus(rec["status"]), rec.get("http_code"), reason,
                   rec.get("byte_hash"), stored_path, rec.get("content_length"), rec.get("fetched_at", ""))

    def check(self) -> None:
        stored = self.status == FetchStatus.Stored
        if stored != (self.byte_hash is not None and self.stored_path is not None):
            raise AssertionError(f"{self.url}: Stored iff hash and path")
        if stored == (self.reason is not None):
            raise AssertionError(f"{self.url}: non-Stored iff reason")


@dataclass(frozen=True)
class MaldocFlags:
    has_vba: bool = False
    has_external_relations: bool = False
    has_ole_object_pool: bool = False
    is_encrypted: bool = False
    has_flash: bool = False

    @property
    def malicious(self) -> bool:
        return any(getattr(self, k) for k in self.__dataclass_fields__)

    def names(self) -> list[str]:
        return [k for k in self.__dataclass_fields__ if getattr(self, k)]
