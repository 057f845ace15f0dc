from __future__ import annotations

import hashlib
import os
import tempfile
import threading
from dataclasses import replace
from pathlib import Path

from .types import FetchOutcome, FetchStatus, RejectionReason, RejectKind


class DocumentStore:
    """Content-addressed files: docs/<first two hex chars>/<hash>.<ext>."""

    def __init__(self, root: Path):
        self.root = Path(root)

    def path(self, digest: str, fmt: str) -> Path:
        return self.root / digest[:2] / f"{digest}.{fmt}"

    def put(self, data: bytes, fmt: str, digest: str | None = None) -> Path:
        digest = digest or hashlib.sha256(data).hexdigest()
        target = self.path(digest, fmt)
        if target.exists():
            return target
        target.parent.mkdir(parents=True, exist_ok=True)
        fd, tmp = tempfile.mkstemp(dir=target.parent, prefix=".tmp-")
        try:
            with os.fdopen(fd, "wb") as fh:
                fh.write(data)
            os.replace(tmp, target)
        except BaseException:
            if os.path.exists(tmp):
                os.unlink(tmp)
            raise
        return target

    def find(self, digest: str) -> Path | None:
        for fmt in ("docx", "doc"):
            p = self.path(digest, fmt)
            if p.exists():
                return p
        return None

    def remove(self, digest: str) -> None:
        for fmt in ("docx", "doc"):
            self.path(digest, fmt).unlink(missing_ok=True)

    def digests(self) -> list[str]:
        if not self.root.exists():
            return []
        return sorted(p.stem for p in self.root.glob("??/*.doc*") if not p.name.startswith("."))


class ContentLedger:
    """Admitted byte hashes; check-and-insert is atomic."""

    def __init__(self, hashes=()):
        self.hashes: set[str] = set(hashes)
        self._lock = threading.Lock()

    def admit(self, digest: str) -> bool:
        with self._lock:
            if digest in self.hashes:
                return False
            self.hashes.add(digest)
            return True

    def __contains__(self, digest: str) -> bool:
        return digest in self.hashes

    def __len__(self) -> int:
        return len(self.hashes)

    def serialize(self) -> str:
        return "".join(f"{h}\n" for h in sorted(self.hashes))

    def save(self, path: Path) -> None:
        Path(path).write_text(self.serialize(), encoding="ascii")

    @classmethod
    def load(cls, path: Path) -> "ContentLedger":
        p = Path(path)
        if not p.exists():
            return cls()
        return cls(line.strip() for line in p.read_text(encoding="ascii").splitlines() if line.strip())


def dedup_by_hash(outcome: FetchOutcome, ledger: ContentLedger) -> FetchOutcome:
    if outcome.status != FetchStatus.Stored:
        return outcome
    if ledger.admit(outcome.byte_hash):
        return outcome
    # the bytes live on under the first owner's content-addressed path
    return replace(outcome, status=FetchStatus.Rejected, stored_path=None, body=None,
                   reason=RejectionReason(RejectKind.DuplicateContent, outcome.byte_hash))
