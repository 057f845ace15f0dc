from __future__ import annotations

import logging
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

from .urls import UrlRecord

logger = logging.getLogger(__name__)

GLOBAL_LEDGER = "global.ledger"


def dedup_snapshot(records: Iterable[UrlRecord]) -> list[UrlRecord]:
    """First occurrence of every URL, in input order."""
    seen: set[str] = set()
    out = []
    for rec in records:
        if rec.url not in seen:
            seen.add(rec.url)
            out.append(rec)
    return out


@dataclass
class UrlLedger:
    """URLs admitted so far, each owned by the snapshot that admitted it first.

    Snapshots are expected newest-first so that the newest copy of a URL
    becomes its canonical owner.
    """

    seen: dict[str, str] = field(default_factory=dict)
    snapshot_order: list[str] = field(default_factory=list)

    def __contains__(self, url: str) -> bool:
        return url in self.seen

    def __len__(self) -> int:
        return len(self.seen)

    def copy(self) -> "UrlLedger":
        return UrlLedger(dict(self.seen), list(self.snapshot_order))

    def admit(self, snapshot: Sequence[UrlRecord]) -> list[UrlRecord]:
        """Insert the snapshot's new URLs in place and return them."""
        if not snapshot:
            return []
        snap_id = snapshot[0].snapshot_id
        if snap_id not in self.snapshot_order:
            older = [s for s in self.snapshot_order if s < snap_id]
            if older:
                logger.warning(
                    "snapshot %s is newer than already processed %s; shared URLs stay with the older one",
                    snap_id, ", ".join(older),
                )
            self.snapshot_order.append(snap_id)
        kept = []
        for rec in snapshot:
            if rec.url not in self.seen:
                self.seen[rec.url] = rec.snapshot_id
                kept.append(rec)
        return kept

    def urls_of(self, snapshot_id: str) -> list[str]:
        return sorted(u for u, s in self.seen.items() if s == snapshot_id)

    def save(self, directory: Path) -> None:
        """Write one sorted URL file per snapshot plus the compacted global set."""
        directory.mkdir(parents=True, exist_ok=True)
        by_snap: dict[str, list[str]] = {s: [] for s in self.snapshot_order}
        for url, snap in self.seen.items():
            by_snap.setdefault(snap, []).append(url)
        for snap, urls in by_snap.items():
            _write_lines(directory / f"{snap}.txt", sorted(urls))
        _write_lines(directory / GLOBAL_LEDGER, sorted(self.seen))
        _write_lines(directory / "snapshots.order", self.snapshot_order)

    @classmethod
    def load(cls, directory: Path) -> "UrlLedger":
        ledger = cls()
        order_file = directory / "snapshots.order"
        if not order_file.exists():
            return ledger
        ledger.snapshot_order = _read_lines(order_file)
        for snap in ledger.snapshot_order:
            path = directory / f"{snap}.txt"
            if path.exists():
                for url in _read_lines(path):
                    ledger.seen.setdefault(url, snap)
        return ledger


def dedup_global(ledger: UrlLedger, snapshot: Sequence[UrlRecord]) -> tuple[list[UrlRecord], UrlLedger]:
    """Records absent from `ledger`, and a new ledger that also holds them."""
    updated = ledger.copy()
    kept = updated.admit(snapshot)
    return kept, updated


def _write_lines(path: Path, lines: Iterable[str]) -> None:
    tmp = path.with_name(path.name + ".tmp")
    with open(tmp, "w", encoding="utf-8", newline="\n") as fh:
        for line in lines:
            fh.write(line + "\n")
    os.replace(tmp, path)


def _read_lines(path: Path) -> list[str]:
    with open(path, encoding="utf-8") as fh:
        return [line.rstrip("\n") for line in fh if line.strip()]
