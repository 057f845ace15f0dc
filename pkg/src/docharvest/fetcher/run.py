"""Batch fetch: a thread pool with private journals, merged by a single owner."""
from __future__ import annotations

import json
import logging
import threading
import time
from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import Callable, Iterable
from urllib.parse import urlsplit

from .fetch import RequestsTransport, Transport, fetch_document, utc_now
from .store import ContentLedger, DocumentStore, dedup_by_hash
from .types import JOURNAL_FIELDS, FetchOutcome, FetchPolicy, FetchStatus

logger = logging.getLogger(__name__)

JOURNAL = "fetch_journal.jsonl"
STATS = "fetch_stats.json"
LEDGER = "content_ledger.txt"


def read_url_list(path: Path) -> list[str]:
    seen, out = set(), []
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        url = line.strip()
        if url and not url.startswith("#") and url not in seen:
            seen.add(url)
            out.append(url)
    return out


class _HostThrottle:
    def __init__(self, delay: float):
        self.delay = delay
        self._last: dict[str, float] = {}
        self._lock = threading.Lock()

    def wait(self, url: str) -> None:
        if self.delay <= 0:
            return
        host = urlsplit(url).hostname or ""
        with self._lock:
            now = time.monotonic()
            start = max(now, self._last.get(host, 0.0) + self.delay)
            self._last[host] = start
        time.sleep(max(0.0, start - now))


class _Journals:
    """One append-only file per worker thread."""

    def __init__(self, folder: Path):
        self.folder = folder
        folder.mkdir(parents=True, exist_ok=True)
        self._local = threading.local()
        self._lock = threading.Lock()
        self._handles = []

    def write(self, record: dict) -> None:
        fh = getattr(self._local, "fh", None)
        if fh is None:
            with self._lock:
                idx = len(list(self.folder.glob("worker-*.jsonl"))) + len(self._handles)
                fh = open(self.folder / f"worker-{idx:04d}.jsonl", "a", encoding="utf-8")
                self._handles.append(fh)
            self._local.fh = fh
        fh.write(json.dumps(record, sort_keys=True) + "\n")
        fh.flush()

    def close(self) -> None:
        for fh in self._handles:
            fh.close()


def load_worker_journals(folder: Path) -> dict[str, dict]:
    done: dict[str, dict] = {}
    for path in sorted(Path(folder).glob("worker-*.jsonl")):
        for line in path.read_text(encoding="utf-8").splitlines():
            try:
                rec = json.loads(line)
            except json.JSONDecodeError:
                continue  # torn final line from an interrupted run
            done[rec["url"]] = rec
    return done


def run_fetch(urls: Iterable[str], out_dir: Path, policy: FetchPolicy = FetchPolicy(),
              transport: Transport | None = None, workers: int = 32, *,
              clock: Callable[[], str] = utc_now, sleep: Callable[[float], None] = time.sleep,
              prior_ledger: ContentLedger | None = None) -> dict:
    """Fetch every URL once; resumable from the worker journals in out_dir."""
    out_dir = Path(out_dir)
    url_list = list(dict.fromkeys(urls))
    store = DocumentStore(out_dir / "docs")
    journal_dir = out_dir / "journals"
    done = load_worker_journals(journal_dir)
    todo = [u for u in url_list if not _still_valid(done.get(u), store)]
    transport = transport or RequestsTransport()
    throttle = _HostThrottle(policy.host_delay)
    journals = _Journals(journal_dir)

    def work(url: str) -> None:
        throttle.wait(url)
        outcome = fetch_document(url, policy, transport, store, clock=clock, sleep=sleep)
        rec = outcome.to_record()
        rec["fmt"] = outcome.fmt
        rec["content_type_override"] = outcome.content_type_override
        journals.write(rec)

    try:
        if workers <= 1:
            for url in todo:
                work(url)
        else:
            with ThreadPoolExecutor(max_workers=workers) as pool:
                list(pool.map(work, todo))
    finally:
        journals.close()
    return merge_journals(url_list, out_dir, prior_ledger)


def _still_valid(rec: dict | None, store: DocumentStore) -> bool:
    if rec is None:
        return False
    if rec["status"] == FetchStatus.Stored.value:
        return store.find(rec["byte_hash"]) is not None
    return True


def merge_journals(url_list: list[str], out_dir: Path, prior_ledger: ContentLedger | None = None) -> dict:
    """Input-order merge with byte-hash dedup; deterministic for fixed inputs."""
    out_dir = Path(out_dir)
    store = DocumentStore(out_dir / "docs")
    done = load_worker_journals(out_dir / "journals")
    ledger = ContentLedger(prior_ledger.hashes if prior_ledger else ())
    outcomes: list[FetchOutcome] = []
    overrides = 0
    for url in url_list:
        rec = done.get(url)
        if rec is None:
            continue
        path = store.find(rec["byte_hash"]) if rec["status"] == FetchStatus.Stored.value else None
        outcome = FetchOutcome.from_record(rec, str(path) if path else None)
        outcome = dedup_by_hash(outcome, ledger)
        if outcome.status == FetchStatus.Stored and rec.get("content_type_override"):
            overrides += 1
        outcomes.append(outcome)
    with open(out_dir / JOURNAL, "w", encoding="utf-8") as fh:
        for o in outcomes:
            rec = o.to_record()
            fh.write(json.dumps({k: rec[k] for k in JOURNAL_FIELDS}) + "\n")
    stored_hashes = {o.byte_hash for o in outcomes if o.status == FetchStatus.Stored}
    ContentLedger(stored_hashes).save(out_dir / LEDGER)
    stats = fetch_stats(outcomes, overrides, len(url_list))
    (out_dir / STATS).write_text(json.dumps(stats, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return stats


def fetch_stats(outcomes: list[FetchOutcome], overrides: int = 0, requested: int | None = None) -> dict:
    by_status = Counter(o.status.value for o in outcomes)
    by_reason = Counter(o.reason.kind.value for o in outcomes if o.reason)
    maldoc = Counter()
    for o in outcomes:
        if o.reason and o.reason.kind.value == "Maldoc":
            maldoc.update(f for f in o.reason.detail.split(",") if f)
    return {
        "requested": requested if requested is not None else len(outcomes),
        "outcomes": len(outcomes),
        "stored": by_status.get("Stored", 0),
        "by_status": dict(sorted(by_status.items())),
        "by_reason": dict(sorted(by_reason.items())),
        "maldoc_flags": dict(sorted(maldoc.items())),
        "content_type_overrides": overrides,
    }


def read_journal(path: Path) -> list[FetchOutcome]:
    store = DocumentStore(Path(path).parent / "docs")
    out = []
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        rec = json.loads(line)
        p = store.find(rec["byte_hash"]) if rec["status"] == FetchStatus.Stored.value else None
        out.append(FetchOutcome.from_record(rec, str(p) if p else None))
    return out
