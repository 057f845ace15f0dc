"""Snapshot harvest: parallel WAT parsing followed by a single-owner merge."""
from __future__ import annotations

import json
import logging
from concurrent.futures import ProcessPoolExecutor
from contextlib import contextmanager
from dataclasses import asdict
from pathlib import Path
from typing import BinaryIO, Iterator

from .dedup import UrlLedger, dedup_snapshot
from .urls import UrlRecord, extract_word_urls
from .warc import ParseStats, parse_wat_stream

logger = logging.getLogger(__name__)

STATS_FILE = "harvest_stats.json"


def read_manifest(path: Path) -> list[str]:
    base = path.parent
    entries = []
    for line in path.read_text(encoding="utf-8").splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if "://" not in line and not Path(line).is_absolute():
            line = str(base / line)
        entries.append(line)
    return entries


@contextmanager
def open_wat(location: str) -> Iterator[BinaryIO]:
    if location.startswith(("http://", "https://")):
        import requests

        with requests.get(location, stream=True, timeout=60) as resp:
            resp.raise_for_status()
            resp.raw.decode_content = False
            yield resp.raw
    else:
        with open(location, "rb") as fh:
            yield fh


def harvest_file(location: str, snapshot_id: str) -> tuple[list[str], dict]:
    """Word URLs found in one WAT file (raw, not deduplicated) and its parse counters."""
    stats = ParseStats()
    counters: dict[str, int] = {}
    urls: list[str] = []
    try:
        with open_wat(location) as fh:
            for record in parse_wat_stream(fh, stats):
                for rec in extract_word_urls(record, snapshot_id=snapshot_id, source_wat=location,
                                             counters=counters):
                    urls.append(rec.url)
    except OSError as exc:
        stats.corrupt = True
        stats.errors.append(f"open failed: {exc}")
    info = asdict(stats)
    info["total"] = stats.total
    info["bad_links"] = counters.get("bad_links", 0)
    return urls, info


def _worker(args: tuple[int, str, str, str]) -> int:
    idx, location, snapshot_id, work_dir = args
    urls, info = harvest_file(location, snapshot_id)
    part = Path(work_dir) / f"part-{idx:05d}"
    part.with_suffix(".txt").write_text("".join(u + "\n" for u in urls), encoding="utf-8")
    info["source"] = location
    part.with_suffix(".json").write_text(json.dumps(info, sort_keys=True), encoding="utf-8")
    return idx


def harvest_snapshot(manifest: Path, snapshot_id: str, ledger_dir: Path, workers: int = 1) -> dict:
    """Harvest one snapshot into `ledger_dir` and return its counts."""
    locations = read_manifest(manifest)
    work_dir = ledger_dir / "work" / snapshot_id
    work_dir.mkdir(parents=True, exist_ok=True)
    todo = [
        (i, loc, snapshot_id, str(work_dir))
        for i, loc in enumerate(locations)
        if not (work_dir / f"part-{i:05d}.json").exists()
    ]
    if workers > 1 and len(todo) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            list(pool.map(_worker, todo))
    else:
        for item in todo:
            _worker(item)

    raw: list[UrlRecord] = []
    counts = {"files": len(locations), "parse_errors": 0, "truncated_files": 0,
              "corrupt_files": 0, "records": 0, "bad_links": 0}
    for i, loc in enumerate(locations):
        part = work_dir / f"part-{i:05d}"
        info = json.loads(part.with_suffix(".json").read_text(encoding="utf-8"))
        counts["parse_errors"] += info["header_errors"]
        counts["truncated_files"] += int(info["truncated"])
        counts["corrupt_files"] += int(info["corrupt"])
        counts["records"] += info["total"]
        counts["bad_links"] += info["bad_links"]
        for url in part.with_suffix(".txt").read_text(encoding="utf-8").splitlines():
            raw.append(UrlRecord(url, snapshot_id, loc))

    unique = dedup_snapshot(raw)
    urls_dir = ledger_dir / "urls"
    ledger = UrlLedger.load(urls_dir)
    if snapshot_id in ledger.snapshot_order:
        # re-run of an already merged snapshot: its URLs are already owned
        kept_count = len(ledger.urls_of(snapshot_id))
    else:
        kept_count = len(ledger.admit(unique))
    ledger.save(urls_dir)

    counts.update(
        raw=len(raw),
        snapshot_unique=len(unique),
        globally_unique=kept_count,
        snapshot_dedup_ratio=(1 - len(unique) / len(raw)) if raw else 0.0,
    )
    _update_stats(ledger_dir / STATS_FILE, snapshot_id, counts)
    logger.info("snapshot %s: %d raw, %d unique, %d new", snapshot_id, len(raw), len(unique), kept_count)
    return counts


def _update_stats(path: Path, snapshot_id: str, counts: dict) -> None:
    data = json.loads(path.read_text(encoding="utf-8")) if path.exists() else {"snapshots": {}}
    data["snapshots"][snapshot_id] = counts
    totals: dict[str, float] = {}
    for snap in data["snapshots"].values():
        for key in ("raw", "snapshot_unique", "globally_unique", "parse_errors", "files"):
            totals[key] = totals.get(key, 0) + snap[key]
    data["totals"] = totals
    path.write_text(json.dumps(data, indent=2, sort_keys=True) + "\n", encoding="utf-8")
