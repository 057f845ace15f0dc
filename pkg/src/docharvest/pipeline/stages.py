"""The five pipeline stages. Each one reads the previous stage's journal and is safe to rerun."""
from __future__ import annotations

import hashlib
import json
import logging
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

from ..annotate import (
    ColorMap,
    MockRenderer,
    SubprocessRenderer,
    annotate_document,
    extract_doc_text,
    load_page_annotations,
    write_document_outputs,
)
from ..docx import parse_document
from ..fetcher.run import JOURNAL as FETCH_JOURNAL
from ..fetcher.run import STATS as FETCH_STATS
from ..fetcher.run import load_worker_journals, read_journal, read_url_list, run_fetch
from ..fetcher.types import FetchStatus
from ..harvest.dedup import UrlLedger
from ..harvest.run import STATS_FILE as HARVEST_STATS
from ..harvest.run import harvest_snapshot, read_manifest
from ..quality import LanguageModels, compute_metadata, default_classifier
from .config import PipelineConfig

logger = logging.getLogger(__name__)

CFB_MAGIC = b"\xd0\xcf\x11\xe0\xa1\xb1\x1a\xe1"
JOURNAL = "journal.jsonl"


class StagePrereqMissing(RuntimeError):
    def __init__(self, stage: str, missing: Path | str):
        super().__init__(f"{stage}: missing input {missing}")
        self.stage = stage
        self.missing = missing


class StageFailure(RuntimeError):
    pass


# journals --------------------------------------------------------------------

def read_records(path: Path) -> dict[str, dict]:
    """Last record per hash; a torn trailing line from an interrupted run is ignored."""
    out: dict[str, dict] = {}
    if not path.exists():
        return out
    for line in path.read_text(encoding="utf-8").splitlines():
        try:
            rec = json.loads(line)
        except json.JSONDecodeError:
            continue
        out[rec["hash"]] = rec
    return out


def _append(path: Path, records: list[dict]) -> None:
    if not records:
        return
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "a", encoding="utf-8") as fh:
        for rec in records:
            fh.write(json.dumps(rec, sort_keys=True) + "\n")


def _write_json(path: Path, data) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_suffix(path.suffix + ".tmp")
    tmp.write_text(json.dumps(data, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    tmp.replace(path)


def file_sha256(path: Path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


# harvest ---------------------------------------------------------------------

def harvest_stage(cfg: PipelineConfig) -> dict:
    out = cfg.out / "harvest"
    snapshots = cfg.harvest.snapshots
    if not snapshots:
        raise StagePrereqMissing("harvest", "harvest.snapshots")
    executed = 0
    for snap in snapshots:
        manifest = cfg.resolve(snap.manifest)
        if not snap.id or not manifest.is_file():
            raise StagePrereqMissing("harvest", manifest)
        work = out / "work" / snap.id
        done = len(list(work.glob("part-*.json"))) if work.exists() else 0
        executed += max(0, len(read_manifest(manifest)) - done)
        harvest_snapshot(manifest, snap.id, out, cfg.workers.harvest)
    counts = harvest_counts(cfg.out)
    counts["executed"] = executed
    return counts


def harvest_counts(out: Path) -> dict:
    stats_path = out / "harvest" / HARVEST_STATS
    if not stats_path.exists():
        return {}
    snaps = json.loads(stats_path.read_text(encoding="utf-8"))["snapshots"]
    raw = sum(s["raw"] for s in snaps.values())
    unique = sum(s["snapshot_unique"] for s in snaps.values())
    kept = sum(s["globally_unique"] for s in snaps.values())
    return {
        "inputs": raw,
        "outputs": kept,
        "rejections": {"SnapshotDuplicate": raw - unique, "CrossSnapshotDuplicate": unique - kept},
        "files": sum(s["files"] for s in snaps.values()),
        "parse_errors": sum(s["parse_errors"] for s in snaps.values()),
    }


def harvested_urls(out: Path) -> list[str]:
    """Harvested URLs, snapshot by snapshot in processing order, sorted within each snapshot."""
    urls_dir = out / "harvest" / "urls"
    if not (urls_dir / "snapshots.order").exists():
        raise StagePrereqMissing("fetch", urls_dir)
    ledger = UrlLedger.load(urls_dir)
    return [u for snap in ledger.snapshot_order for u in ledger.urls_of(snap)]


# fetch -----------------------------------------------------------------------

def fetch_stage(cfg: PipelineConfig, transport=None, sleep=None) -> dict:
    if cfg.fetch.url_list:
        path = cfg.resolve(cfg.fetch.url_list)
        if not path.is_file():
            raise StagePrereqMissing("fetch", path)
        urls = read_url_list(path)
    else:
        urls = harvested_urls(cfg.out)
    out = cfg.out / "fetch"
    before = load_worker_journals(out / "journals")
    kwargs = {"sleep": sleep} if sleep is not None else {}
    run_fetch(urls, out, cfg.fetch_policy(), transport, cfg.workers.fetch, **kwargs)
    counts = fetch_counts(cfg.out)
    counts["executed"] = sum(1 for u in dict.fromkeys(urls) if u not in before)
    return counts


def fetch_counts(out: Path) -> dict:
    path = out / "fetch" / FETCH_STATS
    if not path.exists():
        return {}
    stats = json.loads(path.read_text(encoding="utf-8"))
    return {
        "inputs": stats["requested"],
        "outputs": stats["stored"],
        "rejections": stats["by_reason"],
        "maldoc_flags": stats["maldoc_flags"],
        "content_type_overrides": stats["content_type_overrides"],
    }


def stored_documents(out: Path) -> list[tuple[str, str]]:
    """(hash, path) of every stored document in fetch journal order."""
    journal = out / "fetch" / FETCH_JOURNAL
    if not journal.exists():
        raise StagePrereqMissing("annotate", journal)
    seen: dict[str, str] = {}
    for o in read_journal(journal):
        if o.status == FetchStatus.Stored and o.byte_hash not in seen:
            if o.stored_path is None:
                raise StageFailure(f"stored document {o.byte_hash} is missing from the store")
            seen[o.byte_hash] = o.stored_path
    return list(seen.items())


# annotate ----------------------------------------------------------------------

def make_renderer(spec, dpi: int, timeout: float):
    if spec == "mock":
        return MockRenderer(dpi=dpi)
    return SubprocessRenderer(spec, dpi=dpi, timeout=timeout)


def _annotate_one(job: tuple) -> dict:
    digest, path, renderer_spec, dpi, timeout, max_pages, min_chars, colors, out_dir = job
    data = Path(path).read_bytes()
    rec = {"hash": digest, "status": "ok", "reason": None, "pages": 0, "passes": 0,
           "colorize_failures": 0, "page_count_mismatch": False}
    if data.startswith(CFB_MAGIC):
        rec.update(status="rejected", reason="LegacyFormat")
        return rec
    renderer = make_renderer(renderer_spec, dpi, timeout)
    try:
        result = annotate_document(data, renderer, ColorMap.from_overrides(colors), source_hash=digest,
                                   max_pages=max_pages, min_chars=min_chars)
    except Exception as exc:  # keep one bad document from sinking the batch
        logger.exception("annotate crashed on %s", digest)
        rec.update(status="failed", reason=f"Internal: {type(exc).__name__}")
        return rec
    rec.update(status=result.status, reason=result.reason, passes=result.passes,
               colorize_failures=result.colorize_failures, page_count_mismatch=result.page_count_mismatch)
    if result.ok:
        write_document_outputs(result, Path(out_dir))
        rec["pages"] = len(result.pages)
    return rec


def _annotation_intact(rec: dict | None, out_dir: Path) -> bool:
    if rec is None:
        return False
    if rec["status"] != "ok":
        return True
    if not (out_dir / "ann" / f"{rec['hash']}.json").exists():
        return False
    return all((out_dir / "pages" / f"{rec['hash']}_{i}.png").exists() for i in range(rec["pages"]))


def annotate_stage(cfg: PipelineConfig) -> dict:
    docs = stored_documents(cfg.out)
    out_dir = cfg.out / "annotate"
    journal = out_dir / JOURNAL
    done = read_records(journal)
    a = cfg.annotate
    jobs = [(h, p, a.renderer, a.dpi, a.timeout, a.max_pages, a.min_chars, a.colors, str(out_dir))
            for h, p in docs if not _annotation_intact(done.get(h), out_dir)]
    out_dir.mkdir(parents=True, exist_ok=True)
    if cfg.workers.annotate > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=cfg.workers.annotate) as pool:
            records = list(pool.map(_annotate_one, jobs))  # map keeps input order
    else:
        records = [_annotate_one(j) for j in jobs]
    _append(journal, records)
    journal.touch()
    counts = annotate_counts(cfg.out, [h for h, _ in docs])
    counts["executed"] = len(jobs)
    return counts


def annotate_counts(out: Path, hashes: list[str] | None = None) -> dict:
    records = read_records(out / "annotate" / JOURNAL)
    if hashes is None:
        try:
            hashes = [h for h, _ in stored_documents(out)]
        except StagePrereqMissing:
            hashes = sorted(records)
    status = {"ok": 0, "rejected": 0, "failed": 0}
    reasons: dict[str, int] = {}
    pages = 0
    missing = 0
    for h in hashes:
        rec = records.get(h)
        if rec is None:
            missing += 1
            continue
        status[rec["status"]] += 1
        pages += rec["pages"]
        if rec["status"] != "ok":
            reasons[rec["reason"]] = reasons.get(rec["reason"], 0) + 1
    return {"inputs": len(hashes), "outputs": status["ok"], "rejected": status["rejected"],
            "failed": status["failed"], "pending": missing, "pages": pages,
            "rejections": dict(sorted(reasons.items()))}


def annotated_documents(out: Path) -> list[dict]:
    """Journal records of ok annotations, in fetch order."""
    journal = out / "annotate" / JOURNAL
    if not journal.exists():
        raise StagePrereqMissing("quality", journal)
    records = read_records(journal)
    try:
        order = [h for h, _ in stored_documents(out)]
    except StagePrereqMissing:
        order = sorted(records)
    return [records[h] for h in order if h in records and records[h]["status"] == "ok"]


# quality -----------------------------------------------------------------------

def quality_stage(cfg: PipelineConfig) -> dict:
    docs = annotated_documents(cfg.out)
    store_paths = dict(stored_documents(cfg.out))
    out_dir = cfg.out / "quality"
    meta_dir = out_dir / "meta"
    meta_dir.mkdir(parents=True, exist_ok=True)
    lms = LanguageModels(order=cfg.quality.kn_order)
    classifier = default_classifier()
    records = []
    for rec in docs:
        h = rec["hash"]
        ann_path = cfg.out / "annotate" / "ann" / f"{h}.json"
        digest = file_sha256(ann_path)
        meta_path = meta_dir / f"{h}.json"
        if meta_path.exists():
            try:
                if json.loads(meta_path.read_text(encoding="utf-8")).get("ann_digest") == digest:
                    continue
            except json.JSONDecodeError:
                pass
        try:
            parsed = parse_document(Path(store_paths[h]).read_bytes(), h)
            pages = load_page_annotations(ann_path)
            doc_text = extract_doc_text(parsed.model)
            meta = compute_metadata(parsed.model, doc_text, [p.page_text for p in pages], lms, classifier,
                                    cfg.quality.weight_by, cfg.quality.zero_text)
        except Exception as exc:
            logger.exception("quality failed on %s", h)
            records.append({"hash": h, "status": "failed", "reason": type(exc).__name__, "ann_digest": digest})
            continue
        meta.update(hash=h, ann_digest=digest, pages=len(pages), words=meta["text_stats"]["word_count"])
        _write_json(meta_path, meta)
        records.append({"hash": h, "status": "ok", "reason": None, "ann_digest": digest})
    _append(out_dir / JOURNAL, records)
    (out_dir / JOURNAL).touch()
    counts = quality_counts(cfg.out, docs)
    counts["executed"] = len(records)
    return counts


def quality_counts(out: Path, docs: list[dict] | None = None) -> dict:
    if docs is None:
        try:
            docs = annotated_documents(out)
        except StagePrereqMissing:
            return {}
    meta_dir = out / "quality" / "meta"
    records = read_records(out / "quality" / JOURNAL)
    ok = failed = 0
    for rec in docs:
        q = records.get(rec["hash"])
        if q is not None and q["status"] == "failed":
            failed += 1
        elif (meta_dir / f"{rec['hash']}.json").exists():
            ok += 1
    return {"inputs": len(docs), "outputs": ok, "failed": failed, "pending": len(docs) - ok - failed,
            "rejections": {}}


def load_metadata(out: Path) -> list[dict]:
    """Quality metadata of every annotated document that has it, sorted by hash."""
    docs = annotated_documents(out)
    meta_dir = out / "quality" / "meta"
    records = read_records(out / "quality" / JOURNAL)
    metas = []
    for rec in docs:
        q = records.get(rec["hash"])
        path = meta_dir / f"{rec['hash']}.json"
        if (q is None or q["status"] == "ok") and path.exists():
            metas.append(json.loads(path.read_text(encoding="utf-8")))
    return sorted(metas, key=lambda m: m["hash"])
