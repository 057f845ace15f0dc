"""Filtered, shuffled, sharded COCO dataset with a hash manifest."""
from __future__ import annotations

import hashlib
import json
import random
import shutil
from pathlib import Path

from ..annotate import CocoBuilder, load_page_annotations
from ..quality import FilterSpec, apply_filters
from .stages import StagePrereqMissing, load_metadata

MANIFEST = "manifest.json"
META_FIELDS = ("language", "language_confidence", "perplexity", "reliability", "entity_counts")


def shard_sizes(n_pages: int, shard_size: int) -> list[int]:
    full, rest = divmod(n_pages, shard_size)
    return [shard_size] * full + ([rest] if rest else [])


def shard_digest(shard_dir: Path) -> str:
    """sha256 over every file's relative path and content hash, in sorted path order."""
    h = hashlib.sha256()
    files = [p for p in Path(shard_dir).rglob("*") if p.is_file()]
    for p in sorted(files, key=lambda p: p.relative_to(shard_dir).as_posix()):
        h.update(p.relative_to(shard_dir).as_posix().encode("utf-8") + b"\0")
        h.update(hashlib.sha256(p.read_bytes()).hexdigest().encode("ascii") + b"\n")
    return h.hexdigest()


def emit_dataset(out: Path, spec: FilterSpec, shard_size: int, seed: int) -> dict:
    """Rebuild out/dataset from the annotate and quality outputs; returns the manifest."""
    if not (out / "quality" / "journal.jsonl").exists():
        raise StagePrereqMissing("emit", out / "quality" / "journal.jsonl")
    metas = load_metadata(out)
    result = apply_filters(metas, spec)
    accepted = {m["hash"]: m for m in result.accepted}

    ann_dir = out / "annotate" / "ann"
    pages: dict[tuple[str, int], object] = {}
    for h in sorted(accepted):
        for page in load_page_annotations(ann_dir / f"{h}.json"):
            pages[(h, page.page_index)] = page
    order = sorted(pages)
    random.Random(seed).shuffle(order)

    dataset = out / "dataset"
    if dataset.exists():
        shutil.rmtree(dataset)
    shards = []
    start = 0
    for i, size in enumerate(shard_sizes(len(order), shard_size)):
        name = f"shard-{i:05d}"
        shard_dir = dataset / "shards" / name
        (shard_dir / "images").mkdir(parents=True)
        coco = CocoBuilder()
        lines = []
        for h, idx in order[start:start + size]:
            page = pages[(h, idx)]
            coco.add_document(h, [page])
            file_name = f"{h}_{idx}.png"
            shutil.copyfile(out / "annotate" / "pages" / file_name, shard_dir / "images" / file_name)
            meta = accepted[h]
            page_lang = meta["page_languages"][idx] if idx < len(meta["page_languages"]) else None
            row = {"file_name": file_name, "hash": h, "page_index": idx,
                   "page_language": page_lang, "words": len(page.words)}
            row.update({k: meta.get(k) for k in META_FIELDS})
            lines.append(json.dumps(row, sort_keys=True))
        (shard_dir / "annotations.json").write_text(json.dumps(coco.to_dict(), sort_keys=True), encoding="utf-8")
        (shard_dir / "meta.jsonl").write_text("".join(line + "\n" for line in lines), encoding="utf-8")
        shards.append({"name": name, "pages": size, "sha256": shard_digest(shard_dir)})
        start += size

    manifest = {
        "seed": seed,
        "shard_size": shard_size,
        "shards": shards,
        "totals": {"documents": result.total, "accepted_documents": len(accepted), "pages": len(order)},
        "filter": {"rejected_by": result.rejected_by},
    }
    dataset.mkdir(parents=True, exist_ok=True)
    (dataset / MANIFEST).write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return manifest


def emit_counts(out: Path) -> dict:
    path = out / "dataset" / MANIFEST
    if not path.exists():
        return {}
    m = json.loads(path.read_text(encoding="utf-8"))
    return {"inputs": m["totals"]["documents"], "outputs": m["totals"]["accepted_documents"],
            "pages": m["totals"]["pages"], "shards": len(m["shards"]), "rejections": m["filter"]["rejected_by"]}


def verify_dataset(dataset: Path) -> list[str]:
    """Problems found when re-hashing the shards against the manifest; empty means intact."""
    path = Path(dataset) / MANIFEST
    if not path.exists():
        return [f"missing {path}"]
    manifest = json.loads(path.read_text(encoding="utf-8"))
    problems = []
    listed = {s["name"] for s in manifest["shards"]}
    shards_dir = Path(dataset) / "shards"
    present = {p.name for p in shards_dir.iterdir()} if shards_dir.exists() else set()
    for extra in sorted(present - listed):
        problems.append(f"{extra}: not in manifest")
    for s in manifest["shards"]:
        shard_dir = shards_dir / s["name"]
        if not shard_dir.is_dir():
            problems.append(f"{s['name']}: missing")
            continue
        if shard_digest(shard_dir) != s["sha256"]:
            problems.append(f"{s['name']}: hash mismatch")
        n_images = len(list((shard_dir / "images").glob("*.png")))
        if n_images != s["pages"]:
            problems.append(f"{s['name']}: {n_images} images, manifest says {s['pages']}")
    return problems
