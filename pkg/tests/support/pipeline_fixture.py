"""A 20-URL end-to-end fixture: two WAT snapshots pointing at a local HTTP server."""
from __future__ import annotations

from pathlib import Path

import yaml

from docharvest.fetcher.types import DOCX_MIME

from .corpus import synthetic_document
from .docxgen import DocxBuilder
from .httpfixture import FixtureServer, Reply
from .maldocs import vba_docx
from .wat import build_wat

N_ENGLISH = 12
GERMAN = [
    "Im Herbst wurde die alte Brücke über den Fluss endlich erneuert, nachdem die Gemeinde jahrelang "
    "über die Finanzierung gestritten hatte. Die Bauarbeiter begannen jeden Morgen sehr früh und "
    "arbeiteten oft bis in den späten Abend, damit die Straße vor dem ersten Schnee wieder frei war.",
    "Viele Familien aus dem Dorf kamen zur Eröffnung und brachten Kuchen und Kaffee mit. Der älteste "
    "Bewohner erzählte von der Zeit, als man den Fluss noch mit einer kleinen Fähre überqueren musste "
    "und die Kinder im Sommer am Ufer spielten.",
    "Die Lehrerin der Grundschule hat mit ihrer Klasse ein Heft über die Geschichte der Brücke "
    "geschrieben. Darin stehen Bilder, Gedichte und kurze Berichte, die die Schüler selbst gesammelt "
    "haben, und es wird jetzt in der Bibliothek ausgestellt.",
]


def german_document(variant: int) -> bytes:
    b = DocxBuilder()
    b.paragraph(f"Bericht aus dem Dorf Nummer {variant + 1}", "Title")
    b.paragraph("Die neue Brücke", "Heading1")
    for text in GERMAN[variant:] + GERMAN[:variant]:
        b.paragraph(text)
    return b.build()


def short_document() -> bytes:
    return DocxBuilder().paragraph("Too short to keep.").build()


def routes() -> dict[str, Reply]:
    """path -> reply for every URL the snapshots mention (20 distinct paths)."""
    docx = {"Content-Type": DOCX_MIME}
    r: dict[str, Reply] = {}
    for i in range(N_ENGLISH):
        r[f"/docs/report-{i:02d}.docx"] = Reply(200, synthetic_document(1000 + i), docx)
    for i in range(2):
        r[f"/docs/bericht-{i}.docx"] = Reply(200, german_document(i), docx)
    r["/mirror/report-00.docx"] = Reply(200, synthetic_document(1000), docx)  # same bytes, second URL
    r["/docs/page.docx"] = Reply(200, b"<html><body>moved</body></html>", {"Content-Type": "text/html"})
    r["/docs/macro.docx"] = Reply(200, vba_docx(), docx)
    r["/docs/short.docx"] = Reply(200, short_document(), docx)
    r["/docs/busy.docx"] = Reply(503, b"busy", {"Content-Type": "text/plain"})
    return r


MISSING = "/docs/missing.docx"  # no route: the server answers 404
EXPECTED = {
    "urls": 20,
    "stored": 15,  # 12 English, 2 German, the short one
    "fetch_rejections": {"ContentType": 1, "DuplicateContent": 1, "HttpCode": 1, "Maldoc": 1, "RetryRedirect": 1},
    "annotate_ok": 14,
    "annotate_rejected": {"TooShort": 1},
}


def start_server() -> FixtureServer:
    server = FixtureServer()
    server.routes.update(routes())
    return server.__enter__()


def snapshot_pages(server: FixtureServer) -> dict[str, list[tuple[str, list[str]]]]:
    paths = sorted(routes()) + [MISSING]
    url = server.url
    newer = paths[:14]
    older = paths[8:]  # overlaps the newer snapshot on paths[8:14]
    return {
        "CC-2023-06": [
            ("http://site-a.example/index.html", [url(p) for p in newer[:8]]),
            ("http://site-a.example/more.html", [url(p) for p in newer[4:]]),  # in-snapshot repeats
        ],
        "CC-2022-49": [
            ("http://site-b.example/list.html", [url(p) for p in older] + [url(older[0])]),
            ("http://site-b.example/other.html", [url(p) for p in older[:3]] + ["http://x.example/a.pdf"]),
        ],
    }


def write_inputs(root: Path, server: FixtureServer, **overrides) -> Path:
    """WAT files, manifests and a config under `root`; returns the config path."""
    root.mkdir(parents=True, exist_ok=True)
    snapshots = []
    for snap_id, pages in snapshot_pages(server).items():
        wat = root / "inputs" / snap_id / "part-0.warc.wat.gz"
        wat.parent.mkdir(parents=True, exist_ok=True)
        wat.write_bytes(build_wat(pages))
        manifest = root / "inputs" / f"{snap_id}.paths"
        manifest.write_text(f"{snap_id}/part-0.warc.wat.gz\n", encoding="utf-8")
        snapshots.append({"id": snap_id, "manifest": f"inputs/{snap_id}.paths"})
    config = {
        "output": "out",
        "seed": 7,
        "workers": {"fetch": 4},
        "harvest": {"snapshots": snapshots},
        "fetch": {"policy": {"retry_backoff": 0.0, "max_retries": 1, "timeout": 10.0}},
        "annotate": {"renderer": "mock", "dpi": 100},
        "emit": {"shard_size": 8},
    }
    for key, value in overrides.items():
        config[key] = value
    path = root / "config.yaml"
    path.write_text(yaml.safe_dump(config, sort_keys=True), encoding="utf-8")
    return path
