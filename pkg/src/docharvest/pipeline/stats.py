"""Run report and the CSV tables derived from the stage journals and outputs."""
from __future__ import annotations

import csv
import io
import json
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path

from ..annotate import load_page_annotations
from ..docx.model import SemanticCategory
from ..fetcher.run import JOURNAL as FETCH_JOURNAL
from ..fetcher.run import read_journal
from .emit import emit_counts
from .stages import StagePrereqMissing, annotate_counts, fetch_counts, harvest_counts, load_metadata, quality_counts

STAGES = ("harvest", "fetch", "annotate", "quality", "emit")
PPL_THRESHOLDS = (10, 20, 50, 100, 200, 500, 1000, 2000, 5000, 10000, 20000, 50000, 100000)
RELIABILITY_BINS = 20

C = SemanticCategory
LANG_ENTITY_COLUMNS: dict[str, tuple[SemanticCategory, ...]] = {
    "heading": tuple(C.heading(i) for i in range(1, 10)),
    "title": (C.Title,),
    "text": (C.PlainText,),
    "list": (C.ListItem,),
    "header": (C.Header,),
    "footer": (C.Footer,),
    "toc": (C.TableOfContents,),
    "bibliography": (C.Bibliography,),
    "quote": (C.Quote,),
    "equation": (C.Equation,),
    "figure": (C.Figure,),
    "footnote": (C.Footnote,),
    "annotation": (C.Annotation,),
    "form tag": (C.FormTag,),
    "form field": (C.FormField,),
    "table": (C.Table,),
}

# rejections.csv column -> fetch rejection kinds folded into it
REJECTION_COLUMNS: dict[str, tuple[str, ...]] = {
    "Other": ("InvalidUrl", "NoResponse", "TooLarge", "WrongFileFormat", "Internal"),
    "HTTPCode": ("HttpCode",),
    "ContentType": ("ContentType",),
    "RetryRedirect": ("RetryRedirect",),
    "Maldoc": ("Maldoc",),
    "DuplicateContent": ("DuplicateContent",),
}


# pure table builders ----------------------------------------------------------

def _freq(count: int, total: int) -> float:
    return count / total if total else 0.0


def entity_count_rows(counts: Counter) -> list[dict]:
    total = sum(counts.values())
    return [{"category": c.value, "count": counts.get(c.value, 0), "frequency": _freq(counts.get(c.value, 0), total)}
            for c in SemanticCategory]


def lang_page_rows(page_langs: Counter) -> list[dict]:
    total = sum(page_langs.values())
    return [{"language": lang, "pages": n, "frequency": _freq(n, total)}
            for lang, n in sorted(page_langs.items(), key=lambda kv: (-kv[1], kv[0]))]


def lang_entity_rows(per_lang: dict[str, Counter]) -> list[dict]:
    rows = []
    for lang in sorted(per_lang):
        counts = per_lang[lang]
        row = {col: sum(counts.get(c.value, 0) for c in cats) for col, cats in LANG_ENTITY_COLUMNS.items()}
        rows.append({"language": lang, "total": sum(row.values()), **row})
    return rows


def ppl_cdf_rows(docs: list[tuple[str, float, int]]) -> list[dict]:
    """docs: (language, perplexity, words); cumulative words at or below each threshold."""
    langs = sorted({lang for lang, _, _ in docs})
    rows = []
    for t in PPL_THRESHOLDS:
        row: dict = {"threshold": t}
        for lang in langs:
            row[lang] = sum(w for l_, p, w in docs if l_ == lang and p <= t)
        rows.append(row)
    return rows


def reliability_rows(scores: list[float]) -> list[dict]:
    counts = [0] * RELIABILITY_BINS
    for s in scores:
        counts[min(int(s * RELIABILITY_BINS), RELIABILITY_BINS - 1)] += 1  # last bin includes 1.0
    total = len(scores)
    return [{"bin_start": round(i / RELIABILITY_BINS, 2), "bin_end": round((i + 1) / RELIABILITY_BINS, 2),
             "documents": n, "frequency": _freq(n, total)} for i, n in enumerate(counts)]


def rejection_rows(by_reason: dict[str, int], checked: int) -> list[dict]:
    """A count row and a percent row; category percents are shares of all rejections."""
    counts = {col: sum(by_reason.get(k, 0) for k in kinds) for col, kinds in REJECTION_COLUMNS.items()}
    total = sum(by_reason.values())
    count_row = {"row": "count", **counts, "Total Rejections": total, "Checked URLs": checked}
    pct_row: dict = {"row": "percent"}
    for col, n in counts.items():
        pct_row[col] = round(100.0 * _freq(n, total), 4)
    pct_row["Total Rejections"] = round(100.0 * _freq(total, checked), 4)
    pct_row["Checked URLs"] = 100.0 if checked else 0.0
    return [count_row, pct_row]


# report --------------------------------------------------------------------------

@dataclass
class RunReport:
    stages: dict[str, dict] = field(default_factory=dict)
    tables: dict[str, list[dict]] = field(default_factory=dict)
    wall_time: dict[str, float] = field(default_factory=dict)  # seconds per stage, kept out of report.json
    executed: dict[str, int] = field(default_factory=dict)  # items processed in this run only

    def to_dict(self) -> dict:
        return {"stages": self.stages, "tables": self.tables}

    def reconciliation(self) -> dict[str, bool]:
        """outputs + rejections == inputs for every stage that ran."""
        out = {}
        for name, c in self.stages.items():
            if not c:
                continue
            rejected = sum(c.get("rejections", {}).values())
            if name == "annotate":
                ok = c["outputs"] + c["rejected"] + c["failed"] + c["pending"] == c["inputs"] \
                    and c["rejected"] + c["failed"] == rejected
            elif name == "quality":
                ok = c["outputs"] + c["failed"] + c["pending"] == c["inputs"]
            else:
                ok = c["outputs"] + rejected == c["inputs"]
            out[name] = ok
        return out

    def frequency_sums(self) -> dict[str, float]:
        sums = {}
        for name, rows in self.tables.items():
            if rows and "frequency" in rows[0]:
                sums[name] = sum(r["frequency"] for r in rows)
        return sums

    @property
    def partial(self) -> bool:
        return any(self.stages.get(s, {}).get("failed", 0) for s in ("annotate", "quality"))


def collect_report(out: Path) -> RunReport:
    out = Path(out)
    report = RunReport()
    report.stages = {
        "harvest": harvest_counts(out),
        "fetch": fetch_counts(out),
        "annotate": annotate_counts(out) if (out / "annotate" / "journal.jsonl").exists() else {},
        "quality": quality_counts(out),
        "emit": emit_counts(out),
    }
    entity = Counter()
    page_langs = Counter()
    per_lang: dict[str, Counter] = {}
    ppl_docs = []
    scores = []
    try:
        metas = load_metadata(out)
    except StagePrereqMissing:
        metas = []
    for meta in metas:
        pages = load_page_annotations(out / "annotate" / "ann" / f"{meta['hash']}.json")
        for page in pages:
            langs = meta["page_languages"]
            lang = langs[page.page_index]["code"] if page.page_index < len(langs) else "und"
            page_langs[lang] += 1
            cats = Counter(b.category.value for b in page.boxes)
            entity.update(cats)
            per_lang.setdefault(lang, Counter()).update(cats)
        if meta.get("perplexity") is not None:
            ppl_docs.append((meta["language"], meta["perplexity"], meta["words"]))
        if meta.get("reliability") is not None:
            scores.append(meta["reliability"])

    journal = out / "fetch" / FETCH_JOURNAL
    by_reason = Counter()
    checked = 0
    if journal.exists():
        outcomes = read_journal(journal)
        checked = len(outcomes)
        by_reason.update(o.reason.kind.value for o in outcomes if o.reason)

    report.tables = {
        "entity_counts": entity_count_rows(entity),
        "lang_pages": lang_page_rows(page_langs),
        "lang_entities": lang_entity_rows(per_lang),
        "ppl_cdf": ppl_cdf_rows(ppl_docs),
        "reliability_hist": reliability_rows(scores),
        "rejections": rejection_rows(dict(by_reason), checked),
    }
    return report


def _csv_text(rows: list[dict], columns: list[str]) -> str:
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=columns, lineterminator="\n")
    writer.writeheader()
    writer.writerows(rows)
    return buf.getvalue()


TABLE_COLUMNS = {
    "entity_counts": ["category", "count", "frequency"],
    "lang_pages": ["language", "pages", "frequency"],
    "lang_entities": ["language", "total", *LANG_ENTITY_COLUMNS],
    "reliability_hist": ["bin_start", "bin_end", "documents", "frequency"],
    "rejections": ["row", *REJECTION_COLUMNS, "Total Rejections", "Checked URLs"],
}


def write_report(report: RunReport, out: Path) -> Path:
    reports = Path(out) / "reports"
    reports.mkdir(parents=True, exist_ok=True)
    for name, rows in report.tables.items():
        if name == "ppl_cdf":
            langs = sorted({k for r in rows for k in r if k != "threshold"})
            columns = ["threshold", *langs]
        else:
            columns = TABLE_COLUMNS[name]
        (reports / f"{name}.csv").write_text(_csv_text(rows, columns), encoding="utf-8")
    body = {**report.to_dict(), "reconciliation": report.reconciliation()}
    (reports / "report.json").write_text(json.dumps(body, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    timings = {"wall_time": report.wall_time, "executed": report.executed}
    (reports / "timings.json").write_text(json.dumps(timings, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return reports
