"""Renderer adapters: the in-package mock typesetter and an external converter subprocess."""
from __future__ import annotations

import argparse
import io
import os
import re
import signal
import subprocess
import sys
import tempfile
from dataclasses import dataclass, field
from pathlib import Path
from typing import Protocol

import numpy as np
from PIL import Image

from ..docx.container import Container, ContainerError, open_container
from .layout import CHAR_WIDTH, GLYPH_HEIGHT, Layout, Page, TooManyPagesInLayout
from .pdf import UnsupportedPdfFeature, page_count, write_pdf

DEFAULT_DPI = 150
MAX_PAGES = 150
NOISE = 5


class RenderError(Exception):
    kind = "RenderError"


class RenderTimeout(RenderError):
    kind = "RenderTimeout"


class RenderCrash(RenderError):
    kind = "RenderCrash"


class TooManyPages(RenderError):
    kind = "TooManyPages"

    def __init__(self, pages: int | None, limit: int):
        super().__init__(f"more than {limit} pages" + (f" ({pages})" if pages else ""))
        self.pages = pages
        self.limit = limit


@dataclass
class RenderResult:
    pages: list[np.ndarray]
    pdf: bytes | None = None
    # per page: xml locator -> (x0, y0, x1, y1); only the mock renderer knows these
    ground_truth: list[dict] | None = None
    word_positions: list[list] | None = field(default=None, repr=False)

    @property
    def page_count(self) -> int:
        return len(self.pages)


class Renderer(Protocol):
    dpi: int

    def render(self, data: bytes, *, max_pages: int = MAX_PAGES, want_pdf: bool = True) -> RenderResult:
        ...


# rasterization -----------------------------------------------------------

_noise_cache: dict[tuple[int, int], np.ndarray] = {}


def _noise(h: int, w: int) -> np.ndarray:
    """A fixed +-NOISE pattern standing in for anti-aliasing jitter."""
    key = (h, w)
    if key not in _noise_cache:
        yy, xx = np.mgrid[0:h, 0:w]
        _noise_cache.clear()
        _noise_cache[key] = (((xx * 7 + yy * 13) % (2 * NOISE + 1)) - NOISE).astype(np.int16)[..., None]
    return _noise_cache[key]


def paint(page: Page, container: Container, noise: bool = True, images: dict | None = None) -> np.ndarray:
    img = np.full((page.height, page.width, 3), 255, dtype=np.uint8)
    images = images if images is not None else {}
    H, W = page.height, page.width

    def clip(x0, y0, x1, y1):
        x0, y0, x1, y1 = (int(round(v)) for v in (x0, y0, x1, y1))
        return max(x0, 0), max(y0, 0), min(x1, W), min(y1, H)

    for op in page.ops:
        kind = op[0]
        if kind == "fill":
            x0, y0, x1, y1 = clip(*op[1:5])
            if x1 > x0 and y1 > y0:
                img[y0:y1, x0:x1] = op[5]
        elif kind == "text":
            _, x, baseline, size, text, color = op
            cw = CHAR_WIDTH * size
            for i, ch in enumerate(text):
                if ch.isspace():
                    continue
                gx0 = x + (i + 0.1) * cw
                gx1 = max(gx0 + 1, x + (i + 0.9) * cw)
                x0, y0, x1, y1 = clip(gx0, baseline - GLYPH_HEIGHT * size, gx1, baseline)
                if x1 > x0 and y1 > y0:
                    img[y0:y1, x0:x1] = color
        elif kind == "image":
            x0, y0, x1, y1 = (int(round(v)) for v in op[1:5])
            if x1 <= x0 or y1 <= y0:
                continue
            pic = images.get(op[5])
            if pic is None:
                try:
                    with Image.open(io.BytesIO(container.read(op[5]))) as im:
                        pic = im.convert("RGB")
                except Exception:
                    pic = False
                images[op[5]] = pic
            if pic is False:
                continue
            arr = np.asarray(pic.resize((x1 - x0, y1 - y0), Image.NEAREST))
            cx0, cy0, cx1, cy1 = clip(x0, y0, x1, y1)
            if cx1 > cx0 and cy1 > cy0:
                img[cy0:cy1, cx0:cx1] = arr[cy0 - y0:cy1 - y0, cx0 - x0:cx1 - x0]
    if noise:
        mask = np.any(img != 255, axis=2, keepdims=True)
        jitter = np.where(mask, _noise(H, W), 0)
        img = np.clip(img.astype(np.int16) + jitter, 0, 255).astype(np.uint8)
    return img


def layout_pdf(pages: list[Page], dpi: int) -> bytes:
    to_pt = 72.0 / dpi
    out = []
    for page in pages:
        texts = []
        for op in page.ops:
            if op[0] == "text" and op[4].strip():
                _, x, baseline, size, text, _ = op
                texts.append((x * to_pt, (page.height - baseline) * to_pt, size * to_pt, text))
        out.append((page.width * to_pt, page.height * to_pt, texts))
    return write_pdf(out)


class MockRenderer:
    """Typesets the package XML directly; deterministic, no external process."""

    def __init__(self, dpi: int = DEFAULT_DPI, noise: bool = True):
        self.dpi = dpi
        self.noise = noise

    def layout(self, data: bytes, max_pages: int | None = MAX_PAGES) -> tuple[Container, list[Page]]:
        try:
            container = open_container(data)
        except ContainerError as exc:
            raise RenderCrash(f"unreadable package: {exc}") from None
        try:
            pages = Layout(container, self.dpi).pages(max_pages)
        except TooManyPagesInLayout:
            raise TooManyPages(None, max_pages) from None
        return container, pages

    def render(self, data: bytes, *, max_pages: int = MAX_PAGES, want_pdf: bool = True) -> RenderResult:
        container, pages = self.layout(data, max_pages)
        images: dict = {}
        rasters = [paint(p, container, self.noise, images) for p in pages]
        pdf = layout_pdf(pages, self.dpi) if want_pdf else None
        words = [[op[1:5] for op in p.ops if op[0] == "text" and op[4].strip()] for p in pages]
        return RenderResult(rasters, pdf, [dict(p.gt) for p in pages], words)


DEFAULT_COMMAND = ("docharvest-render", "--headless", "--convert", "{input}", "{outdir}")


class SubprocessRenderer:
    """Runs `<renderer> --headless --convert <in> <outdir>` and collects <stem>.pdf and <stem>-<n>.png."""

    def __init__(self, command: list[str] | tuple[str, ...] = DEFAULT_COMMAND, dpi: int = DEFAULT_DPI,
                 timeout: float = 120.0):
        self.command = list(command)
        self.dpi = dpi
        self.timeout = timeout

    def render(self, data: bytes, *, max_pages: int = MAX_PAGES, want_pdf: bool = True) -> RenderResult:
        with tempfile.TemporaryDirectory(prefix="render-") as tmp:
            src = Path(tmp) / "input.docx"
            out = Path(tmp) / "out"
            out.mkdir()
            src.write_bytes(data)
            argv = [a.replace("{input}", str(src)).replace("{outdir}", str(out)).replace("{dpi}", str(self.dpi))
                    for a in self.command]
            try:
                proc = subprocess.Popen(argv, stdout=subprocess.DEVNULL, stderr=subprocess.PIPE,
                                        start_new_session=True)
            except OSError as exc:
                raise RenderCrash(f"cannot start renderer: {exc}") from None
            try:
                _, err = proc.communicate(timeout=self.timeout)
            except subprocess.TimeoutExpired:
                _kill_group(proc)
                proc.communicate()
                raise RenderTimeout(f"renderer exceeded {self.timeout:g}s") from None
            if proc.returncode != 0:
                why = f"signal {-proc.returncode}" if proc.returncode < 0 else f"exit {proc.returncode}"
                tail = (err or b"").decode("utf-8", "replace").strip().splitlines()[-1:]
                raise RenderCrash(f"renderer {why}" + (f": {tail[0]}" if tail else ""))
            pdf_path = out / "input.pdf"
            pngs = sorted(out.glob("input-*.png"), key=_page_number)
            if not pngs:
                raise RenderCrash("renderer produced no page images")
            if len(pngs) > max_pages:
                raise TooManyPages(len(pngs), max_pages)
            pages = []
            for path in pngs:
                with Image.open(path) as im:
                    pages.append(np.asarray(im.convert("RGB")))
            pdf = pdf_path.read_bytes() if pdf_path.exists() else None
            if pdf is not None:
                try:
                    if page_count(pdf) != len(pages):
                        raise RenderCrash("PDF and image page counts differ")
                except UnsupportedPdfFeature:
                    pass
            return RenderResult(pages, pdf if want_pdf else None)


def _page_number(path: Path) -> int:
    m = re.search(r"-(\d+)\.png$", path.name)
    return int(m.group(1)) if m else 0


def _kill_group(proc: subprocess.Popen) -> None:
    try:
        os.killpg(proc.pid, signal.SIGKILL)
    except (ProcessLookupError, PermissionError):
        proc.kill()


def main(argv: list[str] | None = None) -> int:
    """Command-line face of the mock renderer, usable as a converter subprocess."""
    ap = argparse.ArgumentParser(prog="docharvest-render")
    ap.add_argument("--headless", action="store_true")
    ap.add_argument("--convert", nargs=2, metavar=("INPUT", "OUTDIR"), required=True)
    ap.add_argument("--dpi", type=int, default=DEFAULT_DPI)
    args = ap.parse_args(argv)
    src, outdir = Path(args.convert[0]), Path(args.convert[1])
    try:
        result = MockRenderer(args.dpi).render(src.read_bytes(), max_pages=10_000)
    except RenderError as exc:
        print(f"render failed: {exc}", file=sys.stderr)
        return 1
    outdir.mkdir(parents=True, exist_ok=True)
    (outdir / f"{src.stem}.pdf").write_bytes(result.pdf or b"")
    for i, page in enumerate(result.pages, start=1):
        Image.fromarray(page).save(outdir / f"{src.stem}-{i}.png")
    return 0


if __name__ == "__main__":
    sys.exit(main())
