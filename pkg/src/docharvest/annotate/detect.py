from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

import numpy as np
from scipy import ndimage

from ..docx.model import SemanticCategory
from .colors import TOLERANCE, ColorMap

MIN_AREA = 16
MERGE_GAP = 4
FOUR_CONNECTED = np.array([[0, 1, 0], [1, 1, 1], [0, 1, 0]], dtype=bool)


@dataclass(frozen=True)
class Box:
    category: SemanticCategory
    x: int
    y: int
    w: int
    h: int
    element_id: int | None = None

    @property
    def x1(self) -> int:
        return self.x + self.w

    @property
    def y1(self) -> int:
        return self.y + self.h

    @property
    def area(self) -> int:
        return self.w * self.h

    def with_id(self, element_id: int | None) -> "Box":
        return Box(self.category, self.x, self.y, self.w, self.h, element_id)

    def to_list(self) -> list:
        return [self.category.value, self.x, self.y, self.w, self.h, self.element_id]


def color_mask(image: np.ndarray, rgb, tolerance: int = TOLERANCE) -> np.ndarray:
    diff = np.abs(image[..., :3].astype(np.int16) - np.asarray(rgb, dtype=np.int16))
    return np.all(diff <= tolerance, axis=2)


def component_boxes(mask: np.ndarray, min_area: int = MIN_AREA) -> list[tuple[int, int, int, int]]:
    """(x0, y0, x1, y1) of 4-connected components with at least min_area pixels."""
    labels, n = ndimage.label(mask, structure=FOUR_CONNECTED)
    if n == 0:
        return []
    areas = np.bincount(labels.ravel(), minlength=n + 1)
    out = []
    for idx, sl in enumerate(ndimage.find_objects(labels), start=1):
        if sl is None or areas[idx] < min_area:
            continue
        out.append((sl[1].start, sl[0].start, sl[1].stop, sl[0].stop))
    return out


def merge_boxes(boxes: list[tuple[int, int, int, int]], gap: int = MERGE_GAP) -> list[tuple[int, int, int, int]]:
    """Merge boxes that overlap horizontally and sit less than `gap` px apart vertically, to a fixpoint."""
    boxes = list(boxes)
    changed = True
    while changed:
        changed = False
        boxes.sort(key=lambda b: (b[1], b[0]))
        for i in range(len(boxes)):
            a = boxes[i]
            for j in range(i + 1, len(boxes)):
                b = boxes[j]
                if b[1] - a[3] >= gap:
                    break
                h_overlap = min(a[2], b[2]) - max(a[0], b[0]) > 0
                v_gap = max(b[1] - a[3], a[1] - b[3])
                if h_overlap and v_gap < gap:
                    boxes[i] = (min(a[0], b[0]), min(a[1], b[1]), max(a[2], b[2]), max(a[3], b[3]))
                    del boxes[j]
                    changed = True
                    break
            if changed:
                break
    return sorted(boxes, key=lambda b: (b[1], b[0]))


def detect_bboxes(image: np.ndarray, colormap: ColorMap,
                  categories: Iterable[SemanticCategory] | None = None,
                  tolerance: int = TOLERANCE) -> list[Box]:
    cats = list(categories) if categories is not None else list(colormap.colors)
    found: list[Box] = []
    for cat in cats:
        mask = color_mask(image, colormap[cat], tolerance)
        if not mask.any():
            continue
        for x0, y0, x1, y1 in merge_boxes(component_boxes(mask)):
            found.append(Box(cat, int(x0), int(y0), int(x1 - x0), int(y1 - y0)))
    found.sort(key=lambda b: (b.y, b.x, b.category.value))
    return found


def iou(a: tuple[int, int, int, int], b: tuple[int, int, int, int]) -> float:
    """IoU of two (x0, y0, x1, y1) rectangles."""
    ix = max(0, min(a[2], b[2]) - max(a[0], b[0]))
    iy = max(0, min(a[3], b[3]) - max(a[1], b[1]))
    inter = ix * iy
    union = (a[2] - a[0]) * (a[3] - a[1]) + (b[2] - b[0]) * (b[3] - b[1]) - inter
    return inter / union if union else 0.0
