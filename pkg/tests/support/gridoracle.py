"""Random merged tables and a brute-force row/column oracle over logical grid indices."""
from __future__ import annotations

import random
from itertools import accumulate

BORDER = 1


def random_layout(rng: random.Random, max_rows: int = 6, max_cols: int = 6, merge_p: float = 0.35):
    """(n_rows, n_cols, logical cells [(r, c, rs, cs)]) tiling the grid, with random merges."""
    n_rows, n_cols = rng.randint(1, max_rows), rng.randint(1, max_cols)
    taken = [[False] * n_cols for _ in range(n_rows)]
    cells = []
    for r in range(n_rows):
        for c in range(n_cols):
            if taken[r][c]:
                continue
            rs = cs = 1
            if rng.random() < merge_p:
                rs = rng.randint(1, n_rows - r)
                cs = rng.randint(1, n_cols - c)
                while any(taken[rr][cc] for rr in range(r, r + rs) for cc in range(c, c + cs)):
                    if cs > 1:
                        cs -= 1
                    else:
                        rs -= 1
            for rr in range(r, r + rs):
                for cc in range(c, c + cs):
                    taken[rr][cc] = True
            cells.append((r, c, rs, cs))
    return n_rows, n_cols, cells


def pixel_rects(rng: random.Random, n_rows: int, n_cols: int, cells, origin=(40, 60)):
    """Cell interiors inside 1px grid lines, with random row heights and column widths."""
    xs = [origin[0]] + [origin[0] + v for v in accumulate(rng.randint(12, 90) for _ in range(n_cols))]
    ys = [origin[1]] + [origin[1] + v for v in accumulate(rng.randint(12, 40) for _ in range(n_rows))]
    rects = [(xs[c] + BORDER, ys[r] + BORDER, xs[c + cs], ys[r + rs]) for r, c, rs, cs in cells]
    return xs, ys, rects


def oracle_bands(cells, edges_along, edges_across, axis: int):
    """Expected (box, members) per band, computed on logical indices.

    axis 0 gives rows; axis 1 gives columns. A band starts at every index where some
    cell starts, ends after the smallest span among those cells, and holds every
    cell covering it entirely.
    """
    start_i, span_i = (0, 2) if axis == 0 else (1, 3)
    other_i, other_span_i = (1, 3) if axis == 0 else (0, 2)
    out = []
    for s in sorted({c[start_i] for c in cells}):
        e = s + min(c[span_i] for c in cells if c[start_i] == s)
        members = [k for k, c in enumerate(cells) if c[start_i] <= s and c[start_i] + c[span_i] >= e]
        members.sort(key=lambda k: (cells[k][other_i], cells[k][start_i]))
        lo = min(edges_across[cells[k][other_i]] for k in members) + BORDER
        hi = max(edges_across[cells[k][other_i] + cells[k][other_span_i]] for k in members)
        a, b = edges_along[s] + BORDER, edges_along[e]
        out.append(((lo, a, hi, b) if axis == 0 else (a, lo, b, hi), members))
    return out


def random_case(seed: int):
    rng = random.Random(seed)
    n_rows, n_cols, cells = random_layout(rng)
    xs, ys, rects = pixel_rects(rng, n_rows, n_cols, cells)
    return {
        "cells": cells, "rects": rects, "n_rows": n_rows, "n_cols": n_cols,
        "rows": oracle_bands(cells, ys, xs, 0),
        "columns": oracle_bands(cells, xs, ys, 1),
    }


def matches_oracle(grid, case) -> bool:
    got_rows = [(b.box, b.members) for b in grid.rows]
    got_cols = [(b.box, b.members) for b in grid.columns]
    return got_rows == case["rows"] and got_cols == case["columns"]
