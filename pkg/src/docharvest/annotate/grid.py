"""Row and column boxes derived from the detected cells of one table.

The grid is the finest one the cells allow: a row starts wherever some cell
starts, its height is that of the shortest cell starting there, and its
members are all cells covering that band. Merged cells therefore show up in
every row (or column) they span.
"""
from __future__ import annotations

from dataclasses import dataclass, field

ALIGN_TOLERANCE = 3  # px; cell edges closer than this are the same grid line

Rect = tuple[int, int, int, int]  # x0, y0, x1, y1


class DegenerateTable(ValueError):
    """A table region with a single cell; `grid` holds its one row and one column."""

    def __init__(self, message: str, grid: "TableGrid | None" = None):
        super().__init__(message)
        self.grid = grid


@dataclass
class Band:
    box: Rect
    members: list[int]  # indices into TableGrid.cells, left-to-right or top-to-bottom


@dataclass
class TableGrid:
    table_box: Rect | None
    cells: list[Rect]
    rows: list[Band] = field(default_factory=list)
    columns: list[Band] = field(default_factory=list)

    def rows_of(self, cell: int) -> list[int]:
        return [i for i, r in enumerate(self.rows) if cell in r.members]

    def columns_of(self, cell: int) -> list[int]:
        return [i for i, c in enumerate(self.columns) if cell in c.members]


def _cluster_starts(values: list[int], tol: int) -> list[int]:
    """Representative (minimum) of each group of start positions within tol of each other."""
    out: list[int] = []
    for v in sorted(set(values)):
        if out and v - out[-1] <= tol:
            continue
        out.append(v)
    return out


def _bands(cells: list[Rect], axis: int, tol: int) -> list[Band]:
    lo, hi = (1, 3) if axis == 0 else (0, 2)  # rows use y extents, columns x extents
    olo, ohi = (0, 2) if axis == 0 else (1, 3)
    out = []
    for start in _cluster_starts([c[lo] for c in cells], tol):
        starters = [c for c in cells if abs(c[lo] - start) <= tol]
        end = start + min(c[hi] - c[lo] for c in starters)
        members = [i for i, c in enumerate(cells) if c[lo] <= start + tol and c[hi] >= end - tol]
        members.sort(key=lambda i: (cells[i][olo], cells[i][lo]))
        a = min(cells[i][olo] for i in members)
        b = max(cells[i][ohi] for i in members)
        box = (a, start, b, end) if axis == 0 else (start, a, end, b)
        out.append(Band(box, members))
    return out


def derive_table_grid(cells: list[Rect], table_box: Rect | None = None,
                      tolerance: int = ALIGN_TOLERANCE) -> TableGrid:
    if not cells:
        raise DegenerateTable("no cells")
    grid = TableGrid(table_box, list(cells))
    if len(cells) == 1:
        c = cells[0]
        grid.rows = [Band(c, [0])]
        grid.columns = [Band(c, [0])]
        raise DegenerateTable("single cell", grid)
    grid.rows = _bands(grid.cells, 0, tolerance)
    grid.columns = _bands(grid.cells, 1, tolerance)
    return grid
