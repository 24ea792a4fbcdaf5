"""Per-output-class heat maps over constituent classes, and grid/heat-map rendering."""

from __future__ import annotations

import csv
import io
from pathlib import Path
from typing import Iterable, Mapping
from xml.sax.saxutils import escape

import numpy as np

from globalca.complexity import CLASSES
from globalca.errors import DataError

GRAY = {0: (255, 255, 255), 1: (0, 0, 0), 2: (128, 128, 128)}
PANEL_COLORS = {1: (49, 54, 149), 2: (26, 152, 80), 3: (215, 48, 39), 4: (118, 42, 131)}


class HeatMapSet:
    """Counts indexed ``[output class, class(eps), class(eps_prime)]``, classes 1..4.

    Accumulators merge by addition, so shards can be folded in any order.
    """

    def __init__(self, counts: np.ndarray | None = None):
        self.counts = np.zeros((4, 4, 4), dtype=np.int64) if counts is None else np.array(counts, dtype=np.int64)

    def add(self, out_cls: int, eps_cls: int, eps_prime_cls: int, n: int = 1):
        self.counts[out_cls - 1, eps_cls - 1, eps_prime_cls - 1] += n

    def merge(self, other: HeatMapSet) -> HeatMapSet:
        return HeatMapSet(self.counts + other.counts)

    __add__ = merge

    def __eq__(self, other):
        return isinstance(other, HeatMapSet) and np.array_equal(self.counts, other.counts)

    @property
    def total(self) -> int:
        return int(self.counts.sum())

    def is_empty(self, out_cls: int) -> bool:
        return self.counts[out_cls - 1].sum() == 0

    def percent(self, out_cls: int) -> np.ndarray:
        """4x4 percentages of the records in ``out_cls``; zeros when the class is empty."""
        c = self.counts[out_cls - 1]
        total = c.sum()
        return np.zeros((4, 4)) if total == 0 else 100.0 * c / total

    def modal_cell(self, out_cls: int) -> tuple[int, int] | None:
        if self.is_empty(out_cls):
            return None
        i, j = np.unravel_index(np.argmax(self.counts[out_cls - 1]), (4, 4))
        return int(i) + 1, int(j) + 1


def build_heatmaps(records: Iterable, labels: Mapping[int, int]) -> HeatMapSet:
    """Fold run records into heat maps, using ``labels`` for the constituent classes.

    Records without an assigned class (strict-mode conflicts) are ignored.
    """
    counts = np.zeros((4, 4, 4), dtype=np.int64)
    for rec in records:
        if rec.cls is None:
            continue
        try:
            a, b = labels[rec.eps], labels[rec.eps_prime]
        except KeyError as exc:
            raise DataError(f"rule {exc.args[0]} has no class label") from None
        counts[rec.cls - 1, a - 1, b - 1] += 1
    return HeatMapSet(counts)


def heatmaps_from_shards(paths: Iterable[str | Path], labels: Mapping[int, int]) -> HeatMapSet:
    from globalca.sweep import read_shard

    total = HeatMapSet()
    for path in paths:
        total = total + build_heatmaps(read_shard(path), labels)
    return total


# -- grids -----------------------------------------------------------------

def grid_text(grid) -> str:
    arr = np.asarray(grid, dtype=np.uint8)
    return "".join("".join(map(str, row)) + "\n" for row in arr)


def grid_ppm(grid) -> str:
    """Plain (P3) portable pixmap, one pixel per cell."""
    arr = np.atleast_2d(np.asarray(grid, dtype=np.uint8))
    height, width = arr.shape
    lines = ["P3", f"{width} {height}", "255"]
    for row in arr:
        lines.append(" ".join("%d %d %d" % GRAY[int(v)] for v in row))
    return "\n".join(lines) + "\n"


def _write(path: Path, text: str):
    try:
        path.write_text(text)
    except OSError as exc:
        raise OSError(f"{path}: {exc.strerror}") from exc


def render_grid(grid, path: str | Path) -> tuple[Path, Path]:
    """Write ``<path>.txt`` (digit rows) and ``<path>.ppm``; returns both paths."""
    path = Path(path)
    txt, ppm = path.with_suffix(".txt"), path.with_suffix(".ppm")
    _write(txt, grid_text(grid))
    _write(ppm, grid_ppm(grid))
    return txt, ppm


# -- heat maps ----------------------------------------------------------------

def heatmap_csv(maps: HeatMapSet) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["class", "row", "col", "percent", "count", "empty"])
    for out in CLASSES:
        pct = maps.percent(out)
        empty = int(maps.is_empty(out))
        for i in range(4):
            for j in range(4):
                w.writerow([out, i + 1, j + 1, f"{pct[i, j]:.4f}", int(maps.counts[out - 1, i, j]), empty])
    return buf.getvalue()


def read_heatmap_csv(text: str) -> HeatMapSet:
    maps = HeatMapSet()
    for row in csv.DictReader(io.StringIO(text)):
        maps.counts[int(row["class"]) - 1, int(row["row"]) - 1, int(row["col"]) - 1] = int(row["count"])
    return maps


def _blend(rgb, t: float) -> str:
    r, g, b = (round(255 + (c - 255) * t) for c in rgb)
    return f"#{r:02x}{g:02x}{b:02x}"


def heatmap_svg(maps: HeatMapSet, title: str = "") -> str:
    """Four 4x4 panels; fill intensity is proportional to the cell's percentage."""
    cell, pad, top = 48, 40, 56 if title else 36
    panel = 4 * cell
    width = 4 * panel + 5 * pad
    height = top + panel + pad + 16
    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}" font-family="sans-serif" font-size="11">',
        f'<rect width="{width}" height="{height}" fill="#ffffff"/>',
    ]
    if title:
        out.append(f'<text x="{width / 2:g}" y="20" text-anchor="middle" font-size="14">{escape(title)}</text>')
    for k, cls in enumerate(CLASSES):
        x0 = pad + k * (panel + pad)
        y0 = top
        pct = maps.percent(cls)
        n = int(maps.counts[cls - 1].sum())
        label = f"Class {cls} output (n={n})" + (" empty" if n == 0 else "")
        out.append(f'<text x="{x0 + panel / 2:g}" y="{y0 - 8}" text-anchor="middle">{label}</text>')
        for i in range(4):
            for j in range(4):
                x, y = x0 + j * cell, y0 + i * cell
                value = pct[i, j]
                fill = _blend(PANEL_COLORS[cls], value / 100.0)
                ink = "#ffffff" if value > 55 else "#000000"
                out.append(f'<rect x="{x}" y="{y}" width="{cell}" height="{cell}" fill="{fill}" stroke="#999999"/>')
                out.append(f'<text x="{x + cell / 2:g}" y="{y + cell / 2 + 4:g}" text-anchor="middle" fill="{ink}">{value:.1f}</text>')
        for i in range(4):
            out.append(f'<text x="{x0 - 6}" y="{y0 + i * cell + cell / 2 + 4:g}" text-anchor="end">{i + 1}</text>')
            out.append(f'<text x="{x0 + i * cell + cell / 2:g}" y="{y0 + panel + 14}" text-anchor="middle">{i + 1}</text>')
        out.append(f'<text x="{x0 + panel / 2:g}" y="{y0 + panel + 30}" text-anchor="middle">class of eps′ (cols) / eps (rows)</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def render_heatmaps(maps: HeatMapSet, path: str | Path, title: str = "") -> tuple[Path, Path]:
    """Write ``<path>.csv`` and ``<path>.svg``; returns both paths."""
    path = Path(path)
    csv_path, svg_path = path.with_suffix(".csv"), path.with_suffix(".svg")
    _write(csv_path, heatmap_csv(maps))
    _write(svg_path, heatmap_svg(maps, title))
    return csv_path, svg_path
