"""Hasse-diagram rendering and delimited report output.

Figures are drawn with matplotlib (Agg backend) from the cover relation:
points are placed on longest-chain levels, ordered within a level to keep
edges short, and saved straight to file.
"""

from __future__ import annotations

import csv
from typing import Optional, Sequence

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

from .lattices import DistLattice
from .posets import Poset, bits


def hasse_positions(p: Poset) -> dict[int, tuple[float, float]]:
    """Layered layout: y is the longest-chain height, x a barycenter pass."""
    levels = p.height_levels()
    rows: dict[int, list[int]] = {}
    for i, lv in enumerate(levels):
        rows.setdefault(lv, []).append(i)
    xs = {}
    for lv in sorted(rows):
        row = rows[lv]
        if lv == 0:
            row.sort()
        else:
            # order by mean position of lower covers, stable on index
            def bary(i: int) -> float:
                below = [xs[j] for j in bits(p.down[i] & ~(1 << i)) if j in xs]
                return sum(below) / len(below) if below else 0.0

            row.sort(key=lambda i: (bary(i), i))
        width = len(row)
        for k, i in enumerate(row):
            xs[i] = k - (width - 1) / 2.0
    return {i: (xs[i], float(levels[i])) for i in range(p.n)}


def render_poset(
    p: Poset,
    path: str,
    highlight: int = 0,
    colors: Optional[dict[int, str]] = None,
    title: Optional[str] = None,
) -> None:
    """Draw the Hasse diagram to an image file."""
    pos = hasse_positions(p)
    n = p.n
    width = max(4.0, 1.0 + 0.9 * max((len(v) for v in _rows(p).values()), default=1))
    height = max(3.0, 1.0 + 0.9 * (max((y for _, y in pos.values()), default=0) + 1))
    fig, ax = plt.subplots(figsize=(width, height))
    for i, j in p.cover_pairs():
        x0, y0 = pos[i]
        x1, y1 = pos[j]
        ax.plot([x0, x1], [y0, y1], color="0.6", lw=1.0, zorder=1)
    for i in range(n):
        x, y = pos[i]
        face = "lightsteelblue"
        if colors and i in colors:
            face = colors[i]
        if highlight >> i & 1:
            face = "gold"
        ax.scatter([x], [y], s=320, color=face, edgecolors="black", zorder=2)
        ax.annotate(
            p.points[i], (x, y), ha="center", va="center", fontsize=8, zorder=3
        )
    if title:
        ax.set_title(title)
    ax.set_axis_off()
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def _rows(p: Poset) -> dict[int, list[int]]:
    rows: dict[int, list[int]] = {}
    for i, lv in enumerate(p.height_levels()):
        rows.setdefault(lv, []).append(i)
    return rows


def render_lattice(lat: DistLattice, path: str, title: Optional[str] = None) -> None:
    render_poset(lat.order_poset(), path, title=title)


def render_tower_sizes(sizes: Sequence[int], path: str) -> None:
    """Log-scale growth curve of the tower levels."""
    fig, ax = plt.subplots(figsize=(4.5, 3.2))
    ax.semilogy(range(1, len(sizes) + 1), sizes, marker="o")
    ax.set_xlabel("level")
    ax.set_ylabel("elements")
    ax.set_xticks(range(1, len(sizes) + 1))
    ax.grid(True, which="both", alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def write_checks_csv(rows: Sequence[dict], path: str) -> None:
    """Delimited form of a verification report (one check per row)."""
    fields = ["check", "level", "passed", "witness"]
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.DictWriter(fh, fieldnames=fields)
        writer.writeheader()
        for row in rows:
            writer.writerow(
                {
                    "check": row.get("check"),
                    "level": row.get("level"),
                    "passed": row.get("passed"),
                    "witness": "" if row.get("witness") is None else str(row["witness"]),
                }
            )
