"""Plain-text PPM (P3) pictures of ant positions on the grid."""

from __future__ import annotations

import logging
from collections import Counter
from pathlib import Path

from .dataset import sort_labels

log = logging.getLogger(__name__)

WHITE = (255, 255, 255)
# one colour per class, in class order; cycles past the end
PALETTE = [
    (228, 26, 28),
    (55, 126, 184),
    (77, 175, 74),
    (152, 78, 163),
    (255, 127, 0),
    (166, 86, 40),
    (247, 129, 191),
    (0, 0, 0),
    (153, 153, 153),
    (255, 217, 47),
]


def render_ppm(positions, labels, shape, classes=None, scale: int = 4) -> str:
    """Return a P3 image: one ``scale``-pixel square per cell, x to the right.

    A cell holding ants of several classes takes the most common one; ties
    go to the class listed first in ``classes``.
    """
    classes = tuple(classes) if classes is not None else sort_labels(labels)
    rank = {c: i for i, c in enumerate(classes)}
    occupants: dict = {}
    for (x, y), lab in zip(positions, labels):
        occupants.setdefault((int(x), int(y)), Counter())[lab] += 1
    colour = {}
    for cell, counts in occupants.items():
        lab = min(counts, key=lambda c: (-counts[c], rank.get(c, len(rank)), str(c)))
        colour[cell] = PALETTE[rank.get(lab, len(rank)) % len(PALETTE)]

    width, height = shape
    lines = ["P3", f"{width * scale} {height * scale}", "255"]
    for y in range(height):
        row = [colour.get((x, y), WHITE) for x in range(width)]
        pixels = [f"{r} {g} {b}" for (r, g, b) in row for _ in range(scale)]
        for _ in range(scale):
            lines.extend(pixels)
    return "\n".join(lines) + "\n"


def write_ppm(path, positions, labels, shape, classes=None, scale: int = 4) -> Path:
    path = Path(path)
    path.write_text(render_ppm(positions, labels, shape, classes, scale))
    return path


def render_history(frames, shape, outdir, classes=None, scale: int = 4, prefix="snapshot") -> list[Path]:
    """Write one image per ``(iteration, labels, positions)`` frame."""
    outdir = Path(outdir)
    if not frames:
        log.warning("empty history, no images written")
        return []
    outdir.mkdir(parents=True, exist_ok=True)
    width = max(4, len(str(max(it for it, _, _ in frames))))
    if classes is None:
        classes = sort_labels(lab for _, labels, _ in frames for lab in labels)
    out = []
    for it, labels, pos in frames:
        out.append(write_ppm(outdir / f"{prefix}-{it:0{width}d}.ppm", pos, labels, shape, classes, scale))
    return out
