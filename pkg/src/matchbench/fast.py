"""FAST-9 segment-test corner detection with non-maximum suppression."""

from __future__ import annotations

import numpy as np

# Bresenham circle of radius 3, clockwise from 12 o'clock: (dx, dy)
CIRCLE = np.array([
    (0, -3), (1, -3), (2, -2), (3, -1), (3, 0), (3, 1), (2, 2), (1, 3),
    (0, 3), (-1, 3), (-2, 2), (-3, 1), (-3, 0), (-3, -1), (-2, -2), (-1, -3),
], dtype=np.int64)

ARC_LEN = 9
MARGIN = 3


def _run9_table() -> np.ndarray:
    """For each 16-bit mask: does it contain a circular run of >= 9 set bits."""
    table = np.zeros(1 << 16, dtype=bool)
    masks = np.arange(1 << 16, dtype=np.uint32)
    wrapped = masks | (masks << 16)  # circular runs become linear in 32 bits
    for start in range(16):
        arc = ((1 << ARC_LEN) - 1) << start
        table |= (wrapped & arc) == arc
    return table


_HAS_RUN9 = _run9_table()


def detect_fast(img: np.ndarray, threshold: int):
    """Corners in a grayscale uint8 array.

    A pixel is a corner iff >= 9 contiguous circle pixels are all brighter
    than center+threshold or all darker than center-threshold. 3x3 NMS on the
    segment-test score (summed exceedance of the passing polarity); a 3 px
    border is excluded. Returns (xs, ys, scores) ordered by (y, x).
    """
    h, w = img.shape
    empty = (np.empty(0, np.int64), np.empty(0, np.int64), np.empty(0, np.float64))
    if h < 2 * MARGIN + 1 or w < 2 * MARGIN + 1:
        return empty
    a = img.astype(np.int16)
    center = a[MARGIN:h - MARGIN, MARGIN:w - MARGIN]
    hi = center + np.int16(threshold)
    lo = center - np.int16(threshold)

    bright_mask = np.zeros(center.shape, dtype=np.uint16)
    dark_mask = np.zeros(center.shape, dtype=np.uint16)
    for k, (dx, dy) in enumerate(CIRCLE):
        p = a[MARGIN + dy:h - MARGIN + dy, MARGIN + dx:w - MARGIN + dx]
        bright_mask |= (p > hi).astype(np.uint16) << k
        dark_mask |= (p < lo).astype(np.uint16) << k

    is_bright = _HAS_RUN9[bright_mask]
    is_dark = _HAS_RUN9[dark_mask]
    cy, cx = np.nonzero(is_bright | is_dark)
    if cy.size == 0:
        return empty

    # segment-test score at candidates only
    xs = cx + MARGIN
    ys = cy + MARGIN
    ring = a[ys[None, :] + CIRCLE[:, 1][:, None], xs[None, :] + CIRCLE[:, 0][:, None]]
    c = a[ys, xs].astype(np.int32)
    dhi = ring.astype(np.int32) - (c + threshold)
    dlo = (c - threshold) - ring.astype(np.int32)
    bright_score = np.where(dhi > 0, dhi, 0).sum(axis=0)
    dark_score = np.where(dlo > 0, dlo, 0).sum(axis=0)
    score = np.where(is_bright[cy, cx], bright_score, 0) \
        + np.where(is_dark[cy, cx], dark_score, 0)

    # 3x3 non-maximum suppression over a sparse score image
    simg = np.zeros((h, w), dtype=np.int32)
    simg[ys, xs] = score
    keep = np.ones(cy.size, dtype=bool)
    for dy in (-1, 0, 1):
        for dx in (-1, 0, 1):
            if (dy, dx) == (0, 0):
                continue
            keep &= score >= simg[ys + dy, xs + dx]
    xs, ys, score = xs[keep], ys[keep], score[keep].astype(np.float64)
    return xs, ys, score
