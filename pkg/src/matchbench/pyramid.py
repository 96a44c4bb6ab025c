"""Multi-scale image pyramid with area-averaged downsampling."""

from __future__ import annotations

import functools
from dataclasses import dataclass

import numpy as np

from .errors import TooSmall
from .frames import GrayFrame


@dataclass(frozen=True)
class Pyramid:
    levels: list  # uint8 arrays, level 0 is the input image
    scale_factor: float

    def __len__(self):
        return len(self.levels)

    def scale(self, level: int) -> float:
        return self.scale_factor ** level


@functools.lru_cache(maxsize=64)
def _area_weights(n_src: int, n_dst: int) -> np.ndarray:
    """(n_dst, n_src) matrix of fractional coverage for 1-D area averaging."""
    r = n_src / n_dst
    w = np.zeros((n_dst, n_src))
    for d in range(n_dst):
        lo, hi = d * r, (d + 1) * r
        i0, i1 = int(np.floor(lo)), int(np.ceil(hi))
        for i in range(i0, min(i1, n_src)):
            cover = min(hi, i + 1) - max(lo, i)
            if cover > 0:
                w[d, i] = cover
    return w / r


def area_resize(img: np.ndarray, w_dst: int, h_dst: int) -> np.ndarray:
    wy = _area_weights(img.shape[0], h_dst)
    wx = _area_weights(img.shape[1], w_dst)
    out = wy @ img.astype(np.float64) @ wx.T
    return np.clip(np.floor(out + 0.5), 0, 255).astype(np.uint8)


def build_pyramid(img: GrayFrame, n_levels: int = 8,
                  scale_factor: float = 1.2) -> Pyramid:
    """Level k has dimensions floor(dim / scale_factor**k); each level is
    resampled from the input by area averaging."""
    if n_levels < 1 or scale_factor <= 1.0 and n_levels > 1:
        raise TooSmall(f"n_levels {n_levels}, scale {scale_factor}")
    data = img.data
    h0, w0 = data.shape
    top = scale_factor ** (n_levels - 1)
    if min(int(w0 / top), int(h0 / top)) < 32:
        raise TooSmall(
            f"{w0}x{h0} with {n_levels} levels at x{scale_factor}: top level < 32 px")
    levels = [data]
    for k in range(1, n_levels):
        s = scale_factor ** k
        levels.append(area_resize(data, int(w0 / s), int(h0 / s)))
    return Pyramid(levels, scale_factor)


def fit_levels(width: int, height: int, n_levels: int, scale_factor: float,
               min_dim: int = 32) -> int:
    """Largest usable level count <= n_levels for this geometry."""
    k = 1
    while (k < n_levels
           and min(int(width / scale_factor ** k), int(height / scale_factor ** k)) >= min_dim):
        k += 1
    return k
