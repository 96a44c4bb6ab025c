"""Classical contrast enhancers used as controlled stimuli for the benchmark.

Implemented families: global histogram equalization, CLAHE, gray-world white
balance, and a two-input multi-scale fusion (white-balanced + contrast-boosted
inputs, blended with contrast/saliency/exposedness weight maps through
Laplacian/Gaussian pyramids).

Each enhancer is exposed both as a plain function on frames and as a
sklearn-style transformer (``get_params``/``set_params``/``transform``), so
grids of enhancer settings can be driven generically from the CLI and reports.
"""

from __future__ import annotations

import os
import warnings

import numpy as np
from scipy import ndimage
from scipy.ndimage import correlate1d, gaussian_filter
from sklearn.base import BaseEstimator, TransformerMixin

from .errors import BadParams, ContractError, DegenerateImage
from .frames import Frame, FrameSequence, GrayFrame, to_grayscale, write_sequence


class DegenerateImageWarning(UserWarning):
    """Image had no information for the requested mapping; returned unchanged."""


def _round_u8(a: np.ndarray) -> np.ndarray:
    # half-up rounding, deterministic across platforms
    return np.clip(np.floor(a + 0.5), 0, 255).astype(np.uint8)


def _require_gray(img: Frame) -> np.ndarray:
    if img.channels != 1:
        raise ContractError("grayscale frame required")
    return img.data


def _he_lut(hist: np.ndarray, n_pixels: int) -> np.ndarray | None:
    """Float equalization LUT from a (possibly clipped, float) histogram.

    Maps v to 255*(cdf(v)-cdf_min)/(N-cdf_min) with cdf_min the smallest
    nonzero CDF value. Returns None for a zero-information histogram.
    """
    cdf = np.cumsum(hist)
    nz = cdf[cdf > 0]
    if nz.size == 0:
        return None
    cdf_min = nz[0]
    denom = n_pixels - cdf_min
    if denom <= 0:
        return None
    return 255.0 * (cdf - cdf_min) / denom


def global_he(img: GrayFrame) -> GrayFrame:
    """Global histogram equalization via the image CDF.

    A constant image is returned unchanged with a DegenerateImageWarning.
    """
    data = _require_gray(img)
    hist = np.bincount(data.ravel(), minlength=256).astype(np.float64)
    lut = _he_lut(hist, data.size)
    if lut is None:
        warnings.warn("constant image, equalization is a no-op", DegenerateImageWarning)
        return img
    return Frame(_round_u8(lut[data]), index=img.index)


def _tile_edges(size: int, tiles: int) -> np.ndarray:
    return np.linspace(0, size, tiles + 1).round().astype(np.int64)


def clahe(img: GrayFrame, tiles_x: int = 8, tiles_y: int = 8,
          clip_limit: float = 0.01) -> GrayFrame:
    """Contrast-limited adaptive histogram equalization.

    Per-tile histograms are clipped at ``clip_limit`` times the tile pixel
    count (excess redistributed uniformly over all 256 bins), equalized, and
    the per-tile mappings are bilinearly interpolated between tile centers
    with border replication. With a 1x1 grid and a non-binding clip limit
    this reduces bit-for-bit to :func:`global_he`.
    """
    if tiles_x < 1 or tiles_y < 1 or clip_limit <= 0:
        raise BadParams(f"tiles {tiles_x}x{tiles_y}, clip {clip_limit}")
    data = _require_gray(img)
    h, w = data.shape
    if w < tiles_x or h < tiles_y:
        raise BadParams(f"image {w}x{h} smaller than tile grid {tiles_x}x{tiles_y}")

    xs = _tile_edges(w, tiles_x)
    ys = _tile_edges(h, tiles_y)
    luts = np.empty((tiles_y, tiles_x, 256), dtype=np.float64)
    identity = np.arange(256, dtype=np.float64)
    for ty in range(tiles_y):
        for tx in range(tiles_x):
            tile = data[ys[ty]:ys[ty + 1], xs[tx]:xs[tx + 1]]
            hist = np.bincount(tile.ravel(), minlength=256).astype(np.float64)
            limit = clip_limit * tile.size
            excess = np.maximum(hist - limit, 0.0).sum()
            if excess > 0:
                hist = np.minimum(hist, limit) + excess / 256.0
            lut = _he_lut(hist, tile.size)
            luts[ty, tx] = identity if lut is None else lut

    # bilinear interpolation between the four surrounding tile mappings
    cx = (xs[:-1] + xs[1:]) / 2.0 - 0.5
    cy = (ys[:-1] + ys[1:]) / 2.0 - 0.5
    px = np.arange(w, dtype=np.float64)
    py = np.arange(h, dtype=np.float64)
    ix = np.clip(np.searchsorted(cx, px) - 1, 0, tiles_x - 2) if tiles_x > 1 else None
    iy = np.clip(np.searchsorted(cy, py) - 1, 0, tiles_y - 2) if tiles_y > 1 else None

    if tiles_x > 1:
        fx = np.clip((px - cx[ix]) / (cx[ix + 1] - cx[ix]), 0.0, 1.0)
    else:
        ix = np.zeros(w, dtype=np.int64)
        fx = np.zeros(w)
    if tiles_y > 1:
        fy = np.clip((py - cy[iy]) / (cy[iy + 1] - cy[iy]), 0.0, 1.0)
    else:
        iy = np.zeros(h, dtype=np.int64)
        fy = np.zeros(h)

    ix1 = np.minimum(ix + 1, tiles_x - 1)
    iy1 = np.minimum(iy + 1, tiles_y - 1)
    IX, IY = np.meshgrid(ix, iy)
    IX1, IY1 = np.meshgrid(ix1, iy1)
    FX, FY = np.meshgrid(fx, fy)

    v = data
    out = ((1 - FY) * ((1 - FX) * luts[IY, IX, v] + FX * luts[IY, IX1, v])
           + FY * ((1 - FX) * luts[IY1, IX, v] + FX * luts[IY1, IX1, v]))
    return Frame(_round_u8(out), index=img.index)


def gray_world_wb(img: Frame) -> Frame:
    """Gray-world white balance: scale each channel to the mean of channel means."""
    if img.channels != 3:
        raise ContractError("3-channel frame required")
    data = img.data.astype(np.float64)
    means = data.reshape(-1, 3).mean(axis=0)
    if np.any(means == 0):
        raise DegenerateImage(f"zero channel mean {means}")
    scale = means.mean() / means
    return Frame(_round_u8(data * scale), index=img.index)


# --- pyramid machinery for fusion ---

_PYR_KERNEL = np.array([1.0, 4.0, 6.0, 4.0, 1.0]) / 16.0


def _pyr_smooth(a: np.ndarray) -> np.ndarray:
    a = correlate1d(a, _PYR_KERNEL, axis=0, mode="reflect")
    return correlate1d(a, _PYR_KERNEL, axis=1, mode="reflect")


def _pyr_down(a: np.ndarray) -> np.ndarray:
    return _pyr_smooth(a)[::2, ::2]


def _pyr_up(a: np.ndarray, shape: tuple[int, int]) -> np.ndarray:
    out = np.zeros(shape, dtype=a.dtype)
    out[::2, ::2] = a
    out = correlate1d(out, 2.0 * _PYR_KERNEL, axis=0, mode="reflect")
    return correlate1d(out, 2.0 * _PYR_KERNEL, axis=1, mode="reflect")


def gaussian_pyramid(a: np.ndarray, levels: int) -> list[np.ndarray]:
    pyr = [a]
    for _ in range(levels - 1):
        pyr.append(_pyr_down(pyr[-1]))
    return pyr


def laplacian_pyramid(a: np.ndarray, levels: int) -> list[np.ndarray]:
    gp = gaussian_pyramid(a, levels)
    lp = [gp[k] - _pyr_up(gp[k + 1], gp[k].shape) for k in range(levels - 1)]
    lp.append(gp[-1])
    return lp


def pyramid_blend(inputs: list[np.ndarray], weights: list[np.ndarray],
                  levels: int) -> np.ndarray:
    """Multi-scale blend: Laplacian(input) * Gaussian(weight), summed per level
    and collapsed. ``weights`` must already be normalized per pixel."""
    fused = None
    for img, wt in zip(inputs, weights):
        lp = laplacian_pyramid(img, levels)
        gp = gaussian_pyramid(wt, levels)
        terms = [l * g for l, g in zip(lp, gp)]
        fused = terms if fused is None else [f + t for f, t in zip(fused, terms)]
    out = fused[-1]
    for level in range(levels - 2, -1, -1):
        out = _pyr_up(out, fused[level].shape) + fused[level]
    return out


def _luma01(img: Frame) -> np.ndarray:
    return to_grayscale(img).data.astype(np.float64) / 255.0


def _fusion_weight(luma01: np.ndarray) -> np.ndarray:
    contrast = np.abs(ndimage.laplace(luma01, mode="reflect"))
    saliency = np.abs(luma01 - gaussian_filter(luma01, sigma=5.0, mode="reflect"))
    exposedness = np.exp(-((luma01 - 0.5) ** 2) / (2.0 * 0.25 ** 2))
    return contrast + saliency + exposedness


def _clahe_luma(img: Frame, tiles: int = 8, clip: float = 0.01) -> Frame:
    """CLAHE applied to luma, chroma ratios preserved."""
    y = to_grayscale(img)
    y2 = clahe(y, tiles, tiles, clip)
    if img.channels == 1:
        return y2
    ratio = y2.data.astype(np.float64) / np.maximum(y.data.astype(np.float64), 1.0)
    return Frame(_round_u8(img.data.astype(np.float64) * ratio[..., None]),
                 index=img.index)


def fusion_enhance(img: Frame, pyramid_levels: int = 5,
                   weight_epsilon: float = 1e-6) -> Frame:
    """Two-input weighted multi-scale fusion of a white-balanced and a
    contrast-boosted version of the frame."""
    if img.channels != 3:
        raise ContractError("3-channel frame required")
    if pyramid_levels < 2 or weight_epsilon <= 0:
        raise BadParams(f"levels {pyramid_levels}, eps {weight_epsilon}")
    if min(img.width, img.height) / 2 ** (pyramid_levels - 1) < 2:
        raise BadParams(f"image too small for {pyramid_levels} pyramid levels")

    try:
        wb = gray_world_wb(img)
    except DegenerateImage:
        wb = img
    boosted = _clahe_luma(img)

    inputs = [wb, boosted]
    raw = [_fusion_weight(_luma01(f)) + weight_epsilon for f in inputs]
    total = raw[0] + raw[1]
    weights = [r / total for r in raw]

    channels = []
    for c in range(3):
        planes = [f.data[..., c].astype(np.float64) for f in inputs]
        channels.append(pyramid_blend(planes, weights, pyramid_levels))
    return Frame(_round_u8(np.stack(channels, axis=-1)), index=img.index)


# --- sklearn-style transformer wrappers ---

class FrameTransformer(TransformerMixin, BaseEstimator):
    """Stateless per-frame transformer; ``fit`` only validates parameters."""

    def fit(self, X=None, y=None):
        self._check_params()
        return self

    def _check_params(self):
        pass

    def transform(self, X):
        if isinstance(X, Frame):
            return self.transform_frame(X)
        return [self.transform_frame(f) for f in X]

    def transform_frame(self, frame: Frame) -> Frame:
        raise NotImplementedError


class Identity(FrameTransformer):
    def transform_frame(self, frame):
        return frame


class GlobalHE(FrameTransformer):
    """Histogram equalization on luma; chroma ratios preserved on color input."""

    def transform_frame(self, frame):
        if frame.channels == 1:
            return global_he(frame)
        y = to_grayscale(frame)
        y2 = global_he(y)
        ratio = y2.data.astype(np.float64) / np.maximum(y.data.astype(np.float64), 1.0)
        return Frame(_round_u8(frame.data.astype(np.float64) * ratio[..., None]),
                     index=frame.index)


class Clahe(FrameTransformer):
    def __init__(self, tiles_x=8, tiles_y=8, clip_limit=0.01):
        self.tiles_x = tiles_x
        self.tiles_y = tiles_y
        self.clip_limit = clip_limit

    def _check_params(self):
        if self.tiles_x < 1 or self.tiles_y < 1 or self.clip_limit <= 0:
            raise BadParams("tiles >= 1 and clip_limit > 0 required")

    def transform_frame(self, frame):
        if frame.channels == 1:
            return clahe(frame, self.tiles_x, self.tiles_y, self.clip_limit)
        y = to_grayscale(frame)
        y2 = clahe(y, self.tiles_x, self.tiles_y, self.clip_limit)
        ratio = y2.data.astype(np.float64) / np.maximum(y.data.astype(np.float64), 1.0)
        return Frame(_round_u8(frame.data.astype(np.float64) * ratio[..., None]),
                     index=frame.index)


class GrayWorld(FrameTransformer):
    def transform_frame(self, frame):
        return gray_world_wb(frame)


class Fusion(FrameTransformer):
    def __init__(self, pyramid_levels=5, weight_epsilon=1e-6):
        self.pyramid_levels = pyramid_levels
        self.weight_epsilon = weight_epsilon

    def _check_params(self):
        if self.pyramid_levels < 2 or self.weight_epsilon <= 0:
            raise BadParams("pyramid_levels >= 2 and weight_epsilon > 0 required")

    def transform_frame(self, frame):
        return fusion_enhance(frame, self.pyramid_levels, self.weight_epsilon)


ENHANCERS = {
    "identity": Identity,
    "ghe": GlobalHE,
    "clahe": Clahe,
    "grayworld": GrayWorld,
    "fusion": Fusion,
}


def make_enhancer(name: str, **params) -> FrameTransformer:
    if name not in ENHANCERS:
        raise BadParams(f"unknown enhancer {name!r}; choose from {sorted(ENHANCERS)}")
    try:
        est = ENHANCERS[name](**params)
    except TypeError as exc:
        raise BadParams(str(exc)) from exc
    return est.fit()


def apply_enhancer(seq: FrameSequence, enhancer: FrameTransformer,
                   out_dir) -> FrameSequence:
    """Enhance every frame of a sequence into ``out_dir`` with matching names."""
    os.makedirs(out_dir, exist_ok=True)

    def enhanced():
        for frame in seq:
            seq.check_geometry(frame)
            yield enhancer.transform_frame(frame)

    return write_sequence(enhanced(), out_dir, seq.fps)
