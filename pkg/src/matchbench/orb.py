"""ORB-style multi-scale keypoints and 256-bit binary descriptors.

Recipe: FAST-9 per pyramid level, Harris-response retention against a
per-level quota, intensity-centroid orientation, and rotated fixed-pair
binary tests on a box-smoothed patch. The 256 test pairs ship as a frozen
data file so descriptors are bit-identical everywhere.
"""

from __future__ import annotations

from dataclasses import dataclass
from importlib import resources

import numpy as np
from scipy.ndimage import correlate1d, uniform_filter
from sklearn.base import BaseEstimator

from .errors import BadParams
from .fast import detect_fast
from .frames import Frame, GrayFrame, to_grayscale
from .pyramid import build_pyramid, fit_levels

PATCH_RADIUS = 15        # intensity-centroid patch
PAIR_RADIUS = 13         # descriptor test offsets live in [-13, 13]^2
_PAD = 24                # covers rotated pairs (13*sqrt(2) ~ 18.4) and the patch

HARRIS_K = 0.04
HARRIS_WINDOW = 7


def _load_pairs() -> np.ndarray:
    text = resources.files("matchbench.data").joinpath("orb_pairs.txt").read_text()
    rows = [line.split() for line in text.splitlines()
            if line.strip() and not line.startswith("#")]
    pairs = np.array(rows, dtype=np.int64)
    if pairs.shape != (256, 4):
        raise RuntimeError(f"corrupt pair table: shape {pairs.shape}")
    return pairs


PAIRS = _load_pairs()


@dataclass(frozen=True)
class Keypoint:
    x: float
    y: float
    level: int
    score: float
    angle: float


@dataclass(frozen=True)
class FeatureSet:
    """Keypoints and parallel descriptors for one frame.

    Coordinates are subpixel, in level-0 frame space. ``descriptors`` is a
    (n, 32) uint8 array, 256 bits per row packed LSB-first.
    """

    frame_index: int
    x: np.ndarray
    y: np.ndarray
    level: np.ndarray
    score: np.ndarray
    angle: np.ndarray
    descriptors: np.ndarray

    def __len__(self) -> int:
        return self.x.shape[0]

    @property
    def keypoints(self) -> list[Keypoint]:
        return [Keypoint(float(self.x[i]), float(self.y[i]), int(self.level[i]),
                         float(self.score[i]), float(self.angle[i]))
                for i in range(len(self))]

    @classmethod
    def empty(cls, frame_index: int = 0) -> "FeatureSet":
        return cls(frame_index,
                   np.empty(0, np.float32), np.empty(0, np.float32),
                   np.empty(0, np.uint8), np.empty(0, np.float32),
                   np.empty(0, np.float32), np.empty((0, 32), np.uint8))


@dataclass(frozen=True)
class DetectorParams:
    max_features: int = 1000
    n_levels: int = 8
    scale_factor: float = 1.2
    fast_threshold: int = 20
    # recorded for config/report parity; their detectors are not provided
    brisk_octaves: int = 4
    kaze_threshold: float = 0.001

    def __post_init__(self):
        if self.max_features < 8 or self.scale_factor <= 1 or self.n_levels < 1:
            raise BadParams(f"bad detector params {self}")


def harris_response(img: np.ndarray) -> np.ndarray:
    """Harris corner response over the full image (k=0.04, 7x7 window)."""
    a = img.astype(np.float64)
    deriv = np.array([-1.0, 0.0, 1.0])
    smooth = np.array([1.0, 2.0, 1.0])
    ix = correlate1d(correlate1d(a, deriv, axis=1, mode="nearest"),
                     smooth, axis=0, mode="nearest")
    iy = correlate1d(correlate1d(a, deriv, axis=0, mode="nearest"),
                     smooth, axis=1, mode="nearest")
    sxx = uniform_filter(ix * ix, HARRIS_WINDOW, mode="nearest")
    syy = uniform_filter(iy * iy, HARRIS_WINDOW, mode="nearest")
    sxy = uniform_filter(ix * iy, HARRIS_WINDOW, mode="nearest")
    det = sxx * syy - sxy * sxy
    tr = sxx + syy
    return det - HARRIS_K * tr * tr


def harris_retain(img: np.ndarray, xs: np.ndarray, ys: np.ndarray, n: int):
    """Top-n keypoints by Harris score; ties broken by (y, x)."""
    if n < 1:
        raise BadParams("n >= 1 required")
    resp = harris_response(img)
    scores = resp[ys, xs]
    order = np.lexsort((xs, ys, -scores))[:n]
    return xs[order], ys[order], scores[order]


def orientation(img: np.ndarray, x: int, y: int) -> float:
    """Intensity-centroid angle of the circular radius-15 patch, in [0, 2pi)."""
    xs, ys, angles = _orientations(img, np.array([x]), np.array([y]))
    return float(angles[0])


_DY, _DX = np.mgrid[-PATCH_RADIUS:PATCH_RADIUS + 1, -PATCH_RADIUS:PATCH_RADIUS + 1]
_CIRC = (_DX ** 2 + _DY ** 2) <= PATCH_RADIUS ** 2
_MX = np.where(_CIRC, _DX, 0).astype(np.float64)
_MY = np.where(_CIRC, _DY, 0).astype(np.float64)


def _orientations(img: np.ndarray, xs: np.ndarray, ys: np.ndarray):
    pad = np.pad(img, PATCH_RADIUS, mode="edge").astype(np.float64)
    patches = pad[ys[:, None, None] + (_DY + PATCH_RADIUS),
                  xs[:, None, None] + (_DX + PATCH_RADIUS)]
    m10 = (patches * _MX).sum(axis=(1, 2))
    m01 = (patches * _MY).sum(axis=(1, 2))
    angles = np.arctan2(m01, m10)
    angles = np.where((m10 == 0) & (m01 == 0), 0.0, np.mod(angles, 2 * np.pi))
    return xs, ys, angles


def describe(img: np.ndarray, x: int, y: int, angle: float) -> np.ndarray:
    """256-bit descriptor (32 bytes) of one keypoint; see _describe_many."""
    return _describe_many(img, np.array([x]), np.array([y]),
                          np.array([angle]))[0]


def _describe_many(img: np.ndarray, xs: np.ndarray, ys: np.ndarray,
                   angles: np.ndarray) -> np.ndarray:
    """Rotated fixed-pair binary tests on the 5x5 box-smoothed image.

    Bit i is set iff smoothed(p1_i) < smoothed(p2_i), with both offsets of
    pair i rotated by the keypoint angle and rounded to integers.
    """
    if xs.size == 0:
        return np.empty((0, 32), np.uint8)
    smoothed = uniform_filter(img.astype(np.float64), 5, mode="nearest")
    pad = np.pad(smoothed, _PAD, mode="edge")

    c, s = np.cos(angles), np.sin(angles)
    out_bits = np.empty((xs.size, 256), dtype=np.uint8)
    px1, py1 = PAIRS[:, 0], PAIRS[:, 1]
    px2, py2 = PAIRS[:, 2], PAIRS[:, 3]

    def sample(px, py):
        rx = np.floor(px[None, :] * c[:, None] - py[None, :] * s[:, None] + 0.5)
        ry = np.floor(px[None, :] * s[:, None] + py[None, :] * c[:, None] + 0.5)
        ix = rx.astype(np.int64) + xs[:, None] + _PAD
        iy = ry.astype(np.int64) + ys[:, None] + _PAD
        return pad[iy, ix]

    out_bits[:] = sample(px1, py1) < sample(px2, py2)
    return np.packbits(out_bits, axis=1, bitorder="little")


def _level_quotas(shapes: list[tuple[int, int]], max_features: int) -> list[int]:
    areas = np.array([h * w for h, w in shapes], dtype=np.float64)
    quotas = np.floor(max_features * areas / areas.sum()).astype(int)
    quotas[0] += max_features - quotas.sum()
    return [max(int(q), 0) for q in quotas]


def detect_and_describe(img: GrayFrame | Frame,
                        params: DetectorParams = DetectorParams()) -> FeatureSet:
    """Full detection pipeline for one frame.

    Per-level FAST + Harris retention with area-proportional quotas, global
    cap ``max_features``; coordinates are scaled back to level-0 space.
    Level counts are reduced automatically when the image is too small for
    the requested pyramid.
    """
    gray = to_grayscale(img)
    n_levels = fit_levels(gray.width, gray.height, params.n_levels,
                          params.scale_factor)
    pyr = build_pyramid(gray, n_levels, params.scale_factor)
    quotas = _level_quotas([lv.shape for lv in pyr.levels], params.max_features)

    parts = []
    for k, level_img in enumerate(pyr.levels):
        if quotas[k] == 0:
            continue
        xs, ys, _ = detect_fast(level_img, params.fast_threshold)
        if xs.size == 0:
            continue
        xs, ys, scores = harris_retain(level_img, xs, ys, quotas[k])
        _, _, angles = _orientations(level_img, xs, ys)
        desc = _describe_many(level_img, xs, ys, angles)
        s = pyr.scale(k)
        parts.append((
            (xs * s).astype(np.float32), (ys * s).astype(np.float32),
            np.full(xs.size, k, np.uint8), scores.astype(np.float32),
            angles.astype(np.float32), desc,
        ))

    if not parts:
        return FeatureSet.empty(gray.index)
    x, y, level, score, angle, desc = (np.concatenate(cols) for cols in zip(*parts))
    n = min(len(x), params.max_features)
    return FeatureSet(gray.index, x[:n], y[:n], level[:n], score[:n],
                      angle[:n], desc[:n])


class OrbDetector(BaseEstimator):
    """sklearn-style wrapper over :func:`detect_and_describe`."""

    def __init__(self, max_features=1000, n_levels=8, scale_factor=1.2,
                 fast_threshold=20):
        self.max_features = max_features
        self.n_levels = n_levels
        self.scale_factor = scale_factor
        self.fast_threshold = fast_threshold

    def fit(self, X=None, y=None):
        self._params_ = DetectorParams(self.max_features, self.n_levels,
                                       self.scale_factor, self.fast_threshold)
        return self

    def detect(self, frame: Frame) -> FeatureSet:
        if not hasattr(self, "_params_"):
            self.fit()
        return detect_and_describe(frame, self._params_)

    def transform(self, X):
        if isinstance(X, Frame):
            return self.detect(X)
        return [self.detect(f) for f in X]
