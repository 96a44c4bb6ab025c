"""Synthetic sequences with exact per-frame homography ground truth.

A large seeded noise texture is viewed through a drifting window; every
frame records the homography linking its coordinates back to frame 0, so
geometric estimates and matching metrics can be checked against closed-form
truth. Optional pixel noise and bright elliptical occluders emulate sensor
noise and drifting debris.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field

import numpy as np
from shapely.geometry import Polygon

from .errors import BadMotion, BadParams, DegenerateModel
from .frames import Frame, FrameSequence, write_sequence
from .ransac import GOLDEN64

_MASK64 = 0xFFFFFFFFFFFFFFFF


def _mix(seed: int, k: int) -> int:
    return (seed ^ ((k + 1) * GOLDEN64)) & _MASK64


def gen_texture(seed: int, w: int, h: int) -> Frame:
    """Seeded multi-octave value noise with broadband contrast."""
    if w < 128 or h < 128:
        raise BadParams(f"texture {w}x{h} below 128px minimum")
    rng = np.random.Generator(np.random.PCG64(seed))
    acc = np.zeros((h, w))
    amp = 1.0
    # slow persistence keeps the fine octaves strong enough for dense FAST
    # corners after bilinear rewarping
    for cell in (128, 64, 32, 16, 8, 4, 2):
        gh, gw = h // cell + 2, w // cell + 2
        grid = rng.random((gh, gw))
        ys = np.arange(h) / cell
        xs = np.arange(w) / cell
        y0 = ys.astype(np.int64)
        x0 = xs.astype(np.int64)
        fy = (ys - y0)[:, None]
        fx = (xs - x0)[None, :]
        g00 = grid[np.ix_(y0, x0)]
        g01 = grid[np.ix_(y0, x0 + 1)]
        g10 = grid[np.ix_(y0 + 1, x0)]
        g11 = grid[np.ix_(y0 + 1, x0 + 1)]
        layer = ((1 - fy) * ((1 - fx) * g00 + fx * g01)
                 + fy * ((1 - fx) * g10 + fx * g11))
        acc += layer * amp
        amp *= 0.75
    acc -= acc.min()
    acc /= acc.max()
    return Frame(np.floor(acc * 255.0 + 0.5).astype(np.uint8))


@dataclass(frozen=True)
class MotionSpec:
    """Per-frame camera step, composed into a cumulative homography."""

    translation: tuple = (0.0, 0.0)   # px/frame
    rotation: float = 0.0             # rad/frame, about the frame center
    scale: float = 1.0                # multiplicative per frame
    perspective_jitter: float = 0.0   # stddev of per-frame projective terms

    def step(self, frame_w: int, frame_h: int, rng=None) -> np.ndarray:
        cx, cy = frame_w / 2.0, frame_h / 2.0
        c, s = np.cos(self.rotation), np.sin(self.rotation)
        rs = np.array([[self.scale * c, -self.scale * s, 0.0],
                       [self.scale * s, self.scale * c, 0.0],
                       [0.0, 0.0, 1.0]])
        center = np.array([[1.0, 0.0, cx], [0.0, 1.0, cy], [0.0, 0.0, 1.0]])
        uncenter = np.array([[1.0, 0.0, -cx], [0.0, 1.0, -cy], [0.0, 0.0, 1.0]])
        d = center @ rs @ uncenter
        d[0, 2] += self.translation[0]
        d[1, 2] += self.translation[1]
        if self.perspective_jitter > 0 and rng is not None:
            d[2, 0] += rng.normal(0.0, self.perspective_jitter)
            d[2, 1] += rng.normal(0.0, self.perspective_jitter)
        return d


@dataclass
class GroundTruthSequence:
    """Renderable synthetic sequence plus exact frame-to-base homographies."""

    texture: Frame
    h_to_base: list  # 3x3 arrays, frame-k coords -> frame-0 coords
    frame_w: int
    frame_h: int
    noise_sigma: float
    snow_density: int
    seed: int
    _offset: np.ndarray = field(default=None, repr=False)

    def __post_init__(self):
        tx = (self.texture.width - self.frame_w) / 2.0
        ty = (self.texture.height - self.frame_h) / 2.0
        self._offset = np.array([[1.0, 0.0, tx], [0.0, 1.0, ty],
                                 [0.0, 0.0, 1.0]])

    def __len__(self):
        return len(self.h_to_base)

    def truth_pair(self, a: int, b: int) -> np.ndarray:
        """Exact homography mapping frame-a coordinates to frame-b coordinates."""
        h = np.linalg.inv(self.h_to_base[b]) @ self.h_to_base[a]
        return h / h[2, 2]

    def render(self, k: int) -> Frame:
        m = self._offset @ self.h_to_base[k]
        h, w = self.frame_h, self.frame_w
        ys, xs = np.mgrid[0:h, 0:w].astype(np.float64)
        ones = np.ones_like(xs)
        tx = m[0, 0] * xs + m[0, 1] * ys + m[0, 2] * ones
        ty = m[1, 0] * xs + m[1, 1] * ys + m[1, 2] * ones
        tw = m[2, 0] * xs + m[2, 1] * ys + m[2, 2] * ones
        tx /= tw
        ty /= tw

        tex = self.texture.data.astype(np.float64)
        if (tx.min() < 0 or ty.min() < 0
                or tx.max() > self.texture.width - 2
                or ty.max() > self.texture.height - 2):
            raise BadMotion(f"frame {k}: view leaves the texture")
        x0 = np.floor(tx).astype(np.int64)
        y0 = np.floor(ty).astype(np.int64)
        fx = tx - x0
        fy = ty - y0
        img = ((1 - fy) * ((1 - fx) * tex[y0, x0] + fx * tex[y0, x0 + 1])
               + fy * ((1 - fx) * tex[y0 + 1, x0] + fx * tex[y0 + 1, x0 + 1]))

        rng = np.random.Generator(np.random.PCG64(_mix(self.seed, k)))
        if self.noise_sigma > 0:
            img += rng.normal(0.0, self.noise_sigma, img.shape)
        img = np.clip(np.floor(img + 0.5), 0, 255)
        if self.snow_density > 0:
            img = _draw_snow(img, rng, self.snow_density)
        return Frame(img.astype(np.uint8), index=k)

    def frames(self):
        for k in range(len(self)):
            yield self.render(k)

    def write(self, out_dir, fps: float = 30.0) -> FrameSequence:
        seq = write_sequence(self.frames(), out_dir, fps)
        truth = {
            "seed": self.seed,
            "noise_sigma": self.noise_sigma,
            "snow_density": self.snow_density,
            "frame_size": [self.frame_w, self.frame_h],
            "h_to_base": [[float(f"{v:.12g}") for v in h.ravel()]
                          for h in self.h_to_base],
        }
        with open(os.path.join(out_dir, "truth.json"), "w") as fh:
            json.dump(truth, fh, indent=1, sort_keys=True)
        return seq


def _draw_snow(img: np.ndarray, rng, count: int) -> np.ndarray:
    h, w = img.shape
    for _ in range(count):
        cx = rng.uniform(0, w)
        cy = rng.uniform(0, h)
        rx = rng.uniform(2.0, 8.0)
        ry = rng.uniform(2.0, 8.0)
        theta = rng.uniform(0, np.pi)
        value = rng.uniform(200.0, 255.0)
        r = int(np.ceil(max(rx, ry)))
        x0, x1 = max(0, int(cx) - r), min(w, int(cx) + r + 1)
        y0, y1 = max(0, int(cy) - r), min(h, int(cy) + r + 1)
        if x0 >= x1 or y0 >= y1:
            continue
        ys, xs = np.mgrid[y0:y1, x0:x1].astype(np.float64)
        dx = xs - cx
        dy = ys - cy
        c, s = np.cos(theta), np.sin(theta)
        u = (c * dx + s * dy) / rx
        v = (-s * dx + c * dy) / ry
        mask = u * u + v * v <= 1.0
        region = img[y0:y1, x0:x1]
        region[mask] = np.floor(value + 0.5)
    return img


def gen_sequence(texture: Frame, spec: MotionSpec, count: int,
                 frame_w: int, frame_h: int, noise_sigma: float = 0.0,
                 snow_density: int = 0, seed: int = 0) -> GroundTruthSequence:
    """Compose per-frame motion into ground-truth homographies and bundle the
    renderer. Raises BadMotion if any frame's view leaves the texture or the
    cumulative homography becomes ill-conditioned."""
    if count < 1:
        raise BadParams("count >= 1 required")
    if texture.channels != 1:
        raise BadParams("grayscale texture required")
    rng = np.random.Generator(np.random.PCG64(_mix(seed, 0x5EED)))
    hs = [np.eye(3)]
    for _ in range(count - 1):
        hs.append(hs[-1] @ spec.step(frame_w, frame_h, rng))

    gts = GroundTruthSequence(texture, hs, frame_w, frame_h,
                              noise_sigma, snow_density, seed)
    corners = np.array([[0.0, 0.0], [frame_w - 1.0, 0.0],
                        [frame_w - 1.0, frame_h - 1.0], [0.0, frame_h - 1.0]])
    for k, h in enumerate(hs):
        det = np.linalg.det(h)
        if not 0.05 <= abs(det) <= 20.0:
            raise BadMotion(f"frame {k}: |det| {abs(det):.3g} outside [0.05, 20]")
        m = gts._offset @ h
        p = np.column_stack([corners, np.ones(4)]) @ m.T
        p = p[:, :2] / p[:, 2:3]
        if (p[:, 0].min() < 0 or p[:, 1].min() < 0
                or p[:, 0].max() > texture.width - 2
                or p[:, 1].max() > texture.height - 2):
            raise BadMotion(f"frame {k}: view leaves the texture")
    return gts


def overlap_fraction(h: np.ndarray, width: int, height: int) -> float:
    """Fraction of the frame rectangle still covered after warping by ``h``."""
    if not np.all(np.isfinite(h)) or abs(np.linalg.det(h)) < 1e-12:
        raise DegenerateModel("singular or non-finite homography")
    rect = [(0.0, 0.0), (width, 0.0), (width, height), (0.0, height)]
    p = np.column_stack([np.array(rect), np.ones(4)]) @ h.T
    if np.any(np.abs(p[:, 2]) < 1e-12):
        raise DegenerateModel("warped corner at infinity")
    warped = Polygon(p[:, :2] / p[:, 2:3])
    if not warped.is_valid:
        raise DegenerateModel("warped rectangle self-intersects")
    return Polygon(rect).intersection(warped).area / (width * height)


# frozen default benchmark used by the acceptance suite
BENCH_SPECS = {
    "bench-drift": {
        "count": 300, "frame_w": 640, "frame_h": 480,
        "motion": MotionSpec(translation=(2.0, 0.0), rotation=0.002),
        "noise_sigma": 5.0, "snow_density": 20,
        "texture_w": 2560, "texture_h": 1920,
    },
    "bench-translate": {
        "count": 100, "frame_w": 640, "frame_h": 480,
        "motion": MotionSpec(translation=(16.0, 0.0)),
        "noise_sigma": 2.0, "snow_density": 0,
        "texture_w": 3840, "texture_h": 1920,
    },
}


def gen_benchmark(name: str, seed: int = 0) -> GroundTruthSequence:
    if name not in BENCH_SPECS:
        raise BadParams(f"unknown spec {name!r}; choose from {sorted(BENCH_SPECS)}")
    cfg = BENCH_SPECS[name]
    texture = gen_texture(_mix(seed, 0x7E57), cfg["texture_w"], cfg["texture_h"])
    return gen_sequence(texture, cfg["motion"], cfg["count"], cfg["frame_w"],
                        cfg["frame_h"], cfg["noise_sigma"], cfg["snow_density"],
                        seed)
