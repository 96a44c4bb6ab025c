import numpy as np
import pytest

from matchbench.errors import BadMagic, MissingFile, TooSmall, TruncatedBody
from matchbench.fast import CIRCLE, detect_fast
from matchbench.featcache import load_featureset, save_featureset
from matchbench.frames import Frame
from matchbench.orb import (
    DetectorParams,
    FeatureSet,
    OrbDetector,
    describe,
    detect_and_describe,
    harris_retain,
    orientation,
)
from matchbench.pyramid import area_resize, build_pyramid, fit_levels


# --- oracle: naive FAST-9 + NMS, written independently of the vectorized code


def _fast_oracle(img, threshold):
    h, w = img.shape
    a = img.astype(int)
    cand = {}
    for y in range(3, h - 3):
        for x in range(3, w - 3):
            ring = [a[y + dy, x + dx] for dx, dy in CIRCLE]
            c = a[y, x]
            for sign in (1, -1):
                flags = [sign * (r - c) > threshold for r in ring]
                run = best = 0
                for f in flags + flags:  # wrap
                    run = run + 1 if f else 0
                    best = max(best, run)
                if best >= 9:
                    score = sum(max(sign * (r - c) - threshold, 0) for r in ring)
                    cand[(x, y)] = cand.get((x, y), 0) + score
    out = []
    for (x, y), s in cand.items():
        if all(s >= cand.get((x + dx, y + dy), 0)
               for dy in (-1, 0, 1) for dx in (-1, 0, 1) if (dx, dy) != (0, 0)):
            out.append((y, x, s))
    return sorted(out)


def test_fast_matches_oracle():
    rng = np.random.default_rng(31)
    img = rng.integers(0, 256, (24, 24), dtype=np.uint8)
    xs, ys, scores = detect_fast(img, 20)
    got = sorted(zip(ys.tolist(), xs.tolist(), scores.tolist()))
    assert got == _fast_oracle(img, 20)


def test_fast_flat_image_has_no_corners():
    xs, ys, _ = detect_fast(np.full((32, 32), 128, np.uint8), 20)
    assert xs.size == 0


def test_fast_bright_dot_is_dark_corner_center():
    img = np.full((16, 16), 50, np.uint8)
    img[8, 8] = 250  # isolated dot: every ring pixel darker than center
    xs, ys, _ = detect_fast(img, 20)
    assert (8, 8) in set(zip(xs.tolist(), ys.tolist()))


def test_fast_border_excluded():
    rng = np.random.default_rng(37)
    img = rng.integers(0, 256, (40, 40), dtype=np.uint8)
    xs, ys, _ = detect_fast(img, 10)
    if xs.size:
        assert xs.min() >= 3 and xs.max() <= 36
        assert ys.min() >= 3 and ys.max() <= 36


def test_harris_retain_prefers_strong_corner():
    # Checkerboard corner (strong) vs a step edge (weak Harris response).
    img = np.full((40, 40), 30, np.uint8)
    img[:20, :20] = 220
    img[20:, 20:] = 220          # checkerboard junction at (20, 20)
    img[:, 35:] = 220            # vertical edge
    xs = np.array([20, 35, 10])
    ys = np.array([20, 10, 10])
    rx, ry, rs = harris_retain(img, xs, ys, 1)
    assert (rx[0], ry[0]) == (20, 20)
    assert rs[0] > 0


def test_harris_retain_orders_and_caps():
    rng = np.random.default_rng(41)
    img = rng.integers(0, 256, (64, 64), dtype=np.uint8)
    xs = rng.integers(8, 56, 30)
    ys = rng.integers(8, 56, 30)
    rx, ry, rs = harris_retain(img, xs, ys, 10)
    assert len(rx) == 10
    assert np.all(np.diff(rs) <= 0)


def test_orientation_gradients():
    ramp_x = np.tile(np.arange(64, dtype=np.uint8) * 2, (64, 1))
    assert abs(orientation(ramp_x, 32, 32)) < 1e-9
    ramp_y = ramp_x.T.copy()
    assert abs(orientation(ramp_y, 32, 32) - np.pi / 2) < 1e-9
    flat = np.full((64, 64), 99, np.uint8)
    assert orientation(flat, 32, 32) == 0.0


def test_orientation_range():
    rng = np.random.default_rng(43)
    img = rng.integers(0, 256, (80, 80), dtype=np.uint8)
    for x, y in [(30, 30), (40, 25), (50, 50)]:
        a = orientation(img, x, y)
        assert 0.0 <= a < 2 * np.pi


def test_describe_shape_and_offset_invariance():
    rng = np.random.default_rng(47)
    img = rng.integers(0, 200, (80, 80), dtype=np.uint8)
    d1 = describe(img, 40, 40, 0.0)
    assert d1.shape == (32,) and d1.dtype == np.uint8
    # descriptor depends only on intensity comparisons, not absolute level
    d2 = describe((img + 50).astype(np.uint8), 40, 40, 0.0)
    assert np.array_equal(d1, d2)


def test_describe_rotation_approximate_invariance():
    # Rotate the image 90 degrees; with the angle supplied accordingly the
    # descriptor should be much closer than the ~128-bit random baseline.
    rng = np.random.default_rng(53)
    img = rng.integers(0, 256, (81, 81), dtype=np.uint8)
    d0 = describe(img, 40, 40, 0.0)
    rot = np.rot90(img, k=-1).copy()  # (x, y) -> (80 - y, x)
    d1 = describe(rot, 40, 40, np.pi / 2)
    dist = int(np.unpackbits(d0 ^ d1).sum())
    assert dist < 60


def test_area_resize_block_mean():
    rng = np.random.default_rng(59)
    img = rng.integers(0, 256, (16, 16), dtype=np.uint8)
    out = area_resize(img, 8, 8)
    blocks = img.astype(np.float64).reshape(8, 2, 8, 2).mean(axis=(1, 3))
    expect = np.clip(np.floor(blocks + 0.5), 0, 255).astype(np.uint8)
    assert np.array_equal(out, expect)


def test_area_resize_constant():
    img = np.full((30, 20), 77, np.uint8)
    assert np.all(area_resize(img, 13, 11) == 77)


def test_build_pyramid_geometry():
    img = Frame(np.zeros((480, 640), np.uint8))
    pyr = build_pyramid(img, 8, 1.2)
    assert len(pyr) == 8
    for k, lv in enumerate(pyr.levels):
        assert lv.shape == (int(480 / 1.2 ** k), int(640 / 1.2 ** k))
    with pytest.raises(TooSmall):
        build_pyramid(Frame(np.zeros((40, 40), np.uint8)), 8, 1.2)


def test_fit_levels():
    assert fit_levels(640, 480, 8, 1.2) == 8
    assert fit_levels(64, 64, 8, 1.2) == 4  # 64/1.2^4 = 30.8 < 32
    assert fit_levels(20, 20, 8, 1.2) == 1


def test_detect_and_describe_textured(textured_frame):
    fs = detect_and_describe(textured_frame)
    assert len(fs) == 1000
    assert fs.descriptors.shape == (1000, 32)
    assert fs.x.min() >= 0 and fs.x.max() < 640
    assert fs.y.min() >= 0 and fs.y.max() < 480
    assert len(np.unique(fs.level)) >= 3  # features spread over the pyramid


def test_detect_and_describe_deterministic(textured_frame):
    a = detect_and_describe(textured_frame)
    b = detect_and_describe(textured_frame)
    assert np.array_equal(a.descriptors, b.descriptors)
    assert np.array_equal(a.x, b.x) and np.array_equal(a.angle, b.angle)


def test_detect_flat_frame_empty():
    fs = detect_and_describe(Frame(np.full((480, 640), 100, np.uint8)))
    assert len(fs) == 0
    assert fs.descriptors.shape == (0, 32)


def test_detector_params_validation():
    with pytest.raises(Exception):
        DetectorParams(max_features=4)
    with pytest.raises(Exception):
        DetectorParams(scale_factor=1.0)


def test_orb_detector_estimator(textured_frame):
    det = OrbDetector(max_features=200, n_levels=4)
    assert det.get_params()["max_features"] == 200
    fs = det.fit().detect(textured_frame)
    assert len(fs) == 200


def test_featcache_roundtrip(tmp_path, textured_frame):
    fs = detect_and_describe(textured_frame,
                             DetectorParams(max_features=100, n_levels=4))
    p = tmp_path / "f.fbfs"
    save_featureset(fs, p)
    back = load_featureset(p, frame_index=fs.frame_index)
    assert len(back) == len(fs)
    assert np.array_equal(back.descriptors, fs.descriptors)
    assert np.array_equal(back.level, fs.level)
    assert np.allclose(back.x, fs.x) and np.allclose(back.angle, fs.angle)


def test_featcache_errors(tmp_path):
    with pytest.raises(MissingFile):
        load_featureset(tmp_path / "nope.fbfs")
    bad = tmp_path / "bad.fbfs"
    bad.write_bytes(b"XXXX\x01\x00\x00\x00\x00")
    with pytest.raises(BadMagic):
        load_featureset(bad)
    trunc = tmp_path / "t.fbfs"
    fs = FeatureSet.empty()
    save_featureset(fs, trunc)
    blob = trunc.read_bytes()[:-1] + b"\x02"  # claim 2 features, provide none
    trunc.write_bytes(blob[:4] + b"\x01\x02\x00\x00\x00")
    with pytest.raises(TruncatedBody):
        load_featureset(trunc)
