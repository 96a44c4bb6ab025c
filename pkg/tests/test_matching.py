import numpy as np

from matchbench.frames import Frame
from matchbench.matching import (
    Match,
    distance_matrix,
    hamming,
    match_arrays,
    match_descriptors,
)
from matchbench.orb import FeatureSet, detect_and_describe


def _fs(descs, xs=None, ys=None, index=0):
    descs = np.asarray(descs, np.uint8).reshape(-1, 32)
    n = len(descs)
    xs = np.arange(n, dtype=np.float32) if xs is None else np.asarray(xs, np.float32)
    ys = np.zeros(n, np.float32) if ys is None else np.asarray(ys, np.float32)
    return FeatureSet(index, xs, ys, np.zeros(n, np.uint8),
                      np.zeros(n, np.float32), np.zeros(n, np.float32), descs)


def _rand_desc(rng, n):
    return rng.integers(0, 256, (n, 32), dtype=np.uint8)


def test_hamming_basic():
    a = np.zeros(32, np.uint8)
    b = np.zeros(32, np.uint8)
    assert hamming(a, b) == 0
    b[0] = 0b1010_0001
    assert hamming(a, b) == 3
    assert hamming(a, np.full(32, 255, np.uint8)) == 256


def test_distance_matrix_matches_scalar():
    rng = np.random.default_rng(61)
    da, db = _rand_desc(rng, 7), _rand_desc(rng, 5)
    d = distance_matrix(da, db)
    assert d.shape == (7, 5)
    for i in range(7):
        for j in range(5):
            assert d[i, j] == hamming(da[i], db[j])


def test_match_identical_sets_is_identity():
    rng = np.random.default_rng(67)
    descs = _rand_desc(rng, 40)
    fa, fb = _fs(descs), _fs(descs, index=1)
    matches = match_descriptors(fa, fb)
    assert len(matches) == 40
    assert all(m.index_a == m.index_b and m.distance == 0 for m in matches)


def test_match_symmetry():
    # Swapping the two sets must produce the mirrored match set.
    rng = np.random.default_rng(71)
    da = _rand_desc(rng, 60)
    bits = np.unpackbits(da[:30], axis=1)
    noise = (rng.random(bits.shape) < 0.02).astype(np.uint8)
    db = np.packbits(bits ^ noise, axis=1)
    fwd = match_descriptors(_fs(da), _fs(db, index=1))
    rev = match_descriptors(_fs(db, index=1), _fs(da))
    assert {(m.index_a, m.index_b) for m in fwd} \
        == {(m.index_b, m.index_a) for m in rev}


def test_ratio_test_rejects_ambiguous():
    # b holds two descriptors both 2 bits from query a: ambiguous, dropped.
    a = np.zeros((1, 32), np.uint8)
    b = np.zeros((2, 32), np.uint8)
    b[0, 0] = 0b11
    b[1, 1] = 0b11
    pad = _rand_desc(np.random.default_rng(73), 5) | 0x80  # far decoys
    fa = _fs(np.vstack([a, pad]))
    fb = _fs(np.vstack([b, pad ^ 1]), index=1)
    matches = match_descriptors(fa, fb)
    assert all(m.index_a != 0 for m in matches)


def test_ratio_waived_at_distance_zero():
    # Exact duplicate pair in b does not disqualify a perfect match... unless
    # the duplicate makes the mutual best ambiguous; distance-0 must survive
    # a second-best at distance 0 only through the waiver.
    a = np.zeros((1, 32), np.uint8)
    close = np.zeros((1, 32), np.uint8)
    close[0, 0] = 1  # second-best at distance 1 -> ratio 0/...ok anyway
    fa = _fs(a)
    fb = _fs(np.vstack([a, close]), index=1)
    matches = match_descriptors(fa, fb)
    assert matches == [Match(0, 0, 0)]


def test_match_ordering_and_empty():
    rng = np.random.default_rng(79)
    da = _rand_desc(rng, 25)
    matches = match_descriptors(_fs(da), _fs(da, index=1))
    dists = [m.distance for m in matches]
    assert dists == sorted(dists)
    assert match_descriptors(FeatureSet.empty(), _fs(da)) == []
    assert match_descriptors(_fs(da), FeatureSet.empty(1)) == []


def test_match_arrays_geometry():
    rng = np.random.default_rng(83)
    da = _rand_desc(rng, 10)
    xs = np.arange(10, dtype=np.float32) * 3
    ys = np.arange(10, dtype=np.float32) * 5
    fa = _fs(da, xs, ys)
    fb = _fs(da, xs + 1, ys + 2, index=1)
    matches = match_descriptors(fa, fb)
    src, dst = match_arrays(matches, fa, fb)
    assert np.allclose(dst - src, [1.0, 2.0])
    z1, z2 = match_arrays([], fa, fb)
    assert z1.shape == (0, 2) and z2.shape == (0, 2)


def test_real_descriptors_shifted_frame(texture_800):
    # Crops of the same texture offset by 24 px: most matches should land
    # at exactly the 24-px displacement.
    a = detect_and_describe(Frame(texture_800.data[:480, :640]))
    b = detect_and_describe(Frame(texture_800.data[:480, 24:664]))
    matches = match_descriptors(a, b)
    assert len(matches) > 200
    src, dst = match_arrays(matches, a, b)
    dx = src[:, 0] - dst[:, 0]
    good = np.abs(dx - 24) < 2.0
    assert good.mean() > 0.8
