"""Brute-force Hamming matching with ratio test and mutual cross-check."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .orb import FeatureSet

RATIO = 0.8


@dataclass(frozen=True)
class Match:
    index_a: int
    index_b: int
    distance: int


def hamming(a: np.ndarray, b: np.ndarray) -> int:
    """Hamming distance between two 32-byte descriptors."""
    return int(np.bitwise_count(np.bitwise_xor(a, b)).sum())


def distance_matrix(da: np.ndarray, db: np.ndarray) -> np.ndarray:
    """(n_a, n_b) uint16 Hamming distances between packed descriptor rows."""
    a = np.ascontiguousarray(da).view(np.uint64)
    b = np.ascontiguousarray(db).view(np.uint64)
    d = np.zeros((a.shape[0], b.shape[0]), dtype=np.uint16)
    for w in range(a.shape[1]):  # per-word loop keeps the temporaries 2-D
        d += np.bitwise_count(
            np.bitwise_xor(a[:, None, w], b[None, :, w])).astype(np.uint16)
    return d


def _two_smallest(d: np.ndarray, axis: int):
    """(min, argmin, second-min) along an axis; first occurrence wins ties."""
    am = d.argmin(axis=axis)
    m = np.take_along_axis(d, np.expand_dims(am, axis), axis).squeeze(axis)
    masked = d.copy()
    np.put_along_axis(masked, np.expand_dims(am, axis), np.uint16(512), axis)
    m2 = masked.min(axis=axis)
    return m, am, m2


def match_descriptors(fa: FeatureSet, fb: FeatureSet) -> list[Match]:
    """Nearest-neighbor matches with the 0.8 ratio test (both directions,
    waived at distance 0) and mutual cross-check; sorted by (distance,
    index_a, index_b)."""
    if len(fa) == 0 or len(fb) == 0:
        return []
    if len(fa) == 1 or len(fb) == 1:
        # no second-best available: keep only exact mutual best at distance 0
        d = distance_matrix(fa.descriptors, fb.descriptors)
        i, j = np.unravel_index(d.argmin(), d.shape)
        if d[i, j] == 0 and (d[i] == 0).sum() == 1 and (d[:, j] == 0).sum() == 1:
            return [Match(int(i), int(j), 0)]
        return []

    d = distance_matrix(fa.descriptors, fb.descriptors)
    best_a, nn_a, second_a = _two_smallest(d, axis=1)
    best_b, nn_b, second_b = _two_smallest(d, axis=0)

    ia = np.arange(len(fa))
    mutual = nn_b[nn_a] == ia
    ratio_a = (best_a == 0) | (best_a < RATIO * second_a)
    ratio_b_for_a = (best_b[nn_a] == 0) | (best_b[nn_a] < RATIO * second_b[nn_a])
    keep = mutual & ratio_a & ratio_b_for_a

    idx_a = ia[keep]
    idx_b = nn_a[keep]
    dist = best_a[keep]
    order = np.lexsort((idx_b, idx_a, dist))
    return [Match(int(idx_a[k]), int(idx_b[k]), int(dist[k])) for k in order]


def match_arrays(matches: list[Match], fa: FeatureSet, fb: FeatureSet):
    """(n, 2) source and destination point arrays for a match list."""
    if not matches:
        z = np.empty((0, 2))
        return z, z
    ia = np.array([m.index_a for m in matches])
    ib = np.array([m.index_b for m in matches])
    src = np.stack([fa.x[ia], fa.y[ia]], axis=1).astype(np.float64)
    dst = np.stack([fb.x[ib], fb.y[ib]], axis=1).astype(np.float64)
    return src, dst
