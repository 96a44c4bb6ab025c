"""Seeded RANSAC homography fitting and per-pair acceptance decisions."""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import BadParams, DegenerateConfiguration, NumericalFailure
from .homography import dlt_homography, reprojection_errors
from .matching import Match, match_arrays, match_descriptors
from .orb import FeatureSet

GOLDEN64 = 0x9E3779B97F4A7C15  # 2^64 / golden ratio, for per-pair seed mixing


class RejectReason(Enum):
    NONE = "None"
    TOO_FEW_MATCHES = "TooFewMatches"
    LOW_INLIER_RATIO = "LowInlierRatio"
    HIGH_REPROJ_ERROR = "HighReprojError"
    DEGENERATE_MODEL = "DegenerateModel"


@dataclass(frozen=True)
class RansacParams:
    ransac_threshold: float = 10.0
    min_inlier_ratio: float = 0.3
    max_reproj_error: float = 20.0
    confidence: float = 0.995
    max_iterations: int = 2000
    min_matches: int = 15
    seed: int = 0

    def __post_init__(self):
        if (self.ransac_threshold <= 0 or self.max_reproj_error <= 0
                or not 0 < self.min_inlier_ratio < 1
                or not 0 < self.confidence < 1
                or self.max_iterations < 1 or self.min_matches < 4):
            raise BadParams(f"bad RANSAC params {self}")


@dataclass(frozen=True)
class PairMatchStats:
    frame_a: int
    frame_b: int
    n_matches: int
    n_inliers: int
    inlier_ratio: float
    mean_reproj_error: float
    homography: np.ndarray | None
    accepted: bool
    reject_reason: RejectReason

    CSV_HEADER = ("frame_a,frame_b,n_matches,n_inliers,inlier_ratio,"
                  "mean_reproj_error,accepted,reject_reason")

    def csv_row(self) -> str:
        return (f"{self.frame_a},{self.frame_b},{self.n_matches},"
                f"{self.n_inliers},{self.inlier_ratio:.6f},"
                f"{self.mean_reproj_error:.6f},{str(self.accepted).lower()},"
                f"{self.reject_reason.value}")


def pair_seed(global_seed: int, frame_a: int, frame_b: int) -> int:
    """Deterministic per-pair seed, independent of evaluation order."""
    return (global_seed ^ ((frame_a * GOLDEN64 + frame_b) & 0xFFFFFFFFFFFFFFFF)) \
        & 0xFFFFFFFFFFFFFFFF


def _reject(frame_a, frame_b, n_matches, reason) -> PairMatchStats:
    return PairMatchStats(frame_a, frame_b, n_matches, 0, 0.0, float("inf"),
                          None, False, reason)


def _sample_ok(pts: np.ndarray) -> bool:
    # no 3 of the 4 points collinear (area > 1e-9)
    for i, j, k in ((0, 1, 2), (0, 1, 3), (0, 2, 3), (1, 2, 3)):
        ab = pts[j] - pts[i]
        ac = pts[k] - pts[i]
        if abs(ab[0] * ac[1] - ab[1] * ac[0]) / 2.0 <= 1e-9:
            return False
    return True


def ransac_homography(matches: list[Match], fa: FeatureSet, fb: FeatureSet,
                      params: RansacParams,
                      frame_a: int | None = None,
                      frame_b: int | None = None) -> PairMatchStats:
    """Robust homography fit over matched keypoints.

    Largest-consensus model over adaptively-bounded 4-point samples (ties by
    lower mean inlier error), refit on the full inlier set, with acceptance
    thresholds applied to the refit model.
    """
    frame_a = fa.frame_index if frame_a is None else frame_a
    frame_b = fb.frame_index if frame_b is None else frame_b
    n = len(matches)
    if n < params.min_matches:
        return _reject(frame_a, frame_b, n, RejectReason.TOO_FEW_MATCHES)

    src, dst = match_arrays(matches, fa, fb)
    rng = np.random.Generator(np.random.PCG64(
        pair_seed(params.seed, frame_a, frame_b)))

    best_count = 0
    best_mean = float("inf")
    best_inliers = None
    best_h = None
    bound = params.max_iterations
    it = 0
    while it < bound:
        it += 1
        idx = rng.choice(n, size=4, replace=False)
        s4, d4 = src[idx], dst[idx]
        if not (_sample_ok(s4) and _sample_ok(d4)):
            continue
        try:
            h = dlt_homography(s4, d4)
        except (DegenerateConfiguration, NumericalFailure):
            continue
        err = reprojection_errors(h, src, dst)
        inl = err < params.ransac_threshold
        count = int(inl.sum())
        if count == 0:
            continue
        mean = float(err[inl].mean())
        if count > best_count or (count == best_count and mean < best_mean):
            best_count, best_mean, best_inliers, best_h = count, mean, inl, h
            w = count / n
            if w >= 1.0:
                break
            denom = math.log1p(-w ** 4)
            if denom < 0:
                need = math.log(1.0 - params.confidence) / denom
                bound = min(params.max_iterations, math.ceil(need))

    if best_h is None or best_count < 4:
        return _reject(frame_a, frame_b, n, RejectReason.DEGENERATE_MODEL)

    # refit on the full consensus set; fall back to the sample model on failure
    try:
        final_h = dlt_homography(src[best_inliers], dst[best_inliers])
    except (DegenerateConfiguration, NumericalFailure):
        final_h = best_h
    final_err = reprojection_errors(final_h, src, dst)[best_inliers]
    mean_err = float(final_err.mean())
    ratio = best_count / n

    if ratio < params.min_inlier_ratio:
        reason, accepted = RejectReason.LOW_INLIER_RATIO, False
    elif mean_err > params.max_reproj_error:
        reason, accepted = RejectReason.HIGH_REPROJ_ERROR, False
    else:
        reason, accepted = RejectReason.NONE, True
    return PairMatchStats(frame_a, frame_b, n, best_count, ratio, mean_err,
                          final_h, accepted, reason)


def evaluate_pair(fa: FeatureSet, fb: FeatureSet,
                  params: RansacParams) -> PairMatchStats:
    """Match descriptors then robust-fit; the full per-pair pipeline."""
    matches = match_descriptors(fa, fb)
    return ransac_homography(matches, fa, fb, params)
