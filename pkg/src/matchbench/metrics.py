"""Frame-matching stability metrics and classic image-quality scores.

Two sequence-level metrics quantify how far features keep matching as the
camera moves: per-subject matching statistics over the next n frames
(local matching stability) and the furthest forward offset whose pair is
still accepted (furthest matchable frame, scanned sequentially and stopped
at the first rejection). PSNR and SSIM validate enhancement output against
the original frames.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass

import numpy as np
from scipy.ndimage import correlate1d

from .errors import DimensionMismatch, LengthMismatch
from .frames import Frame, to_grayscale
from .orb import FeatureSet
from .ransac import PairMatchStats, RansacParams, evaluate_pair
from ._parallel import get_ctx, pmap


@dataclass(frozen=True)
class OffsetStats:
    offset: int
    n_inliers: int
    inlier_ratio: float
    mean_reproj_error: float
    accepted: bool


@dataclass(frozen=True)
class StabilityProfile:
    subject_frame: int
    per_offset: list  # OffsetStats, offsets contiguous from 1


@dataclass(frozen=True)
class OffsetAggregate:
    offset: int
    mean_inliers: float
    mean_inlier_ratio: float
    mean_reproj_error: float
    n_pairs: int


@dataclass(frozen=True)
class FmfRecord:
    subject_frame: int
    fmf: int
    capped: bool


@dataclass(frozen=True)
class QualityScores:
    frame: int
    psnr: float  # dB; math.inf for identical frames
    ssim: float


def _subject_profile(args) -> StabilityProfile:
    subject, n, params = args
    features = get_ctx()
    stats = []
    for k in range(1, n + 1):
        if subject + k >= len(features):
            break
        s = evaluate_pair(features[subject], features[subject + k], params)
        stats.append(OffsetStats(k, s.n_inliers, s.inlier_ratio,
                                 s.mean_reproj_error, s.accepted))
    return StabilityProfile(subject, stats)


def local_stability(features: list[FeatureSet], n: int, params: RansacParams,
                    workers: int = 1):
    """Per-subject matching statistics against the next ``n`` frames, plus the
    aggregate decay curve (means per offset over all subject frames)."""
    if n < 1 or len(features) < 2:
        raise LengthMismatch(f"need n >= 1 and >= 2 frames, got n={n}, "
                             f"{len(features)} frames")
    jobs = [(f, n, params) for f in range(len(features) - 1)]
    profiles = pmap(_subject_profile, jobs, workers, ctx=features)
    return profiles, aggregate_decay(profiles, n)


def aggregate_decay(profiles: list[StabilityProfile], n: int) -> list[OffsetAggregate]:
    out = []
    for k in range(1, n + 1):
        rows = [o for p in profiles for o in p.per_offset if o.offset == k]
        if not rows:
            break
        finite_err = [o.mean_reproj_error for o in rows
                      if math.isfinite(o.mean_reproj_error)]
        out.append(OffsetAggregate(
            k,
            float(np.mean([o.n_inliers for o in rows])),
            float(np.mean([o.inlier_ratio for o in rows])),
            float(np.mean(finite_err)) if finite_err else float("inf"),
            len(rows),
        ))
    return out


def _subject_fmf(args) -> FmfRecord:
    subject, params, horizon = args
    features = get_ctx()
    fmf = 0
    capped = False
    for k in range(1, horizon + 1):
        if subject + k >= len(features):
            break
        s = evaluate_pair(features[subject], features[subject + k], params)
        if not s.accepted:
            break
        fmf = k
        if k == horizon:
            capped = True
    return FmfRecord(subject, fmf, capped)


def furthest_matchable(features: list[FeatureSet], params: RansacParams,
                       horizon: int = 200, workers: int = 1):
    """Furthest matchable frame per subject (contiguous-prefix rule: scan
    offsets 1, 2, ... and stop at the first rejected pair) and the average
    over all subjects. Subjects failing at offset 1 count as 0."""
    if horizon < 1 or len(features) < 2:
        raise LengthMismatch(f"need horizon >= 1 and >= 2 frames")
    jobs = [(f, params, horizon) for f in range(len(features) - 1)]
    records = pmap(_subject_fmf, jobs, workers, ctx=features)
    average = float(np.mean([r.fmf for r in records]))
    return records, average


def cumulative_distance_distribution(records: list[FmfRecord],
                                     max_offset: int | None = None):
    """Cumulative accepted-pair count by offset: point at offset d is the
    number of accepted (subject, offset <= d) pairs over the whole video."""
    if max_offset is None:
        max_offset = max((r.fmf for r in records), default=0) + 1
    fmfs = np.array([r.fmf for r in records], dtype=np.int64)
    return [(d, int(np.minimum(fmfs, d).sum())) for d in range(1, max_offset + 1)]


# --- classic quality metrics ---

_SSIM_SIGMA = 1.5
_SSIM_WIN = 11
_SSIM_K1, _SSIM_K2, _SSIM_L = 0.01, 0.03, 255.0


def _check_dims(a: Frame, b: Frame) -> None:
    if (a.width, a.height, a.channels) != (b.width, b.height, b.channels):
        raise DimensionMismatch(
            f"{a.width}x{a.height}x{a.channels} vs {b.width}x{b.height}x{b.channels}")


def psnr(a: Frame, b: Frame) -> float:
    """Peak signal-to-noise ratio in dB over all samples; inf when identical."""
    _check_dims(a, b)
    diff = a.data.astype(np.float64) - b.data.astype(np.float64)
    mse = float((diff * diff).mean())
    if mse == 0.0:
        return math.inf
    return 10.0 * math.log10(255.0 ** 2 / mse)


@functools.lru_cache(maxsize=1)
def _ssim_kernel() -> np.ndarray:
    r = _SSIM_WIN // 2
    x = np.arange(-r, r + 1, dtype=np.float64)
    k = np.exp(-(x ** 2) / (2.0 * _SSIM_SIGMA ** 2))
    return k / k.sum()


def _ssim_filter(a: np.ndarray) -> np.ndarray:
    k = _ssim_kernel()
    r = _SSIM_WIN // 2
    out = correlate1d(correlate1d(a, k, axis=0, mode="constant"),
                      k, axis=1, mode="constant")
    return out[r:-r, r:-r]  # valid window positions only


def ssim(a: Frame, b: Frame) -> float:
    """Mean structural similarity on luma, 11x11 Gaussian window sigma=1.5."""
    _check_dims(a, b)
    x = to_grayscale(a).data.astype(np.float64)
    y = to_grayscale(b).data.astype(np.float64)
    if min(x.shape) < _SSIM_WIN:
        raise DimensionMismatch(f"image smaller than the {_SSIM_WIN}px SSIM window")

    c1 = (_SSIM_K1 * _SSIM_L) ** 2
    c2 = (_SSIM_K2 * _SSIM_L) ** 2
    mx = _ssim_filter(x)
    my = _ssim_filter(y)
    vx = _ssim_filter(x * x) - mx * mx
    vy = _ssim_filter(y * y) - my * my
    cov = _ssim_filter(x * y) - mx * my
    num = (2.0 * mx * my + c1) * (2.0 * cov + c2)
    den = (mx * mx + my * my + c1) * (vx + vy + c2)
    return float((num / den).mean())


@dataclass(frozen=True)
class SequenceQuality:
    scores: list  # QualityScores per frame
    mean_psnr: float  # over frames with finite PSNR
    mean_ssim: float
    n_inf_psnr: int


def sequence_quality(orig, enh) -> SequenceQuality:
    """Per-frame PSNR/SSIM of an enhanced sequence against the original."""
    if len(orig) != len(enh):
        raise LengthMismatch(f"{len(orig)} vs {len(enh)} frames")
    scores = []
    for fo, fe in zip(orig, enh):
        scores.append(QualityScores(fo.index, psnr(fo, fe), ssim(fo, fe)))
    finite = [s.psnr for s in scores if math.isfinite(s.psnr)]
    mean_psnr = float(np.mean(finite)) if finite else math.inf
    mean_ssim = float(np.mean([s.ssim for s in scores]))
    return SequenceQuality(scores, mean_psnr, mean_ssim,
                           len(scores) - len(finite))
