"""matchbench: quantify how image enhancement affects video frame matching."""

__version__ = "0.1.0"

from .frames import Frame, FrameSequence, GrayFrame, load_netpbm, save_netpbm, to_grayscale
from .orb import DetectorParams, FeatureSet, Keypoint, OrbDetector, detect_and_describe
from .ransac import PairMatchStats, RansacParams, RejectReason, evaluate_pair
from .metrics import (
    FmfRecord,
    StabilityProfile,
    cumulative_distance_distribution,
    furthest_matchable,
    local_stability,
    psnr,
    sequence_quality,
    ssim,
)
from .synthgen import GroundTruthSequence, MotionSpec, gen_benchmark, gen_sequence, gen_texture

__all__ = [
    "Frame", "FrameSequence", "GrayFrame", "load_netpbm", "save_netpbm",
    "to_grayscale", "DetectorParams", "FeatureSet", "Keypoint", "OrbDetector",
    "detect_and_describe", "PairMatchStats", "RansacParams", "RejectReason",
    "evaluate_pair", "FmfRecord", "StabilityProfile",
    "cumulative_distance_distribution", "furthest_matchable", "local_stability",
    "psnr", "sequence_quality", "ssim", "GroundTruthSequence", "MotionSpec",
    "gen_benchmark", "gen_sequence", "gen_texture",
]
