"""Shared domain types for the two-view matching pipeline.

All types are plain immutable data; construction is cheap and validation is
a separate explicit pass so that file readers can decide when to pay for it.
Coordinates in a :class:`Correspondence` are always in ORIGINAL image
coordinates so that channels and scales fuse in one common frame.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Optional, Sequence, Tuple

import numpy as np

from .errors import InvalidDataError

DEFAULT_SCALE_SET = (1.0, 1.0 / math.sqrt(2.0), 0.5)


class Channel(Enum):
    SP = 0
    DISK = 1


class WeightsVariant(Enum):
    OUTDOOR = 0
    INDOOR = 1


class PairLabel(Enum):
    MATCHING = "MATCH"
    NON_MATCHING = "NONMATCH"
    UNKNOWN = "UNKNOWN"


class Status(Enum):
    VERIFIED = "VERIFIED"
    DISCARDED_PREFILTER = "DISCARDED_PREFILTER"
    TOO_FEW_MATCHES = "TOO_FEW_MATCHES"
    NO_MODEL = "NO_MODEL"
    DEGENERATE_PLANE = "DEGENERATE_PLANE"


@dataclass(frozen=True)
class Keypoint:
    """A detection in working-image coordinates (f32 precision)."""

    x: float
    y: float
    score: float
    index: int


@dataclass
class FeatureSet:
    """Keypoints + descriptors of one image, one channel, one scale."""

    image_id: str
    channel: Channel
    scale_factor: float
    original_size: Tuple[int, int]
    working_size: Tuple[int, int]
    keypoints: Tuple[Keypoint, ...]
    descriptors: np.ndarray  # (n, d) float32, unit rows
    weights_variant: WeightsVariant = WeightsVariant.OUTDOOR

    def __post_init__(self):
        self.keypoints = tuple(self.keypoints)
        self.descriptors = np.asarray(self.descriptors, dtype=np.float32)

    @property
    def descriptor_dim(self) -> int:
        return int(self.descriptors.shape[1]) if self.descriptors.ndim == 2 else 0

    @property
    def xy(self) -> np.ndarray:
        """(n, 2) float64 array of working coordinates."""
        if not self.keypoints:
            return np.zeros((0, 2))
        return np.array([(k.x, k.y) for k in self.keypoints], dtype=np.float64)

    @property
    def scores(self) -> np.ndarray:
        return np.array([k.score for k in self.keypoints], dtype=np.float64)

    def __eq__(self, other):
        if not isinstance(other, FeatureSet):
            return NotImplemented
        return (
            self.image_id == other.image_id
            and self.channel == other.channel
            and self.scale_factor == other.scale_factor
            and self.original_size == other.original_size
            and self.working_size == other.working_size
            and self.keypoints == other.keypoints
            and self.weights_variant == other.weights_variant
            and self.descriptors.shape == other.descriptors.shape
            and np.array_equal(self.descriptors, other.descriptors)
        )


@dataclass(frozen=True)
class Correspondence:
    """One candidate match, endpoints in original image coordinates."""

    a: Tuple[float, float]
    b: Tuple[float, float]
    confidence: float
    channel: Channel
    scale_tag: float


@dataclass(frozen=True)
class MatchSet:
    pair_id: str
    image_a: str
    image_b: str
    correspondences: Tuple[Correspondence, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "correspondences", tuple(self.correspondences))

    def __len__(self) -> int:
        return len(self.correspondences)

    def with_correspondences(self, corrs: Sequence[Correspondence]) -> "MatchSet":
        return replace(self, correspondences=tuple(corrs))

    def points(self) -> Tuple[np.ndarray, np.ndarray]:
        """(m, 2) endpoint arrays for image A and image B."""
        if not self.correspondences:
            return np.zeros((0, 2)), np.zeros((0, 2))
        pa = np.array([c.a for c in self.correspondences], dtype=np.float64)
        pb = np.array([c.b for c in self.correspondences], dtype=np.float64)
        return pa, pb


@dataclass(frozen=True)
class PipelineConfig:
    """One full parameterization of the pipeline (one submission row)."""

    sp_max_keypoints: int = 4096
    disk_max_keypoints: int = 6000
    sp_nms_radius: float = 4.0
    disk_nms_radius: float = 4.0
    sp_match_score: float = 0.2
    disk_match_score: float = 0.7
    working_max_dim: int = 1600
    multi_scale_sp: bool = False
    multi_scale_disk: bool = False
    scale_set: Tuple[float, ...] = DEFAULT_SCALE_SET
    dedup_tolerance: float = 2.0
    discard_num: int = 8
    degensac_threshold: float = 1.1
    degensac_max_iters: int = 1_000_000
    degensac_confidence: float = 0.9999
    rng_seed: int = 0
    weights_variant: WeightsVariant = WeightsVariant.OUTDOOR

    def max_keypoints(self, channel: Channel) -> int:
        return self.sp_max_keypoints if channel is Channel.SP else self.disk_max_keypoints

    def nms_radius(self, channel: Channel) -> float:
        return self.sp_nms_radius if channel is Channel.SP else self.disk_nms_radius

    def match_score(self, channel: Channel) -> float:
        return self.sp_match_score if channel is Channel.SP else self.disk_match_score

    def multi_scale(self, channel: Channel) -> bool:
        return self.multi_scale_sp if channel is Channel.SP else self.multi_scale_disk


@dataclass(frozen=True)
class VerificationResult:
    pair_id: str
    status: Status
    fundamental: Optional[np.ndarray]  # canonical 3x3 or None
    inlier_mask: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=bool))
    iterations_run: int = 0

    @property
    def inlier_count(self) -> int:
        return int(np.count_nonzero(self.inlier_mask))


def canonicalize_matrix(m: np.ndarray) -> np.ndarray:
    """Scale to Frobenius norm 1 with the largest-magnitude entry positive."""
    m = np.asarray(m, dtype=np.float64)
    norm = np.linalg.norm(m)
    if norm == 0 or not np.isfinite(norm):
        raise InvalidDataError("cannot canonicalize a zero or non-finite matrix")
    m = m / norm
    flat = m.ravel()
    if flat[np.argmax(np.abs(flat))] < 0:
        m = -m
    return m


def validate_fundamental(f: np.ndarray) -> None:
    """Check canonical scale and the rank-2 constraint."""
    f = np.asarray(f, dtype=np.float64)
    if f.shape != (3, 3):
        raise InvalidDataError("fundamental matrix must be 3x3")
    if abs(np.linalg.norm(f) - 1.0) > 1e-9:
        raise InvalidDataError("fundamental matrix not at canonical scale")
    s = np.linalg.svd(f, compute_uv=False)
    if s[2] >= 1e-7 * s[0]:
        raise InvalidDataError("fundamental matrix is not rank 2")


def validate_feature_set(fs: FeatureSet, working_max_dim: Optional[int] = None) -> None:
    """Raise InvalidDataError on any violated FeatureSet invariant."""
    n = len(fs.keypoints)
    if fs.descriptors.ndim != 2 or fs.descriptors.shape[0] != n:
        raise InvalidDataError("descriptor row count != keypoint count")
    ow, oh = fs.original_size
    ww, wh = fs.working_size
    if ow <= 0 or oh <= 0 or ww <= 0 or wh <= 0:
        raise InvalidDataError("image sizes must be positive")
    if not (0.0 < fs.scale_factor <= 1.0) or not math.isfinite(fs.scale_factor):
        raise InvalidDataError("scale_factor out of (0, 1]")
    # Isotropic check; integer rounding of the short side is tolerated.
    for orig, work in ((ow, ww), (oh, wh)):
        ratio = work / orig
        if abs(ratio - fs.scale_factor) > 1e-6 and abs(work - orig * fs.scale_factor) > 0.5:
            raise InvalidDataError("scale_factor inconsistent with image sizes")
    if working_max_dim is not None and max(ww, wh) > working_max_dim:
        raise InvalidDataError("working size exceeds configured maximum")
    for i, kp in enumerate(fs.keypoints):
        if not (math.isfinite(kp.x) and math.isfinite(kp.y) and math.isfinite(kp.score)):
            raise InvalidDataError(f"non-finite keypoint fields at row {i}")
        if not (0.0 <= kp.x < ww and 0.0 <= kp.y < wh):
            raise InvalidDataError(f"keypoint {i} outside working image bounds")
        if kp.score < 0.0:
            raise InvalidDataError(f"negative keypoint score at row {i}")
        if kp.index != i:
            raise InvalidDataError(f"keypoint index {kp.index} != position {i}")
    if n:
        norms = np.linalg.norm(fs.descriptors.astype(np.float64), axis=1)
        if not np.all(np.abs(norms - 1.0) <= 1e-4):
            raise InvalidDataError("descriptor rows are not unit-norm")
        if not np.all(np.isfinite(fs.descriptors)):
            raise InvalidDataError("non-finite descriptor entries")


def validate_match_set(ms: MatchSet) -> None:
    """Raise InvalidDataError on any violated MatchSet invariant."""
    seen = set()
    for i, c in enumerate(ms.correspondences):
        coords = (*c.a, *c.b)
        if not all(math.isfinite(v) for v in coords):
            raise InvalidDataError(f"non-finite coordinates at row {i}")
        if not (math.isfinite(c.confidence) and 0.0 <= c.confidence <= 1.0):
            raise InvalidDataError(f"confidence out of [0,1] at row {i}")
        key = (coords, c.channel, c.scale_tag)
        if key in seen:
            raise InvalidDataError(f"duplicate correspondence at row {i}")
        seen.add(key)


def validate_config(cfg: PipelineConfig) -> None:
    if cfg.degensac_threshold <= 0:
        raise InvalidDataError("degensac_threshold must be positive")
    if cfg.degensac_max_iters < 1:
        raise InvalidDataError("degensac_max_iters must be >= 1")
    if cfg.discard_num < 0:
        raise InvalidDataError("discard_num must be >= 0")
    if not (0.0 < cfg.degensac_confidence < 1.0):
        raise InvalidDataError("degensac_confidence must be in (0,1)")
    if 1.0 not in cfg.scale_set:
        raise InvalidDataError("scale_set must contain 1.0")
    if any(not (0.0 < s <= 1.0) for s in cfg.scale_set):
        raise InvalidDataError("scale_set values must lie in (0,1]")
