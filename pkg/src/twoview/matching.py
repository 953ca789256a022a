"""Keypoint budgeting and match production.

Budget order is NMS first, then top-k, so the keypoint budget is spent on
spatially spread detections. All threshold comparisons are inclusive (>=).
"""

from __future__ import annotations

import math
from typing import List, Sequence, Tuple

import numpy as np

from .core import Channel, Correspondence, FeatureSet, Keypoint, MatchSet
from .errors import ChannelMismatchError, DimMismatchError


def rescale_to_working(original_size: Tuple[int, int], working_max_dim: int) -> Tuple[Tuple[int, int], float]:
    """Working-resolution size and scale factor; never upscales."""
    w, h = original_size
    if w <= 0 or h <= 0 or working_max_dim <= 0:
        raise ValueError("sizes must be positive")
    longest = max(w, h)
    if longest <= working_max_dim:
        return (w, h), 1.0
    scale = working_max_dim / longest
    if w >= h:
        working = (working_max_dim, int(round(h * scale)))
    else:
        working = (int(round(w * scale)), working_max_dim)
    return working, scale


def radius_nms(keypoints: Sequence[Keypoint], radius: float) -> List[Keypoint]:
    """Greedy suppression in (score desc, index asc) order.

    A keypoint survives iff no already-kept keypoint lies within Euclidean
    distance <= radius.
    """
    if radius < 0:
        raise ValueError("radius must be >= 0")
    order = sorted(range(len(keypoints)), key=lambda i: (-keypoints[i].score, keypoints[i].index))
    kept: List[Keypoint] = []
    kept_xy = np.empty((len(keypoints), 2))
    r2 = radius * radius
    for i in order:
        kp = keypoints[i]
        if kept:
            d2 = kept_xy[: len(kept), 0] - kp.x
            d2 = d2 * d2 + (kept_xy[: len(kept), 1] - kp.y) ** 2
            if np.any(d2 <= r2):
                continue
        kept_xy[len(kept)] = (kp.x, kp.y)
        kept.append(kp)
    kept.sort(key=lambda k: k.index)
    return kept


def top_k(keypoints: Sequence[Keypoint], k: int) -> List[Keypoint]:
    """The k highest-score keypoints (ties by ascending index), score-descending."""
    if k < 0:
        raise ValueError("k must be >= 0")
    order = sorted(keypoints, key=lambda kp: (-kp.score, kp.index))
    return order[:k]


def budget_keypoints(fs: FeatureSet, nms_radius: float, max_keypoints: int) -> FeatureSet:
    """Apply NMS then top-k to a FeatureSet, keeping descriptors aligned."""
    kept = top_k(radius_nms(fs.keypoints, nms_radius), max_keypoints)
    rows = [kp.index for kp in kept]
    keypoints = tuple(
        Keypoint(kp.x, kp.y, kp.score, i) for i, kp in enumerate(kept)
    )
    descriptors = fs.descriptors[rows] if rows else fs.descriptors[:0]
    return FeatureSet(
        image_id=fs.image_id,
        channel=fs.channel,
        scale_factor=fs.scale_factor,
        original_size=fs.original_size,
        working_size=fs.working_size,
        keypoints=keypoints,
        descriptors=descriptors,
        weights_variant=fs.weights_variant,
    )


def filter_matches_by_score(ms: MatchSet, sp_min: float, disk_min: float) -> MatchSet:
    """Keep correspondences whose confidence >= their channel's threshold."""
    for t in (sp_min, disk_min):
        if not (0.0 <= t <= 1.0):
            raise ValueError("thresholds must be in [0,1]")
    kept = tuple(
        c
        for c in ms.correspondences
        if c.confidence >= (sp_min if c.channel is Channel.SP else disk_min)
    )
    return ms.with_correspondences(kept)


def mutual_nn_match(
    set_a: FeatureSet,
    set_b: FeatureSet,
    min_score: float,
    pair_id: str | None = None,
    scale_tag: float = 1.0,
) -> MatchSet:
    """Mutual nearest neighbors by cosine similarity.

    The cosine score s is mapped to (s+1)/2 so it is comparable with the
    [0,1] matcher confidences; matches below min_score are dropped.
    Output coordinates are in original image coordinates.
    """
    if set_a.channel is not set_b.channel:
        raise ChannelMismatchError(f"{set_a.channel} vs {set_b.channel}")
    if set_a.descriptor_dim != set_b.descriptor_dim:
        raise DimMismatchError(f"{set_a.descriptor_dim} vs {set_b.descriptor_dim}")
    pid = pair_id if pair_id is not None else f"{set_a.image_id}|{set_b.image_id}"
    if not set_a.keypoints or not set_b.keypoints:
        return MatchSet(pair_id=pid, image_a=set_a.image_id, image_b=set_b.image_id)
    sim = set_a.descriptors.astype(np.float64) @ set_b.descriptors.astype(np.float64).T
    nn12 = np.argmax(sim, axis=1)
    nn21 = np.argmax(sim, axis=0)
    ids = np.arange(sim.shape[0])
    mutual = nn21[nn12] == ids
    corrs = []
    for i in ids[mutual]:
        j = nn12[i]
        score = (sim[i, j] + 1.0) / 2.0
        score = min(max(score, 0.0), 1.0)
        if score < min_score:
            continue
        ka = set_a.keypoints[i]
        kb = set_b.keypoints[j]
        corrs.append(
            Correspondence(
                a=(ka.x / set_a.scale_factor, ka.y / set_a.scale_factor),
                b=(kb.x / set_b.scale_factor, kb.y / set_b.scale_factor),
                confidence=score,
                channel=set_a.channel,
                scale_tag=scale_tag,
            )
        )
    return MatchSet(
        pair_id=pid,
        image_a=set_a.image_id,
        image_b=set_b.image_id,
        correspondences=tuple(corrs),
    )
