"""Channel/scale fusion, spatial dedup, and the match-count discard filter.

Two correspondences are duplicates when both endpoints (image A and B, in
original coordinates) are within dedup_tolerance of each other. Dedup is
greedy over a deterministic priority order, bucketed on a spatial grid of
cell size dedup_tolerance, so it is near-linear and order-insensitive.
"""

from __future__ import annotations

import math
from typing import Dict, List, Sequence, Tuple

from .core import Correspondence, MatchSet
from .errors import PairIdMismatchError

DEFAULT_DEDUP_TOLERANCE = 2.0


def _priority(c: Correspondence):
    # Survivor preference: higher confidence, SP before DISK, lower scale_tag.
    # The coordinate tail makes the order independent of input position.
    return (-c.confidence, c.channel.value, c.scale_tag, c.a, c.b)


def dedup_correspondences(
    corrs: Sequence[Correspondence], tolerance: float = DEFAULT_DEDUP_TOLERANCE
) -> Tuple[Correspondence, ...]:
    if tolerance < 0:
        raise ValueError("tolerance must be >= 0")
    ordered = sorted(corrs, key=_priority)
    if tolerance == 0:
        seen = set()
        kept = []
        for c in ordered:
            key = (c.a, c.b)
            if key not in seen:
                seen.add(key)
                kept.append(c)
        return tuple(kept)
    cell = tolerance
    grid: Dict[Tuple[int, int], List[Correspondence]] = {}
    kept = []
    tol2 = tolerance * tolerance
    for c in ordered:
        cx = math.floor(c.a[0] / cell)
        cy = math.floor(c.a[1] / cell)
        duplicate = False
        for gx in (cx - 1, cx, cx + 1):
            for gy in (cy - 1, cy, cy + 1):
                for k in grid.get((gx, gy), ()):
                    da = (k.a[0] - c.a[0]) ** 2 + (k.a[1] - c.a[1]) ** 2
                    db = (k.b[0] - c.b[0]) ** 2 + (k.b[1] - c.b[1]) ** 2
                    if da <= tol2 and db <= tol2:
                        duplicate = True
                        break
                if duplicate:
                    break
            if duplicate:
                break
        if not duplicate:
            grid.setdefault((cx, cy), []).append(c)
            kept.append(c)
    return tuple(kept)


def _check_same_pair(sets: Sequence[MatchSet]) -> None:
    ids = {s.pair_id for s in sets}
    if len(ids) > 1:
        raise PairIdMismatchError(f"mixed pair ids: {sorted(ids)}")


def fuse_channels(
    sets: Sequence[MatchSet], dedup_tolerance: float = DEFAULT_DEDUP_TOLERANCE
) -> MatchSet:
    """Union all per-channel sets of one pair, then dedup."""
    if not sets:
        raise ValueError("need at least one MatchSet")
    _check_same_pair(sets)
    pooled: List[Correspondence] = []
    for s in sets:
        pooled.extend(s.correspondences)
    return sets[0].with_correspondences(dedup_correspondences(pooled, dedup_tolerance))


def merge_scales(
    per_scale: Sequence[Tuple[float, MatchSet]],
    dedup_tolerance: float = DEFAULT_DEDUP_TOLERANCE,
) -> MatchSet:
    """Union per-scale sets (already in original coordinates), then dedup."""
    if not per_scale:
        raise ValueError("need at least one (scale, MatchSet) entry")
    return fuse_channels([s for _, s in per_scale], dedup_tolerance)


def apply_discard_threshold(ms: MatchSet, discard_num: int) -> MatchSet:
    """All-or-nothing prefilter: below the threshold the pair reports nothing."""
    if discard_num < 0:
        raise ValueError("discard_num must be >= 0")
    if len(ms) < discard_num:
        return ms.with_correspondences(())
    return ms
