"""End-to-end per-pair execution: ingest, filter, fuse, verify, record."""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from typing import List, Sequence, Tuple

from .core import (
    Channel,
    MatchSet,
    PipelineConfig,
    Status,
    VerificationResult,
    validate_config,
)
from .evaluate import PairRecord, finalize_pair
from .fileio import PairEntry, PairManifest, read_feature_file, read_match_file
from .fusion import apply_discard_threshold, fuse_channels
from .geometry import degensac
from .matching import budget_keypoints, filter_matches_by_score, mutual_nn_match


def candidate_matches(entry: PairEntry, cfg: PipelineConfig) -> List[MatchSet]:
    """Per-channel raw MatchSets for one pair: ingested files or MNN fallback."""
    sets: List[MatchSet] = []
    for channel in Channel:
        if channel in entry.match_files:
            ms = read_match_file(entry.match_files[channel])
            sets.append(
                MatchSet(
                    pair_id=entry.pair_id,
                    image_a=entry.image_a,
                    image_b=entry.image_b,
                    correspondences=ms.correspondences,
                )
            )
            continue
        sides = entry.feature_files.get(channel)
        if not sides or "a" not in sides or "b" not in sides:
            continue
        for i, (path_a, path_b) in enumerate(zip(sides["a"], sides["b"])):
            fs_a = budget_keypoints(
                read_feature_file(path_a), cfg.nms_radius(channel), cfg.max_keypoints(channel)
            )
            fs_b = budget_keypoints(
                read_feature_file(path_b), cfg.nms_radius(channel), cfg.max_keypoints(channel)
            )
            tag = cfg.scale_set[i] if i < len(cfg.scale_set) else fs_a.scale_factor
            sets.append(
                mutual_nn_match(fs_a, fs_b, 0.0, pair_id=entry.pair_id, scale_tag=tag)
            )
    return sets


def fuse_pair(sets: Sequence[MatchSet], entry_pair_id: str, cfg: PipelineConfig) -> MatchSet:
    """Score-filter, multi-scale-filter, fuse, and discard-filter one pair."""
    filtered: List[MatchSet] = []
    for ms in sets:
        ms = filter_matches_by_score(ms, cfg.sp_match_score, cfg.disk_match_score)
        kept = tuple(
            c
            for c in ms.correspondences
            if cfg.multi_scale(c.channel) or abs(c.scale_tag - 1.0) <= 1e-9
        )
        filtered.append(ms.with_correspondences(kept))
    if not filtered:
        filtered = [MatchSet(pair_id=entry_pair_id, image_a="", image_b="")]
    fused = fuse_channels(filtered, cfg.dedup_tolerance)
    return apply_discard_threshold(fused, cfg.discard_num)


def verify_pair(entry: PairEntry, cfg: PipelineConfig) -> Tuple[VerificationResult, PairRecord]:
    sets = candidate_matches(entry, cfg)
    raw = sum(len(s) for s in sets)
    fused = fuse_pair(sets, entry.pair_id, cfg)
    if cfg.discard_num > 0 and len(fused) == 0 and raw >= 0 and len(fused) < cfg.discard_num:
        # Either genuinely empty or removed by the discard prefilter; both are
        # reported as discarded when a prefilter is configured.
        vr = VerificationResult(
            pair_id=entry.pair_id, status=Status.DISCARDED_PREFILTER, fundamental=None
        )
    else:
        vr = degensac(fused, cfg)
    return vr, finalize_pair(vr, entry.label)


def _verify_entry(args) -> PairRecord:
    entry, cfg = args
    return verify_pair(entry, cfg)[1]


def run_manifest(manifest: PairManifest, cfg: PipelineConfig, jobs: int = 1) -> List[PairRecord]:
    """Process all pairs; record order follows manifest order regardless of jobs."""
    validate_config(cfg)
    work = [(entry, cfg) for entry in manifest.entries]
    if jobs <= 1 or len(work) <= 1:
        return [_verify_entry(w) for w in work]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(_verify_entry, work, chunksize=1))
