"""Shared fixture builders: synthetic pairs serialized to MFK1/MMT1 + manifest."""

import numpy as np

from twoview.core import Channel, Correspondence, FeatureSet, Keypoint, MatchSet
from twoview.fileio import write_feature_file, write_match_file
from twoview.synthetic import random_scene


def unit_rows(rng, n, d=16):
    m = rng.normal(size=(n, d))
    m = m / np.linalg.norm(m, axis=1, keepdims=True)
    m = m.astype(np.float32)
    # renormalize at f32 so the file-format unit-norm invariant holds exactly
    return m / np.linalg.norm(m.astype(np.float64), axis=1, keepdims=True).astype(np.float32)


def scene_match_set(seed, pair_id, n_inliers=40, n_outliers=0, noise=0.0, confidence=0.9):
    scene = random_scene(seed, n_inliers=n_inliers, n_outliers=n_outliers, noise=noise)
    corrs = tuple(
        Correspondence(
            (float(np.float32(x1)), float(np.float32(y1))),
            (float(np.float32(x2)), float(np.float32(y2))),
            confidence,
            Channel.SP,
            1.0,
        )
        for (x1, y1), (x2, y2) in zip(scene.pa, scene.pb)
    )
    return MatchSet(pair_id=pair_id, image_a=f"{pair_id}_a", image_b=f"{pair_id}_b", correspondences=corrs)


def random_match_set(seed, pair_id, count, confidence=0.9):
    """Geometry-free correspondences, as a non-matching pair would produce."""
    rng = np.random.default_rng(seed)
    pts = np.float32(rng.uniform(0, 1600, size=(count, 4)))
    corrs = tuple(
        Correspondence(
            (float(x1), float(y1)), (float(x2), float(y2)), confidence, Channel.SP, 1.0
        )
        for x1, y1, x2, y2 in pts
    )
    return MatchSet(pair_id=pair_id, image_a=f"{pair_id}_a", image_b=f"{pair_id}_b", correspondences=corrs)


def paired_feature_files(tmp_path, seed, stem, n=30, channel=Channel.SP):
    """Two MFK1 files whose i-th keypoints correspond under a real geometry."""
    scene = random_scene(seed, n_inliers=n)
    rng = np.random.default_rng(seed + 1000)
    desc = unit_rows(rng, n)
    paths = []
    for side, pts in (("a", scene.pa), ("b", scene.pb)):
        pts32 = np.float32(pts)
        fs = FeatureSet(
            image_id=f"{stem}_{side}",
            channel=channel,
            scale_factor=1.0,
            original_size=(1600, 1200),
            working_size=(1600, 1200),
            keypoints=tuple(
                Keypoint(float(p[0]), float(p[1]), 0.9, i) for i, p in enumerate(pts32)
            ),
            descriptors=desc,
        )
        path = tmp_path / f"{stem}_{side}.mfk1"
        write_feature_file(fs, path)
        paths.append(path)
    return paths[0], paths[1], scene


def build_manifest(tmp_path, entries):
    """entries: list of (pair_id, label, match_set | (sp_a, sp_b) path tuple)."""
    lines = []
    for pair_id, label, payload in entries:
        if isinstance(payload, MatchSet):
            mpath = tmp_path / f"{pair_id}.mmt1"
            write_match_file(payload, mpath)
            lines.append(
                f"{pair_id}\t{payload.image_a}\t{payload.image_b}\t{label}\tsp_matches={mpath.name}"
            )
        else:
            pa, pb = payload
            lines.append(
                f"{pair_id}\tia\tib\t{label}\tsp_a={pa.name}\tsp_b={pb.name}"
            )
    manifest = tmp_path / "pairs.tsv"
    manifest.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return manifest
