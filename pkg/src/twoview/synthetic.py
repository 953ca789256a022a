"""Synthetic two-view scenes with known epipolar geometry.

Used by the demo scripts and as the independent oracle in tests: scenes are
generated from explicit camera matrices, so the ground-truth fundamental
matrix and the inlier/outlier labels are known by construction. Noise, when
requested, is added to the image-B projections only, so its per-coordinate
sigma is the correspondence noise level.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from .core import Channel, Correspondence, MatchSet, canonicalize_matrix

IMAGE_SIZE = (1600, 1200)


def _camera_pair(rng: np.random.Generator) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Intrinsics + a randomized second-camera pose with a solid baseline."""
    k = np.array([[1000.0, 0.0, 800.0], [0.0, 1000.0, 600.0], [0.0, 0.0, 1.0]])
    angles = rng.uniform(-0.12, 0.12, size=3)
    rx, ry, rz = angles
    cr = np.array(
        [[1, 0, 0], [0, np.cos(rx), -np.sin(rx)], [0, np.sin(rx), np.cos(rx)]]
    )
    cp = np.array(
        [[np.cos(ry), 0, np.sin(ry)], [0, 1, 0], [-np.sin(ry), 0, np.cos(ry)]]
    )
    cy = np.array(
        [[np.cos(rz), -np.sin(rz), 0], [np.sin(rz), np.cos(rz), 0], [0, 0, 1]]
    )
    r = cr @ cp @ cy
    t = np.array([rng.uniform(0.8, 1.6), rng.uniform(-0.3, 0.3), rng.uniform(-0.2, 0.2)])
    return k, r, t


def _fundamental_from_pose(k: np.ndarray, r: np.ndarray, t: np.ndarray) -> np.ndarray:
    tx = np.array([[0, -t[2], t[1]], [t[2], 0, -t[0]], [-t[1], t[0], 0]])
    kinv = np.linalg.inv(k)
    return canonicalize_matrix(kinv.T @ tx @ r @ kinv)


def _project(k: np.ndarray, r: np.ndarray, t: np.ndarray, pts3d: np.ndarray, second: bool) -> np.ndarray:
    cam = (pts3d @ r.T + t) if second else pts3d
    uv = cam @ k.T
    return uv[:, :2] / uv[:, 2:3]


def _in_bounds(p: np.ndarray) -> np.ndarray:
    w, h = IMAGE_SIZE
    return (p[:, 0] >= 0) & (p[:, 0] < w) & (p[:, 1] >= 0) & (p[:, 1] < h)


@dataclass
class Scene:
    pa: np.ndarray  # (n, 2) image-A points
    pb: np.ndarray  # (n, 2) image-B points
    labels: np.ndarray  # bool, True = true correspondence
    f_true: np.ndarray
    on_plane: Optional[np.ndarray] = None  # bool over true correspondences


def _generate_points(
    rng: np.random.Generator,
    k: np.ndarray,
    r: np.ndarray,
    t: np.ndarray,
    n: int,
    sampler,
) -> Tuple[np.ndarray, np.ndarray]:
    """Draw 3D points from `sampler` until n project inside both images."""
    pa_acc, pb_acc = [], []
    while sum(len(p) for p in pa_acc) < n:
        pts3d = sampler(rng, max(4 * n, 64))
        pa = _project(k, r, t, pts3d, second=False)
        pb = _project(k, r, t, pts3d, second=True)
        ok = _in_bounds(pa) & _in_bounds(pb)
        pa_acc.append(pa[ok])
        pb_acc.append(pb[ok])
    pa = np.concatenate(pa_acc)[:n]
    pb = np.concatenate(pb_acc)[:n]
    return pa, pb


def _box_sampler(rng: np.random.Generator, m: int) -> np.ndarray:
    return np.column_stack(
        [rng.uniform(-3, 4, m), rng.uniform(-2.5, 3, m), rng.uniform(4, 9, m)]
    )


def random_scene(
    seed: int,
    n_inliers: int = 100,
    n_outliers: int = 0,
    noise: float = 0.0,
) -> Scene:
    """Generic 3D cloud; optional uniform outliers and image-B noise."""
    rng = np.random.default_rng(seed)
    k, r, t = _camera_pair(rng)
    pa, pb = _generate_points(rng, k, r, t, n_inliers, _box_sampler)
    if noise > 0:
        pb = pb + rng.normal(0.0, noise, pb.shape)
    labels = np.ones(n_inliers, dtype=bool)
    if n_outliers:
        w, h = IMAGE_SIZE
        oa = np.column_stack([rng.uniform(0, w, n_outliers), rng.uniform(0, h, n_outliers)])
        ob = np.column_stack([rng.uniform(0, w, n_outliers), rng.uniform(0, h, n_outliers)])
        pa = np.vstack([pa, oa])
        pb = np.vstack([pb, ob])
        labels = np.concatenate([labels, np.zeros(n_outliers, dtype=bool)])
    perm = rng.permutation(len(pa))
    return Scene(pa=pa[perm], pb=pb[perm], labels=labels[perm], f_true=_fundamental_from_pose(k, r, t))


def dominant_plane_scene(
    seed: int,
    n_plane: int = 170,
    n_off: int = 10,
    n_outliers: int = 20,
    n_heldout: int = 30,
    noise: float = 0.5,
    clustered_off_plane: bool = True,
    cluster_half: float = 0.5,
    depth_offset: float = 2.0,
) -> Tuple[Scene, np.ndarray, np.ndarray]:
    """Scene dominated by one world plane.

    Off-plane structure is a compact foreground cluster by default (the
    hard case for plain RANSAC: few, spatially concentrated parallax
    points), placed `depth_offset` in front of the plane with side length
    2 * cluster_half. Returns (scene, heldout_pa, heldout_pb): the
    held-out points are extra noiseless off-plane true correspondences
    for evaluating model quality.
    """
    rng = np.random.default_rng(seed)
    k, r, t = _camera_pair(rng)
    normal = np.array([rng.uniform(-0.25, 0.25), rng.uniform(-0.25, 0.25), 1.0])
    d0 = rng.uniform(5.0, 7.0)

    def plane_sampler(rg, m):
        xy = np.column_stack([rg.uniform(-3, 4, m), rg.uniform(-2.5, 3, m)])
        z = d0 - xy @ normal[:2]
        return np.column_stack([xy, z])

    if clustered_off_plane:
        # Foreground cluster; re-draw the center until it is visible in both views.
        margin = 120.0
        w, h = IMAGE_SIZE
        while True:
            cx = rng.uniform(-1.0, 1.5)
            cy = rng.uniform(-0.8, 1.2)
            cz = d0 - np.array([cx, cy]) @ normal[:2] - depth_offset
            center = np.array([cx, cy, cz])
            ca = _project(k, r, t, center[None, :], second=False)
            cb = _project(k, r, t, center[None, :], second=True)
            if all(
                margin <= p[0, 0] < w - margin and margin <= p[0, 1] < h - margin
                for p in (ca, cb)
            ):
                break

        def off_sampler(rg, m):
            return center + rg.uniform(-cluster_half, cluster_half, size=(m, 3))

    else:
        off_sampler = _box_sampler

    pa_pl, pb_pl = _generate_points(rng, k, r, t, n_plane, plane_sampler)
    pa_off, pb_off = _generate_points(rng, k, r, t, n_off + n_heldout, off_sampler)
    held_a, held_b = pa_off[n_off:], pb_off[n_off:]
    pa = np.vstack([pa_pl, pa_off[:n_off]])
    pb = np.vstack([pb_pl, pb_off[:n_off]])
    if noise > 0:
        pb = pb + rng.normal(0.0, noise, pb.shape)
    labels = np.ones(len(pa), dtype=bool)
    on_plane = np.concatenate([np.ones(n_plane, dtype=bool), np.zeros(n_off, dtype=bool)])
    if n_outliers:
        w, h = IMAGE_SIZE
        oa = np.column_stack([rng.uniform(0, w, n_outliers), rng.uniform(0, h, n_outliers)])
        ob = np.column_stack([rng.uniform(0, w, n_outliers), rng.uniform(0, h, n_outliers)])
        pa = np.vstack([pa, oa])
        pb = np.vstack([pb, ob])
        labels = np.concatenate([labels, np.zeros(n_outliers, dtype=bool)])
        on_plane = np.concatenate([on_plane, np.zeros(n_outliers, dtype=bool)])
    perm = rng.permutation(len(pa))
    scene = Scene(
        pa=pa[perm],
        pb=pb[perm],
        labels=labels[perm],
        f_true=_fundamental_from_pose(k, r, t),
        on_plane=on_plane[perm],
    )
    return scene, held_a, held_b


def scene_to_match_set(
    scene: Scene,
    pair_id: str,
    channel: Channel = Channel.SP,
    confidence: float = 0.9,
    scale_tag: float = 1.0,
    image_a: str = "a",
    image_b: str = "b",
) -> MatchSet:
    corrs = tuple(
        Correspondence(
            a=(float(x1), float(y1)),
            b=(float(x2), float(y2)),
            confidence=confidence,
            channel=channel,
            scale_tag=scale_tag,
        )
        for (x1, y1), (x2, y2) in zip(scene.pa, scene.pb)
    )
    return MatchSet(pair_id=pair_id, image_a=image_a, image_b=image_b, correspondences=corrs)


def minimal_sample(seed: int) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """A generic noiseless 7-point sample and its ground-truth F."""
    scene = random_scene(seed, n_inliers=7)
    return scene.pa, scene.pb, scene.f_true
