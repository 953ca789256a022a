"""The hypothesize-and-verify loop: statuses, determinism, plane handling."""

import numpy as np

from twoview.core import PipelineConfig, Status
from twoview.geometry import degensac, sampson_distances
from twoview.synthetic import (
    dominant_plane_scene,
    random_scene,
    scene_to_match_set,
)


def cfg_100k(seed=0, threshold=1.1):
    return PipelineConfig(
        degensac_threshold=threshold, degensac_max_iters=100_000, rng_seed=seed
    )


class TestStatuses:
    def test_seven_matches_too_few(self):
        scene = random_scene(0, n_inliers=7)
        vr = degensac(scene_to_match_set(scene, "p"), cfg_100k())
        assert vr.status is Status.TOO_FEW_MATCHES
        assert vr.fundamental is None
        assert vr.inlier_count == 0

    def test_empty_too_few(self):
        from twoview.core import MatchSet

        vr = degensac(MatchSet("p", "a", "b"), cfg_100k())
        assert vr.status is Status.TOO_FEW_MATCHES

    def test_pure_outliers_only_chance_support(self):
        rng = np.random.default_rng(0)
        from twoview.core import Correspondence, Channel, MatchSet

        corrs = tuple(
            Correspondence(
                (float(x), float(y)), (float(u), float(v)), 0.9, Channel.SP, 1.0
            )
            for x, y, u, v in rng.uniform(0, 1600, size=(20, 4))
        )
        vr = degensac(MatchSet("p", "a", "b", corrs), cfg_100k(threshold=0.01))
        # Random correspondences can still reach the 8-point bar by chance (a
        # 7-point model fits its sample exactly); what they cannot produce is
        # broad support. This is the failure mode the discard prefilter and
        # the non-matching metric exist to expose.
        if vr.status is Status.VERIFIED:
            assert vr.inlier_count <= 10
        else:
            assert vr.fundamental is None


class TestCleanScene:
    def test_noiseless_recovers_ground_truth(self):
        scene = random_scene(1, n_inliers=100)
        vr = degensac(scene_to_match_set(scene, "clean"), cfg_100k())
        assert vr.status is Status.VERIFIED
        assert vr.inlier_count == 100
        assert np.abs(np.abs(vr.fundamental) - np.abs(scene.f_true)).max() < 1e-4

    def test_inliers_satisfy_threshold(self):
        scene = random_scene(2, n_inliers=80, n_outliers=40, noise=0.5)
        cfg = cfg_100k()
        ms = scene_to_match_set(scene, "chk")
        vr = degensac(ms, cfg)
        pa, pb = ms.points()
        dists = sampson_distances(vr.fundamental, pa, pb)
        assert np.all(dists[vr.inlier_mask] <= cfg.degensac_threshold + 1e-12)


class TestDeterminism:
    def test_identical_inputs_identical_results(self):
        scene = random_scene(3, n_inliers=60, n_outliers=60, noise=0.5)
        ms = scene_to_match_set(scene, "det")
        cfg = cfg_100k(seed=5)
        a = degensac(ms, cfg)
        b = degensac(ms, cfg)
        assert a.status is b.status
        assert a.iterations_run == b.iterations_run
        assert np.array_equal(a.inlier_mask, b.inlier_mask)
        assert np.array_equal(a.fundamental, b.fundamental)

    def test_any_seed_still_verifies(self):
        scene = random_scene(3, n_inliers=60, n_outliers=60, noise=0.5)
        ms = scene_to_match_set(scene, "det")
        for seed in range(5):
            vr = degensac(ms, cfg_100k(seed=seed))
            assert vr.status is Status.VERIFIED
            assert vr.inlier_count >= 55

    def test_pair_id_changes_stream(self):
        scene = random_scene(3, n_inliers=60, n_outliers=60, noise=0.5)
        a = degensac(scene_to_match_set(scene, "p1"), cfg_100k())
        b = degensac(scene_to_match_set(scene, "p2"), cfg_100k())
        assert a.status is Status.VERIFIED and b.status is Status.VERIFIED


class TestThresholdMonotonicity:
    def test_scoring_level_nesting(self):
        # With the final model held fixed, the inlier sets nest as the
        # threshold grows.
        scene = random_scene(4, n_inliers=80, n_outliers=40, noise=1.0)
        ms = scene_to_match_set(scene, "mono")
        vr = degensac(ms, cfg_100k())
        pa, pb = ms.points()
        d = sampson_distances(vr.fundamental, pa, pb)
        m05, m08, m11 = (d <= 0.5), (d <= 0.8), (d <= 1.1)
        assert np.all(m05 <= m08)
        assert np.all(m08 <= m11)


class TestDominantPlane:
    def test_plane_scene_recovers_parallax(self):
        ok = 0
        for seed in range(20):
            scene, held_a, held_b = dominant_plane_scene(seed)
            vr = degensac(scene_to_match_set(scene, f"pl{seed}"), cfg_100k(seed=3))
            if vr.fundamental is None:
                continue
            err = float(np.mean(sampson_distances(vr.fundamental, held_a, held_b)))
            ok += err <= 1.0
        assert ok >= 17

    def test_baseline_without_check_degrades(self):
        fails = 0
        for seed in range(20):
            scene, held_a, held_b = dominant_plane_scene(seed)
            vr = degensac(
                scene_to_match_set(scene, f"pl{seed}"), cfg_100k(seed=3), degeneracy_check=False
            )
            err = (
                np.inf
                if vr.fundamental is None
                else float(np.mean(sampson_distances(vr.fundamental, held_a, held_b)))
            )
            fails += err > 1.0
        assert fails >= 11

    def test_no_parallax_reports_degenerate_plane(self):
        # Every correspondence on one plane: no epipolar geometry is
        # determined; the H-consensus is reported instead of a fake model.
        scene, _, _ = dominant_plane_scene(1, n_plane=60, n_off=0, n_outliers=0, noise=0.1)
        vr = degensac(scene_to_match_set(scene, "flat"), cfg_100k())
        assert vr.status is Status.DEGENERATE_PLANE
        assert vr.fundamental is None
        assert vr.inlier_count >= 50  # the plane consensus is still reported
