"""Why the degeneracy check exists.

On a scene where most correspondences lie on one world plane, plain RANSAC
happily returns a fundamental matrix that explains the plane and nothing
else. The degeneracy-aware loop detects this, fits the plane homography
explicitly, and recovers the epipolar geometry from the off-plane points.

Quality is judged on held-out noiseless off-plane correspondences that the
estimator never sees.
"""

import numpy as np

from twoview import PipelineConfig, degensac
from twoview.geometry import sampson_distances
from twoview.synthetic import dominant_plane_scene, scene_to_match_set


def heldout_error(vr, held_a, held_b):
    if vr.fundamental is None:
        return float("inf")
    return float(np.mean(sampson_distances(vr.fundamental, held_a, held_b)))


def main():
    cfg = PipelineConfig(degensac_threshold=1.1, degensac_max_iters=100_000, rng_seed=3)

    wins = base_wins = 0
    for seed in range(10):
        scene, held_a, held_b = dominant_plane_scene(seed)
        ms = scene_to_match_set(scene, f"plane{seed}")

        full = degensac(ms, cfg)
        base = degensac(ms, cfg, degeneracy_check=False)
        e_full = heldout_error(full, held_a, held_b)
        e_base = heldout_error(base, held_a, held_b)
        wins += e_full <= 1.0
        base_wins += e_base <= 1.0
        print(f"scene {seed}: held-out Sampson error "
              f"with check {e_full:7.3f} px, without {e_base:7.3f} px")

    print(f"\npass rate at 1.0 px (2x the scene noise): "
          f"{wins}/10 with the check, {base_wins}/10 without")


if __name__ == "__main__":
    main()
