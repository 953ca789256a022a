"""Batch evaluation over a pair manifest.

Builds a tiny synthetic benchmark on disk (match files + manifest),
runs it through the full pipeline under one of the published presets, and
prints the resulting report: per-pair status lines plus the three summary
metrics (mean inliers over matching pairs, match success rate, mean
reported matches over non-matching pairs).
"""

import dataclasses
import tempfile
from pathlib import Path

import numpy as np

from twoview import Channel, Correspondence, MatchSet, load_manifest, preset, run_manifest, write_match_file
from twoview.evaluate import aggregate, config_fingerprint, render_report
from twoview.synthetic import random_scene, scene_to_match_set


def random_pair(seed, pair_id, count):
    """Geometry-free correspondences, as a non-matching pair would produce."""
    rng = np.random.default_rng(seed)
    corrs = tuple(
        Correspondence((float(x1), float(y1)), (float(x2), float(y2)), 0.9, Channel.SP, 1.0)
        for x1, y1, x2, y2 in rng.uniform(0, 1600, size=(count, 4))
    )
    return MatchSet(pair_id=pair_id, image_a="a", image_b="b", correspondences=corrs)


def main():
    cfg = dataclasses.replace(preset("aaa-1000k_no_ms"), degensac_max_iters=100_000)

    with tempfile.TemporaryDirectory() as tmp:
        tmp = Path(tmp)
        lines = []
        for i in range(4):
            scene = random_scene(i, n_inliers=50, n_outliers=10, noise=0.5)
            ms = scene_to_match_set(scene, f"match{i}")
            write_match_file(ms, tmp / f"match{i}.mmt1")
            lines.append(f"match{i}\timgA{i}\timgB{i}\tMATCH\tsp_matches=match{i}.mmt1")
        for i in range(2):
            ms = random_pair(100 + i, f"non{i}", count=6)
            write_match_file(ms, tmp / f"non{i}.mmt1")
            lines.append(f"non{i}\timgX{i}\timgY{i}\tNONMATCH\tsp_matches=non{i}.mmt1")
        manifest_path = tmp / "pairs.tsv"
        manifest_path.write_text("\n".join(lines) + "\n", encoding="utf-8")

        records = run_manifest(load_manifest(manifest_path), cfg, jobs=2)
        report = aggregate(records, config_fingerprint(cfg))
        print(render_report(records, report), end="")


if __name__ == "__main__":
    main()
