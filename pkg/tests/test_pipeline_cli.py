"""End-to-end manifest execution and the command-line surface."""

import dataclasses

import numpy as np
import pytest

from conftest import build_manifest, paired_feature_files, random_match_set, scene_match_set
from twoview.cli import main
from twoview.core import Channel, PairLabel, PipelineConfig, Status
from twoview.evaluate import config_to_text
from twoview.fileio import load_manifest
from twoview.pipeline import candidate_matches, fuse_pair, run_manifest, verify_pair

FAST = PipelineConfig(degensac_max_iters=100_000, rng_seed=1)


def fast_cfg(**overrides):
    return dataclasses.replace(FAST, **overrides)


class TestPipeline:
    def test_match_file_ingest(self, tmp_path):
        ms = scene_match_set(0, "p0")
        manifest = build_manifest(tmp_path, [("p0", "MATCH", ms)])
        entry = load_manifest(manifest).entries[0]
        sets = candidate_matches(entry, fast_cfg())
        assert len(sets) == 1
        assert sets[0].pair_id == "p0"
        assert len(sets[0]) == 40

    def test_feature_file_ingest_produces_verifiable_matches(self, tmp_path):
        pa, pb, scene = paired_feature_files(tmp_path, 7, "pair")
        manifest = build_manifest(tmp_path, [("p0", "MATCH", (pa, pb))])
        entry = load_manifest(manifest).entries[0]
        vr, rec = verify_pair(entry, fast_cfg())
        assert vr.status is Status.VERIFIED
        assert rec.reported_matches >= 25

    def test_discard_prefilter_status(self, tmp_path):
        ms = random_match_set(1, "few", count=5)
        manifest = build_manifest(tmp_path, [("few", "NONMATCH", ms)])
        entry = load_manifest(manifest).entries[0]
        vr, rec = verify_pair(entry, fast_cfg(discard_num=8))
        assert vr.status is Status.DISCARDED_PREFILTER
        assert rec.reported_matches == 0

    def test_low_confidence_filtered_out(self, tmp_path):
        ms = scene_match_set(2, "lowc", confidence=0.1)  # below sp_match_score 0.2
        manifest = build_manifest(tmp_path, [("lowc", "MATCH", ms)])
        entry = load_manifest(manifest).entries[0]
        vr, _ = verify_pair(entry, fast_cfg(discard_num=8))
        assert vr.status is Status.DISCARDED_PREFILTER

    def test_multi_scale_off_drops_tagged_matches(self):
        base = scene_match_set(3, "ms")
        tagged = base.with_correspondences(
            tuple(
                dataclasses.replace(c, scale_tag=0.5 if i % 2 else 1.0)
                for i, c in enumerate(base.correspondences)
            )
        )
        fused_off = fuse_pair([tagged], "ms", fast_cfg(multi_scale_sp=False))
        fused_on = fuse_pair([tagged], "ms", fast_cfg(multi_scale_sp=True))
        assert len(fused_off) == 20
        assert len(fused_on) == 40

    def test_run_manifest_order_and_jobs(self, tmp_path):
        entries = [
            (f"p{i}", "MATCH" if i % 2 == 0 else "NONMATCH", scene_match_set(i, f"p{i}"))
            for i in range(5)
        ]
        manifest = build_manifest(tmp_path, entries)
        man = load_manifest(manifest)
        serial = run_manifest(man, fast_cfg())
        parallel = run_manifest(man, fast_cfg(), jobs=4)
        assert [r.pair_id for r in serial] == [f"p{i}" for i in range(5)]
        assert serial == parallel

    def test_labels_propagate(self, tmp_path):
        manifest = build_manifest(
            tmp_path, [("u0", "UNKNOWN", scene_match_set(9, "u0"))]
        )
        records = run_manifest(load_manifest(manifest), fast_cfg())
        assert records[0].label is PairLabel.UNKNOWN


class TestCli:
    def _manifest(self, tmp_path, n_match=2, n_nonmatch=1):
        entries = [
            (f"m{i}", "MATCH", scene_match_set(20 + i, f"m{i}")) for i in range(n_match)
        ] + [
            (f"n{i}", "NONMATCH", random_match_set(40 + i, f"n{i}", count=6))
            for i in range(n_nonmatch)
        ]
        return build_manifest(tmp_path, entries)

    def test_run_with_preset(self, tmp_path, capsys):
        manifest = self._manifest(tmp_path)
        code = main(["run", "--manifest", str(manifest), "--preset", "sss-sd_100k_8"])
        assert code == 0
        out = capsys.readouterr().out
        lines = out.splitlines()
        assert lines[0].startswith("pair_id\t")
        assert len([l for l in lines if not l.startswith("#") and l != lines[0]]) == 3
        assert any(l.startswith("#match_success_rate 1.000000") for l in lines)

    def test_run_with_config_file(self, tmp_path):
        manifest = self._manifest(tmp_path)
        cfg_path = tmp_path / "cfg.txt"
        cfg_path.write_text(config_to_text(fast_cfg(discard_num=0)), encoding="utf-8")
        out_path = tmp_path / "report.tsv"
        code = main(
            ["run", "--manifest", str(manifest), "--config", str(cfg_path), "--out", str(out_path)]
        )
        assert code == 0
        assert out_path.read_text(encoding="utf-8").startswith("pair_id\t")

    def test_run_determinism_across_jobs(self, tmp_path):
        manifest = self._manifest(tmp_path, n_match=3, n_nonmatch=2)
        outs = []
        for jobs, name in ((1, "r1"), (8, "r8"), (1, "r1b")):
            out_path = tmp_path / name
            code = main(
                [
                    "run",
                    "--manifest",
                    str(manifest),
                    "--preset",
                    "sss-sd_100k_8",
                    "--jobs",
                    str(jobs),
                    "--out",
                    str(out_path),
                ]
            )
            assert code == 0
            outs.append(out_path.read_bytes())
        assert outs[0] == outs[1] == outs[2]

    def test_seed_override_changes_fingerprint_only_deterministically(self, tmp_path):
        manifest = self._manifest(tmp_path, n_match=1, n_nonmatch=0)
        a, b = tmp_path / "a", tmp_path / "b"
        for path in (a, b):
            assert (
                main(
                    ["run", "--manifest", str(manifest), "--preset", "sss-sd_100k_8", "--seed", "7", "--out", str(path)]
                )
                == 0
            )
        assert a.read_bytes() == b.read_bytes()

    def test_unknown_preset_exit_code(self, tmp_path, capsys):
        manifest = self._manifest(tmp_path, n_match=1, n_nonmatch=0)
        code = main(["run", "--manifest", str(manifest), "--preset", "bogus"])
        assert code == 1
        assert "UNKNOWN_PRESET" in capsys.readouterr().err

    def test_empty_manifest(self, tmp_path, capsys):
        manifest = tmp_path / "empty.tsv"
        manifest.write_text("# nothing\n", encoding="utf-8")
        code = main(["run", "--manifest", str(manifest), "--preset", "sss-sd_100k_8"])
        assert code == 0
        lines = capsys.readouterr().out.splitlines()
        assert lines[0].startswith("pair_id\t")
        assert lines[1].startswith("#mean_inliers")

    def test_validate_verdicts(self, tmp_path, capsys):
        good = tmp_path / "good.mmt1"
        from twoview.fileio import write_match_file

        write_match_file(scene_match_set(5, "v"), good)
        bad = tmp_path / "bad.bin"
        bad.write_bytes(b"XXXXjunk")
        cut = tmp_path / "cut.mmt1"
        cut.write_bytes(good.read_bytes()[:-4])
        code = main(["validate", str(good), str(bad), str(cut)])
        out = capsys.readouterr().out.splitlines()
        assert code == 1
        assert out[0].endswith("\tOK")
        assert out[1].endswith("\tBAD_MAGIC")
        assert out[2].endswith("\tTRUNCATED")

    def test_validate_all_ok(self, tmp_path, capsys):
        good = tmp_path / "good.mmt1"
        from twoview.fileio import write_match_file

        write_match_file(scene_match_set(5, "v"), good)
        assert main(["validate", str(good)]) == 0

    def test_presets_listing(self, capsys):
        assert main(["presets"]) == 0
        lines = capsys.readouterr().out.splitlines()
        assert len(lines) == 7

    def test_presets_single(self, capsys):
        assert main(["presets", "--name", "aaa-1000k_no_ms2"]) == 0
        out = capsys.readouterr().out
        assert "discard_num=50" in out

    def test_presets_unknown(self, capsys):
        assert main(["presets", "--name", "bogus"]) == 1

    def test_usage_error_exit_two(self):
        with pytest.raises(SystemExit) as e:
            main(["run"])  # missing required flags
        assert e.value.code == 2
