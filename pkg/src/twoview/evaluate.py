"""Per-pair metrics, aggregate report, and the submission preset registry."""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, fields
from typing import Dict, List, Optional, Sequence

from .core import PairLabel, PipelineConfig, Status, VerificationResult, WeightsVariant
from .errors import InvalidDataError, UnknownPresetError


@dataclass(frozen=True)
class PairRecord:
    pair_id: str
    label: PairLabel
    reported_matches: int
    inlier_count: int
    status: Status


@dataclass(frozen=True)
class Report:
    mean_inliers: Optional[float]
    match_success_rate: Optional[float]
    mean_nonmatch_matches: Optional[float]
    status_counts: Dict[Status, int]
    config_fingerprint: str


def finalize_pair(vr: VerificationResult, label: PairLabel) -> PairRecord:
    """A pair reports its verified inliers, or nothing at all."""
    reported = vr.inlier_count if vr.status is Status.VERIFIED else 0
    return PairRecord(
        pair_id=vr.pair_id,
        label=label,
        reported_matches=reported,
        inlier_count=vr.inlier_count if vr.status is Status.VERIFIED else 0,
        status=vr.status,
    )


def aggregate(records: Sequence[PairRecord], config_fingerprint: str = "") -> Report:
    """Three summary metrics; UNKNOWN-label pairs are excluded from all of them."""
    matching = [r for r in records if r.label is PairLabel.MATCHING]
    nonmatching = [r for r in records if r.label is PairLabel.NON_MATCHING]
    mean_inliers = (
        sum(r.inlier_count for r in matching) / len(matching) if matching else None
    )
    success = (
        sum(1 for r in matching if r.status is Status.VERIFIED) / len(matching)
        if matching
        else None
    )
    mean_nonmatch = (
        sum(r.reported_matches for r in nonmatching) / len(nonmatching)
        if nonmatching
        else None
    )
    counts = {status: 0 for status in Status}
    for r in records:
        counts[r.status] += 1
    return Report(
        mean_inliers=mean_inliers,
        match_success_rate=success,
        mean_nonmatch_matches=mean_nonmatch,
        status_counts=counts,
        config_fingerprint=config_fingerprint,
    )


def config_to_text(cfg: PipelineConfig) -> str:
    """Stable key=value serialization (also the --config file format)."""
    lines = []
    for f in fields(cfg):
        value = getattr(cfg, f.name)
        if isinstance(value, WeightsVariant):
            value = value.name
        elif isinstance(value, bool):
            value = "true" if value else "false"
        elif isinstance(value, tuple):
            value = ",".join(repr(v) for v in value)
        lines.append(f"{f.name}={value}")
    return "\n".join(lines) + "\n"


def config_from_text(text: str) -> PipelineConfig:
    """Parse the key=value config format produced by config_to_text."""
    values = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise InvalidDataError(f"config line {lineno}: expected key=value")
        key, raw = line.split("=", 1)
        values[key.strip()] = raw.strip()
    kwargs = {}
    by_name = {f.name: f for f in fields(PipelineConfig)}
    for key, raw in values.items():
        if key not in by_name:
            raise InvalidDataError(f"unknown config key {key!r}")
        default = getattr(PipelineConfig(), key)
        if isinstance(default, WeightsVariant):
            kwargs[key] = WeightsVariant[raw]
        elif isinstance(default, bool):
            if raw not in ("true", "false"):
                raise InvalidDataError(f"{key}: expected true/false, got {raw!r}")
            kwargs[key] = raw == "true"
        elif isinstance(default, tuple):
            kwargs[key] = tuple(float(v) for v in raw.split(",") if v)
        elif isinstance(default, int):
            kwargs[key] = int(raw)
        else:
            kwargs[key] = float(raw)
    return PipelineConfig(**kwargs)


def config_fingerprint(cfg: PipelineConfig) -> str:
    """Short provenance hash included in every report."""
    digest = hashlib.sha256(config_to_text(cfg).encode("utf-8")).hexdigest()
    return digest[:16]


def _fmt(value: Optional[float]) -> str:
    return "n/a" if value is None else f"{value:.6f}"


def render_report(records: Sequence[PairRecord], report: Report) -> str:
    """Tab-separated report text: header, one record per line, metric footers."""
    lines = ["pair_id\tlabel\tstatus\treported\tinliers"]
    for r in records:
        lines.append(
            f"{r.pair_id}\t{r.label.value}\t{r.status.value}\t{r.reported_matches}\t{r.inlier_count}"
        )
    lines.append(f"#mean_inliers {_fmt(report.mean_inliers)}")
    lines.append(f"#match_success_rate {_fmt(report.match_success_rate)}")
    lines.append(f"#mean_nonmatch_matches {_fmt(report.mean_nonmatch_matches)}")
    lines.append(f"#config {report.config_fingerprint}")
    return "\n".join(lines) + "\n"


# One preset per submission; fields transcribed from the published run table.
PRESETS: Dict[str, PipelineConfig] = {
    "sss-sd_100k_1": PipelineConfig(
        sp_max_keypoints=2048,
        discard_num=0,
        degensac_threshold=1.1,
        degensac_max_iters=100_000,
        multi_scale_sp=True,
        multi_scale_disk=True,
        weights_variant=WeightsVariant.OUTDOOR,
    ),
    "sss-sd_100k_6": PipelineConfig(
        sp_max_keypoints=2048,
        discard_num=0,
        degensac_threshold=1.1,
        degensac_max_iters=1_000_000,
        multi_scale_sp=True,
        multi_scale_disk=True,
        weights_variant=WeightsVariant.INDOOR,
    ),
    "sss-sd_100k_8": PipelineConfig(
        sp_max_keypoints=4096,
        discard_num=0,
        degensac_threshold=1.1,
        degensac_max_iters=1_000_000,
        multi_scale_sp=True,
        multi_scale_disk=True,
        weights_variant=WeightsVariant.OUTDOOR,
    ),
    "aaa-1000k_no_ms": PipelineConfig(
        sp_max_keypoints=4096,
        discard_num=8,
        degensac_threshold=1.1,
        degensac_max_iters=1_000_000,
        multi_scale_sp=False,
        multi_scale_disk=False,
        weights_variant=WeightsVariant.OUTDOOR,
    ),
    "aaa-1000k_no_ms2": PipelineConfig(
        sp_max_keypoints=4096,
        discard_num=50,
        degensac_threshold=1.1,
        degensac_max_iters=1_000_000,
        multi_scale_sp=False,
        multi_scale_disk=False,
        weights_variant=WeightsVariant.OUTDOOR,
    ),
    "aaa-1000k_80_no_ms111": PipelineConfig(
        sp_max_keypoints=4096,
        discard_num=8,
        degensac_threshold=0.8,
        degensac_max_iters=100_000,
        multi_scale_sp=False,
        multi_scale_disk=False,
        weights_variant=WeightsVariant.OUTDOOR,
    ),
    "aaa-1000k_50_no_ms111": PipelineConfig(
        sp_max_keypoints=4096,
        discard_num=8,
        degensac_threshold=0.5,
        degensac_max_iters=100_000,
        multi_scale_sp=False,
        multi_scale_disk=False,
        weights_variant=WeightsVariant.OUTDOOR,
    ),
}


def preset(name: str) -> PipelineConfig:
    try:
        return PRESETS[name]
    except KeyError:
        raise UnknownPresetError(f"unknown preset {name!r}") from None
