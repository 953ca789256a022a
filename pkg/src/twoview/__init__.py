"""Two-view image matching: channel/scale fusion plus DegenSAC verification."""

from .core import (
    Channel,
    Correspondence,
    FeatureSet,
    Keypoint,
    MatchSet,
    PairLabel,
    PipelineConfig,
    Status,
    VerificationResult,
    WeightsVariant,
)
from .evaluate import PRESETS, PairRecord, Report, aggregate, finalize_pair, preset
from .fileio import (
    PairEntry,
    PairManifest,
    load_manifest,
    read_feature_file,
    read_match_file,
    write_feature_file,
    write_match_file,
)
from .fusion import apply_discard_threshold, fuse_channels, merge_scales
from .geometry import (
    adaptive_iterations,
    degensac,
    plane_degeneracy_check,
    sampson_distance,
    solve_f_7pt,
    solve_f_8pt,
    solve_h_4pt,
)
from .matching import (
    filter_matches_by_score,
    mutual_nn_match,
    radius_nms,
    rescale_to_working,
    top_k,
)
from .pipeline import run_manifest, verify_pair

__version__ = "0.1.0"

__all__ = [
    "Channel",
    "Correspondence",
    "FeatureSet",
    "Keypoint",
    "MatchSet",
    "PairLabel",
    "PipelineConfig",
    "Status",
    "VerificationResult",
    "WeightsVariant",
    "PRESETS",
    "PairRecord",
    "Report",
    "aggregate",
    "finalize_pair",
    "preset",
    "PairEntry",
    "PairManifest",
    "load_manifest",
    "read_feature_file",
    "read_match_file",
    "write_feature_file",
    "write_match_file",
    "apply_discard_threshold",
    "fuse_channels",
    "merge_scales",
    "adaptive_iterations",
    "degensac",
    "plane_degeneracy_check",
    "sampson_distance",
    "solve_f_7pt",
    "solve_f_8pt",
    "solve_h_4pt",
    "filter_matches_by_score",
    "mutual_nn_match",
    "radius_nms",
    "rescale_to_working",
    "top_k",
    "run_manifest",
    "verify_pair",
]
