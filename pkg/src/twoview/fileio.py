"""Portable binary formats (MFK1 features, MMT1 matches) and the pair manifest.

Both binary formats are little-endian with a fixed field order and no
padding, so any language can parse them with plain byte arithmetic.
Writers are pure functions of their input; identical values produce
byte-identical files.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Tuple

import numpy as np

from .core import (
    Channel,
    Correspondence,
    FeatureSet,
    Keypoint,
    MatchSet,
    PairLabel,
    WeightsVariant,
    validate_feature_set,
    validate_match_set,
)
from .errors import (
    BadMagicError,
    DuplicatePairIdError,
    InvalidDataError,
    ManifestParseError,
    MissingFileError,
    TruncatedError,
)

MFK_MAGIC = b"MFK1"
MMT_MAGIC = b"MMT1"
FORMAT_VERSION = 1

_FEATURE_KEYS = ("sp_a", "sp_b", "disk_a", "disk_b")
_MATCH_KEYS = ("sp_matches", "disk_matches")


class _Cursor:
    """Bounds-checked reader over a byte buffer."""

    def __init__(self, data: bytes):
        self.data = data
        self.pos = 0

    def take(self, n: int) -> bytes:
        if n < 0 or self.pos + n > len(self.data):
            raise TruncatedError(
                f"need {n} bytes at offset {self.pos}, have {len(self.data) - self.pos}"
            )
        out = self.data[self.pos : self.pos + n]
        self.pos += n
        return out

    def unpack(self, fmt: str):
        return struct.unpack(fmt, self.take(struct.calcsize(fmt)))

    def string(self) -> str:
        (n,) = self.unpack("<I")
        raw = self.take(n)
        try:
            return raw.decode("utf-8")
        except UnicodeDecodeError as e:
            raise InvalidDataError(f"invalid UTF-8 string: {e}") from e


def _pack_string(s: str) -> bytes:
    raw = s.encode("utf-8")
    return struct.pack("<I", len(raw)) + raw


def write_feature_file(fs: FeatureSet, path) -> None:
    """Serialize a validated FeatureSet to MFK1."""
    validate_feature_set(fs)
    n = len(fs.keypoints)
    d = fs.descriptor_dim
    parts = [
        MFK_MAGIC,
        struct.pack("<I", FORMAT_VERSION),
        struct.pack("<BB", fs.channel.value, fs.weights_variant.value),
        _pack_string(fs.image_id),
        struct.pack("<IIII", *fs.original_size, *fs.working_size),
        struct.pack("<d", fs.scale_factor),
        struct.pack("<II", n, d),
    ]
    kp = np.empty((n, 3), dtype="<f4")
    for i, k in enumerate(fs.keypoints):
        kp[i] = (k.x, k.y, k.score)
    parts.append(kp.tobytes())
    parts.append(np.ascontiguousarray(fs.descriptors, dtype="<f4").tobytes())
    Path(path).write_bytes(b"".join(parts))


def read_feature_file(path) -> FeatureSet:
    """Parse and validate an MFK1 file."""
    cur = _Cursor(Path(path).read_bytes())
    if cur.take(4) != MFK_MAGIC:
        raise BadMagicError(f"{path}: not an MFK1 file")
    (version,) = cur.unpack("<I")
    if version != FORMAT_VERSION:
        raise InvalidDataError(f"{path}: unsupported MFK1 version {version}")
    channel_code, weights_code = cur.unpack("<BB")
    try:
        channel = Channel(channel_code)
        weights = WeightsVariant(weights_code)
    except ValueError as e:
        raise InvalidDataError(f"{path}: {e}") from e
    image_id = cur.string()
    ow, oh, ww, wh = cur.unpack("<IIII")
    (scale,) = cur.unpack("<d")
    n, d = cur.unpack("<II")
    kp_raw = np.frombuffer(cur.take(n * 12), dtype="<f4").reshape(n, 3)
    desc = np.frombuffer(cur.take(n * d * 4), dtype="<f4").reshape(n, d).copy()
    if cur.pos != len(cur.data):
        raise InvalidDataError(f"{path}: {len(cur.data) - cur.pos} trailing bytes")
    keypoints = tuple(
        Keypoint(float(kp_raw[i, 0]), float(kp_raw[i, 1]), float(kp_raw[i, 2]), i)
        for i in range(n)
    )
    fs = FeatureSet(
        image_id=image_id,
        channel=channel,
        scale_factor=scale,
        original_size=(ow, oh),
        working_size=(ww, wh),
        keypoints=keypoints,
        descriptors=desc,
        weights_variant=weights,
    )
    validate_feature_set(fs)
    return fs


def write_match_file(ms: MatchSet, path) -> None:
    """Serialize a validated MatchSet to MMT1."""
    validate_match_set(ms)
    parts = [
        MMT_MAGIC,
        struct.pack("<I", FORMAT_VERSION),
        _pack_string(ms.pair_id),
        _pack_string(ms.image_a),
        _pack_string(ms.image_b),
        struct.pack("<I", len(ms.correspondences)),
    ]
    for c in ms.correspondences:
        parts.append(
            struct.pack(
                "<fffffBf",
                c.a[0],
                c.a[1],
                c.b[0],
                c.b[1],
                c.confidence,
                c.channel.value,
                c.scale_tag,
            )
        )
    Path(path).write_bytes(b"".join(parts))


def read_match_file(path) -> MatchSet:
    """Parse and validate an MMT1 file."""
    cur = _Cursor(Path(path).read_bytes())
    if cur.take(4) != MMT_MAGIC:
        raise BadMagicError(f"{path}: not an MMT1 file")
    (version,) = cur.unpack("<I")
    if version != FORMAT_VERSION:
        raise InvalidDataError(f"{path}: unsupported MMT1 version {version}")
    pair_id = cur.string()
    image_a = cur.string()
    image_b = cur.string()
    (m,) = cur.unpack("<I")
    corrs = []
    for _ in range(m):
        ax, ay, bx, by, conf, ch, tag = cur.unpack("<fffffBf")
        try:
            channel = Channel(ch)
        except ValueError as e:
            raise InvalidDataError(f"{path}: {e}") from e
        corrs.append(
            Correspondence(
                a=(float(ax), float(ay)),
                b=(float(bx), float(by)),
                confidence=float(conf),
                channel=channel,
                scale_tag=float(tag),
            )
        )
    if cur.pos != len(cur.data):
        raise InvalidDataError(f"{path}: {len(cur.data) - cur.pos} trailing bytes")
    ms = MatchSet(pair_id=pair_id, image_a=image_a, image_b=image_b, correspondences=tuple(corrs))
    validate_match_set(ms)
    return ms


@dataclass(frozen=True)
class PairEntry:
    pair_id: str
    image_a: str
    image_b: str
    label: PairLabel
    # channel -> per-image list of MFK1 paths (one per scale)
    feature_files: Dict[Channel, Dict[str, Tuple[Path, ...]]] = field(default_factory=dict)
    # channel -> MMT1 path
    match_files: Dict[Channel, Path] = field(default_factory=dict)


@dataclass(frozen=True)
class PairManifest:
    entries: Tuple[PairEntry, ...]

    def __len__(self) -> int:
        return len(self.entries)


_LABELS = {label.value: label for label in PairLabel}


def load_manifest(path) -> PairManifest:
    """Load the tab-separated pair manifest.

    Line format::

        pair_id <TAB> image_a <TAB> image_b <TAB> label [<TAB> key=path ...]

    Keys: sp_a, sp_b, disk_a, disk_b (MFK1; ``;``-separated list for
    multiple scales) and sp_matches, disk_matches (MMT1). Paths are
    resolved relative to the manifest's directory. ``#`` starts a comment.
    """
    path = Path(path)
    base = path.parent
    try:
        text = path.read_text(encoding="utf-8")
    except UnicodeDecodeError as e:
        raise ManifestParseError(f"{path}: not UTF-8: {e}") from e
    except OSError as e:
        raise MissingFileError(f"{path}: {e}") from e
    entries: List[PairEntry] = []
    seen = set()
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        fields = line.split("\t")
        if len(fields) < 4:
            raise ManifestParseError(f"{path}:{lineno}: expected at least 4 tab-separated fields")
        pair_id, image_a, image_b, label_token = fields[:4]
        if label_token not in _LABELS:
            raise ManifestParseError(f"{path}:{lineno}: unknown label {label_token!r}")
        if pair_id in seen:
            raise DuplicatePairIdError(f"{path}:{lineno}: duplicate pair_id {pair_id!r}")
        seen.add(pair_id)
        feature_files: Dict[Channel, Dict[str, List[Path]]] = {}
        match_files: Dict[Channel, Path] = {}
        for token in fields[4:]:
            if not token:
                continue
            if "=" not in token:
                raise ManifestParseError(f"{path}:{lineno}: malformed token {token!r}")
            key, value = token.split("=", 1)
            if key in _FEATURE_KEYS:
                channel = Channel.SP if key.startswith("sp") else Channel.DISK
                side = key[-1]
                paths = [base / p for p in value.split(";") if p]
                for p in paths:
                    if not p.is_file():
                        raise MissingFileError(f"{path}:{lineno}: missing file {p}")
                feature_files.setdefault(channel, {})[side] = paths
            elif key in _MATCH_KEYS:
                channel = Channel.SP if key.startswith("sp") else Channel.DISK
                p = base / value
                if not p.is_file():
                    raise MissingFileError(f"{path}:{lineno}: missing file {p}")
                match_files[channel] = p
            else:
                raise ManifestParseError(f"{path}:{lineno}: unknown key {key!r}")
        entries.append(
            PairEntry(
                pair_id=pair_id,
                image_a=image_a,
                image_b=image_b,
                label=_LABELS[label_token],
                feature_files={
                    ch: {side: tuple(ps) for side, ps in sides.items()}
                    for ch, sides in feature_files.items()
                },
                match_files=match_files,
            )
        )
    return PairManifest(entries=tuple(entries))


def classify_file(path) -> str:
    """Return a one-word verdict for `cmd_validate`: OK / BAD_MAGIC / TRUNCATED / INVALID."""
    try:
        head = Path(path).read_bytes()[:4]
    except OSError:
        return "INVALID"
    try:
        if head == MFK_MAGIC:
            read_feature_file(path)
        elif head == MMT_MAGIC:
            read_match_file(path)
        else:
            # Fall back to manifest; anything unreadable is a bad magic.
            try:
                load_manifest(path)
            except Exception:
                return "BAD_MAGIC"
        return "OK"
    except BadMagicError:
        return "BAD_MAGIC"
    except TruncatedError:
        return "TRUNCATED"
    except Exception:
        return "INVALID"
