"""Two-view geometry: F/H solvers, Sampson scoring, and the DegenSAC loop.

Solvers work on Hartley-normalized coordinates and return matrices at
canonical scale (Frobenius norm 1, largest-magnitude entry positive).
The verification loop is fully deterministic: the sample stream comes from
a splitmix64 generator seeded from (rng_seed, pair_id), and the first
hypothesis to reach a given inlier count wins ties.
"""

from __future__ import annotations

import math
from typing import List, Optional, Sequence, Tuple

import numpy as np

from .core import (
    MatchSet,
    PipelineConfig,
    Status,
    VerificationResult,
    canonicalize_matrix,
)
from .errors import DegenerateInputError, UndefinedSampsonError
from .rng import SplitMix64, pair_stream_seed

# 5-tuples of the 7-point sample probed for homography consistency.
_DEGEN_TUPLES = ((0, 1, 2, 3, 4), (2, 3, 4, 5, 6), (0, 1, 5, 6, 2))

_PLANE_CONSENSUS_MIN = 5
_PLANE_DOMINANCE_MIN = 5.0 / 7.0
_PARALLAX_MAX_TRIALS = 10_000
_MIN_MODEL_SUPPORT = 8


def _homogeneous(points: np.ndarray) -> np.ndarray:
    pts = np.asarray(points, dtype=np.float64)
    return np.hstack([pts, np.ones((pts.shape[0], 1))])


def normalize_points(points: Sequence[Tuple[float, float]]) -> Tuple[np.ndarray, np.ndarray]:
    """Hartley conditioning: centroid at origin, mean distance sqrt(2).

    Returns (normalized (n,2) points, 3x3 similarity T with x_n = T x).
    """
    pts = np.asarray(points, dtype=np.float64)
    if pts.shape[0] < 2:
        raise DegenerateInputError("need at least 2 points")
    centroid = pts.mean(axis=0)
    centered = pts - centroid
    mean_dist = np.mean(np.linalg.norm(centered, axis=1))
    if mean_dist <= 0:
        raise DegenerateInputError("all points identical")
    s = math.sqrt(2.0) / mean_dist
    T = np.array(
        [[s, 0.0, -s * centroid[0]], [0.0, s, -s * centroid[1]], [0.0, 0.0, 1.0]]
    )
    return centered * s, T


def _epipolar_design(pa: np.ndarray, pb: np.ndarray) -> np.ndarray:
    """Rows encode b^T F a = 0 for F flattened row-major."""
    xa, ya = pa[:, 0], pa[:, 1]
    xb, yb = pb[:, 0], pb[:, 1]
    one = np.ones_like(xa)
    return np.column_stack([xb * xa, xb * ya, xb, yb * xa, yb * ya, yb, xa, ya, one])


def _rank2(f: np.ndarray) -> np.ndarray:
    u, s, vt = np.linalg.svd(f)
    s = s.copy()
    s[2] = 0.0
    return u @ np.diag(s) @ vt


def _det3(m) -> float:
    a, b, c, d, e, f, g, h, i = m
    return a * (e * i - f * h) - b * (d * i - f * g) + c * (d * h - e * g)


def _real_cubic_roots(c3: float, c2: float, c1: float, c0: float) -> List[float]:
    """Real roots of c3 t^3 + c2 t^2 + c1 t + c0, degree-reduced as needed."""
    scale = max(abs(c3), abs(c2), abs(c1), abs(c0), 1e-300)
    if abs(c3) <= 1e-13 * scale:
        if abs(c2) <= 1e-13 * scale:
            if abs(c1) <= 1e-13 * scale:
                return []
            return [-c0 / c1]
        disc = c1 * c1 - 4.0 * c2 * c0
        if disc < 0:
            return []
        sq = math.sqrt(disc)
        return [(-c1 + sq) / (2.0 * c2), (-c1 - sq) / (2.0 * c2)]
    b = c2 / c3
    c = c1 / c3
    d = c0 / c3
    p = c - b * b / 3.0
    q = 2.0 * b ** 3 / 27.0 - b * c / 3.0 + d
    shift = -b / 3.0
    disc = (q / 2.0) ** 2 + (p / 3.0) ** 3
    if disc > 0:
        sq = math.sqrt(disc)
        u = math.copysign(abs(-q / 2.0 + sq) ** (1.0 / 3.0), -q / 2.0 + sq)
        v = math.copysign(abs(-q / 2.0 - sq) ** (1.0 / 3.0), -q / 2.0 - sq)
        return [u + v + shift]
    if disc == 0.0:
        if q == 0.0:
            return [shift]
        u = math.copysign(abs(-q / 2.0) ** (1.0 / 3.0), -q / 2.0)
        return [2.0 * u + shift, -u + shift]
    # Three distinct real roots: trigonometric form.
    r = math.sqrt(-(p ** 3) / 27.0)
    phi = math.acos(min(1.0, max(-1.0, -q / (2.0 * r))))
    m = 2.0 * math.sqrt(-p / 3.0)
    return [m * math.cos((phi + 2.0 * math.pi * k) / 3.0) + shift for k in range(3)]


def _seven_point_raw(pa7: np.ndarray, pb7: np.ndarray) -> List[np.ndarray]:
    """Non-canonical solutions F1 + t*F2 in the caller's coordinate frame."""
    a = _epipolar_design(pa7, pb7)
    _, s, vt = np.linalg.svd(a)
    if s[6] < 1e-9 * s[0]:
        return []
    f1 = vt[7].reshape(3, 3)
    f2 = vt[8].reshape(3, 3)
    m1 = f1.ravel().tolist()
    m2 = f2.ravel().tolist()
    # Coefficients of det(F1 + t*F2): exact fit through evaluations at
    # t = -1, 0, 1, 2 (the determinant is cubic in t).
    d0 = _det3(m1)
    d1 = _det3([x + y for x, y in zip(m1, m2)])
    dm1 = _det3([x - y for x, y in zip(m1, m2)])
    d2 = _det3([x + 2.0 * y for x, y in zip(m1, m2)])
    c0 = d0
    c2 = (d1 + dm1) / 2.0 - d0
    odd = (d1 - dm1) / 2.0  # c3 + c1
    c3 = (d2 - d0 - 4.0 * c2 - 2.0 * odd) / 6.0
    c1 = odd - c3
    return [f1 + r * f2 for r in _real_cubic_roots(c3, c2, c1, c0)]


def solve_f_7pt(pa: np.ndarray, pb: np.ndarray) -> List[np.ndarray]:
    """Seven-point fundamental matrix solver; 1..3 canonical rank-2 solutions."""
    pa = np.asarray(pa, dtype=np.float64)
    pb = np.asarray(pb, dtype=np.float64)
    if pa.shape != (7, 2) or pb.shape != (7, 2):
        raise ValueError("expected exactly 7 correspondences")
    na, ta = normalize_points(pa)
    nb, tb = normalize_points(pb)
    raw = _seven_point_raw(na, nb)
    solutions = []
    for fn in raw:
        f = tb.T @ fn @ ta
        if np.linalg.norm(f) < 1e-12:
            continue
        solutions.append(canonicalize_matrix(_rank2(f)))
    if not solutions:
        raise DegenerateInputError("no unique fundamental matrix from this sample")
    return solutions


def solve_f_8pt(pa: np.ndarray, pb: np.ndarray) -> np.ndarray:
    """Normalized 8-point solve with spectral rank-2 enforcement."""
    pa = np.asarray(pa, dtype=np.float64)
    pb = np.asarray(pb, dtype=np.float64)
    if pa.shape[0] < 8 or pa.shape != pb.shape:
        raise ValueError("need >= 8 correspondences of equal count")
    na, ta = normalize_points(pa)
    nb, tb = normalize_points(pb)
    a = _epipolar_design(na, nb)
    _, s, vt = np.linalg.svd(a)
    if s[7] < 1e-10 * s[0]:
        raise DegenerateInputError("design matrix rank below 8")
    f = vt[8].reshape(3, 3)
    f = tb.T @ _rank2(f) @ ta
    return canonicalize_matrix(f)


def sampson_distance(f: np.ndarray, a: Tuple[float, float], b: Tuple[float, float]) -> float:
    """First-order geometric distance of one correspondence to the F manifold."""
    ah = np.array([a[0], a[1], 1.0])
    bh = np.array([b[0], b[1], 1.0])
    fa = f @ ah
    ftb = f.T @ bh
    denom = fa[0] ** 2 + fa[1] ** 2 + ftb[0] ** 2 + ftb[1] ** 2
    if denom == 0.0:
        raise UndefinedSampsonError("both epipolar-line gradients vanish")
    return abs(bh @ fa) / math.sqrt(denom)


def sampson_distances(f: np.ndarray, pa: np.ndarray, pb: np.ndarray) -> np.ndarray:
    """Vectorized Sampson distances; undefined entries score +inf (outlier)."""
    ah = _homogeneous(pa)
    bh = _homogeneous(pb)
    fa = ah @ f.T  # rows F a
    ftb = bh @ f  # rows F^T b
    num = np.abs(np.sum(bh * fa, axis=1))
    denom = fa[:, 0] ** 2 + fa[:, 1] ** 2 + ftb[:, 0] ** 2 + ftb[:, 1] ** 2
    out = np.full(len(num), np.inf)
    ok = denom > 0
    out[ok] = num[ok] / np.sqrt(denom[ok])
    return out


def inlier_mask(f: np.ndarray, pa: np.ndarray, pb: np.ndarray, threshold: float) -> np.ndarray:
    return sampson_distances(f, pa, pb) <= threshold


def _collinear_triple_exists(pts: np.ndarray, tol: float = 1e-9) -> bool:
    n = len(pts)
    scale = max(1.0, float(np.abs(pts).max()))
    for i in range(n):
        for j in range(i + 1, n):
            for k in range(j + 1, n):
                area = abs(
                    (pts[j, 0] - pts[i, 0]) * (pts[k, 1] - pts[i, 1])
                    - (pts[k, 0] - pts[i, 0]) * (pts[j, 1] - pts[i, 1])
                )
                if area <= tol * scale * scale:
                    return True
    return False


def solve_h_4pt(pa: np.ndarray, pb: np.ndarray) -> np.ndarray:
    """DLT homography from exactly 4 correspondences, canonical scale."""
    pa = np.asarray(pa, dtype=np.float64)
    pb = np.asarray(pb, dtype=np.float64)
    if pa.shape != (4, 2) or pb.shape != (4, 2):
        raise ValueError("expected exactly 4 correspondences")
    if _collinear_triple_exists(pa) or _collinear_triple_exists(pb):
        raise DegenerateInputError("3 collinear points")
    na, ta = normalize_points(pa)
    nb, tb = normalize_points(pb)
    rows = []
    for (x, y), (u, v) in zip(na, nb):
        rows.append([-x, -y, -1.0, 0.0, 0.0, 0.0, u * x, u * y, u])
        rows.append([0.0, 0.0, 0.0, -x, -y, -1.0, v * x, v * y, v])
    a = np.asarray(rows)
    _, s, vt = np.linalg.svd(a)
    if s[7] < 1e-9 * s[0]:
        raise DegenerateInputError("homography design matrix rank deficient")
    h = vt[8].reshape(3, 3)
    h = np.linalg.inv(tb) @ h @ ta
    return canonicalize_matrix(h)


def solve_h_dlt(pa: np.ndarray, pb: np.ndarray) -> np.ndarray:
    """Least-squares DLT homography from n >= 4 correspondences."""
    pa = np.asarray(pa, dtype=np.float64)
    pb = np.asarray(pb, dtype=np.float64)
    if pa.shape[0] < 4 or pa.shape != pb.shape:
        raise ValueError("need >= 4 correspondences of equal count")
    na, ta = normalize_points(pa)
    nb, tb = normalize_points(pb)
    n = len(na)
    a = np.zeros((2 * n, 9))
    x, y = na[:, 0], na[:, 1]
    u, v = nb[:, 0], nb[:, 1]
    a[0::2, 0] = -x
    a[0::2, 1] = -y
    a[0::2, 2] = -1.0
    a[0::2, 6] = u * x
    a[0::2, 7] = u * y
    a[0::2, 8] = u
    a[1::2, 3] = -x
    a[1::2, 4] = -y
    a[1::2, 5] = -1.0
    a[1::2, 6] = v * x
    a[1::2, 7] = v * y
    a[1::2, 8] = v
    _, s, vt = np.linalg.svd(a)
    if s[7] < 1e-9 * s[0]:
        raise DegenerateInputError("homography design matrix rank deficient")
    h = np.linalg.inv(tb) @ vt[8].reshape(3, 3) @ ta
    return canonicalize_matrix(h)


def symmetric_transfer_errors(h: np.ndarray, pa: np.ndarray, pb: np.ndarray) -> np.ndarray:
    """max(forward, backward) transfer distance per correspondence, pixels."""
    hinv = np.linalg.inv(h)
    ah = _homogeneous(pa)
    bh = _homogeneous(pb)
    fwd = ah @ h.T
    bwd = bh @ hinv.T
    out = np.full(len(ah), np.inf)
    ok = (np.abs(fwd[:, 2]) > 1e-12) & (np.abs(bwd[:, 2]) > 1e-12)
    fw = fwd[ok, :2] / fwd[ok, 2:3] - np.asarray(pb)[ok]
    bw = bwd[ok, :2] / bwd[ok, 2:3] - np.asarray(pa)[ok]
    out[ok] = np.maximum(np.linalg.norm(fw, axis=1), np.linalg.norm(bw, axis=1))
    return out


def plane_degeneracy_check(
    pa: np.ndarray, pb: np.ndarray, threshold: float
) -> Tuple[int, Optional[np.ndarray]]:
    """Max homography-consistent count over the probed 5-tuples of a 7-sample.

    For each probed 5-tuple, every leave-one-out 4-subset is fitted with a
    homography and all 7 sample points are tested at the given symmetric
    transfer threshold. Degenerate iff the returned count >= 5.
    """
    pa = np.asarray(pa, dtype=np.float64)
    pb = np.asarray(pb, dtype=np.float64)
    if pa.shape != (7, 2) or pb.shape != (7, 2):
        raise ValueError("expected a 7-point sample")
    best_count = 0
    best_h = None
    for tup in _DEGEN_TUPLES:
        for drop in range(5):
            quad = [tup[i] for i in range(5) if i != drop]
            try:
                h = solve_h_4pt(pa[quad], pb[quad])
            except DegenerateInputError:
                continue
            count = int(np.count_nonzero(symmetric_transfer_errors(h, pa, pb) <= threshold))
            if count > best_count:
                best_count = count
                best_h = h
    return best_count, best_h


def adaptive_iterations(inlier_ratio: float, sample_size: int, confidence: float, max_iters: int) -> int:
    """Standard RANSAC stopping number, clamped to [1, max_iters]."""
    if not (0.0 < confidence < 1.0):
        raise ValueError("confidence must be in (0,1)")
    w = min(max(inlier_ratio, 0.0), 1.0)
    wm = w ** sample_size
    if wm <= 0.0:
        return max_iters
    if wm >= 1.0:
        return 1
    need = math.ceil(math.log(1.0 - confidence) / math.log(1.0 - wm))
    return int(min(max_iters, max(1, need)))


def _cross_matrix(v: np.ndarray) -> np.ndarray:
    return np.array(
        [[0.0, -v[2], v[1]], [v[2], 0.0, -v[0]], [-v[1], v[0], 0.0]]
    )


def _local_optimize(
    f: np.ndarray,
    pa: np.ndarray,
    pb: np.ndarray,
    threshold: float,
    rounds: int = 10,
    widen: float = 1.0,
) -> Tuple[np.ndarray, np.ndarray, int]:
    """Iterated least-squares refit on the model's inlier set.

    Repeats refit-and-rescore while the support strictly grows; minimal-sample
    models are noisy and a couple of rounds usually pull in the stragglers.
    With widen > 1 the first refit uses a widened inlier band, which enlarges
    the convergence basin for rough initial models.
    """
    if widen > 1.0:
        wide_mask = sampson_distances(f, pa, pb) <= widen * threshold
        if np.count_nonzero(wide_mask) >= _MIN_MODEL_SUPPORT:
            try:
                f = solve_f_8pt(pa[wide_mask], pb[wide_mask])
            except DegenerateInputError:
                pass
    mask = sampson_distances(f, pa, pb) <= threshold
    count = int(np.count_nonzero(mask))
    for _ in range(rounds):
        if count < _MIN_MODEL_SUPPORT:
            break
        try:
            refit = solve_f_8pt(pa[mask], pb[mask])
        except DegenerateInputError:
            break
        refit_mask = sampson_distances(refit, pa, pb) <= threshold
        refit_count = int(np.count_nonzero(refit_mask))
        if refit_count <= count:
            break
        f, mask, count = refit, refit_mask, refit_count
    return f, mask, count


def _plane_parallax_recovery(
    h: np.ndarray,
    pa: np.ndarray,
    pb: np.ndarray,
    threshold: float,
    confidence: float,
    rng: SplitMix64,
) -> Tuple[Optional[np.ndarray], np.ndarray]:
    """Fundamental matrix from a dominant-plane homography plus two off-plane points.

    The epipole in image B is the intersection of the lines (H a_i x b_i)
    for off-plane correspondences i; F = [e']_x H. The minimal-sample H is
    first grown: refit on its full consensus so the plane model is
    noise-averaged before the parallax construction.
    """
    for _ in range(2):
        consensus = symmetric_transfer_errors(h, pa, pb) <= threshold
        if np.count_nonzero(consensus) < 8:
            break
        try:
            h = solve_h_dlt(pa[consensus], pb[consensus])
        except DegenerateInputError:
            break
    ste = symmetric_transfer_errors(h, pa, pb)
    off_plane = np.flatnonzero(ste > threshold)
    n = len(pa)
    best_f = None
    best_count = 0
    if len(off_plane) < 2:
        return None, ste <= threshold
    ah = _homogeneous(pa)
    bh = _homogeneous(pb)
    lines = np.cross(ah @ h.T, bh)  # epipolar pencil lines through e'
    trials = 0
    target = _PARALLAX_MAX_TRIALS
    while trials < target:
        trials += 1
        i = off_plane[rng.next_below(len(off_plane))]
        j = off_plane[rng.next_below(len(off_plane))]
        if i == j:
            continue
        e = np.cross(lines[i], lines[j])
        if np.linalg.norm(e) < 1e-12:
            continue
        f = _cross_matrix(e) @ h
        if np.linalg.norm(f) < 1e-12:
            continue
        f = canonicalize_matrix(_rank2(f))
        # Pairwise epipoles from clustered parallax points are rough; try both
        # a plain and a widened-band refit and keep the better-supported one.
        f1, m1, c1 = _local_optimize(f, pa, pb, threshold)
        f2, m2, c2 = _local_optimize(f, pa, pb, threshold, widen=4.0)
        f, dist_ok, count = (f2, m2, c2) if c2 > c1 else (f1, m1, c1)
        if count > best_count:
            best_count = count
            best_f = f
            # Stop once a clean off-plane pair is unlikely to be missed; the
            # draw succeeds when both points agree with the best model so far.
            w_off = np.count_nonzero(dist_ok[off_plane]) / len(off_plane)
            target = min(
                _PARALLAX_MAX_TRIALS,
                adaptive_iterations(w_off, 2, confidence, _PARALLAX_MAX_TRIALS),
            )
    if best_f is None or best_count < _MIN_MODEL_SUPPORT:
        return None, ste <= threshold
    return best_f, ste <= threshold


def degensac(
    match_set: MatchSet, cfg: PipelineConfig, degeneracy_check: bool = True
) -> VerificationResult:
    """Hypothesize-and-verify loop with dominant-plane handling.

    Deterministic for identical (match_set, cfg); finishes with an iterated
    8-point refit on the inlier set, kept only if support does not drop.
    """
    pa, pb = match_set.points()
    n = len(pa)
    if n < _MIN_MODEL_SUPPORT:
        return VerificationResult(
            pair_id=match_set.pair_id,
            status=Status.TOO_FEW_MATCHES,
            fundamental=None,
            inlier_mask=np.zeros(n, dtype=bool),
        )
    rng = SplitMix64(pair_stream_seed(cfg.rng_seed, match_set.pair_id))
    threshold = cfg.degensac_threshold
    # One global conditioning transform per image; minimal solves then run on
    # well-scaled coordinates and candidates are mapped back to pixels.
    na, ta = normalize_points(pa)
    nb, tb = normalize_points(pb)
    tbt = tb.T
    ah = _homogeneous(pa)
    bh = _homogeneous(pb)
    thr2 = threshold * threshold

    def score(f: np.ndarray) -> np.ndarray:
        fa = ah @ f.T
        ftb = bh @ f
        num = np.einsum("ij,ij->i", bh, fa)
        den = fa[:, 0] ** 2 + fa[:, 1] ** 2 + ftb[:, 0] ** 2 + ftb[:, 1] ** 2
        return (num * num <= thr2 * den) & (den > 0)

    best_f = None
    best_mask = np.zeros(n, dtype=bool)
    best_count = 0
    best_sample: Optional[List[int]] = None
    iterations = 0
    target = cfg.degensac_max_iters
    while iterations < target:
        iterations += 1
        sample = rng.sample_distinct(n, 7)
        for fn in _seven_point_raw(na[sample], nb[sample]):
            f = tbt @ fn @ ta
            mask = score(f)
            count = int(np.count_nonzero(mask))
            if count > best_count:
                best_f = f
                best_mask = mask
                best_count = count
                best_sample = sample
                target = min(
                    cfg.degensac_max_iters,
                    adaptive_iterations(count / n, 7, cfg.degensac_confidence, cfg.degensac_max_iters),
                )
    if best_f is not None:
        # Canonical rank-2 form for the reported model; re-score so every
        # reported inlier is consistent with the final matrix.
        best_f = canonicalize_matrix(_rank2(best_f))
        best_mask = score(best_f)
        best_count = int(np.count_nonzero(best_mask))
    status = Status.NO_MODEL
    if best_f is not None and degeneracy_check and best_sample is not None:
        h_count, h = plane_degeneracy_check(pa[best_sample], pb[best_sample], threshold)
        flagged = h_count >= _PLANE_CONSENSUS_MIN and h is not None
        if not flagged and best_count >= _MIN_MODEL_SUPPORT:
            # The sample test misses when the winning 7-tuple mixes plane and
            # parallax points, so also check the model's own inlier set for a
            # dominant plane, reusing the 5-of-7 consistency fraction. The
            # homography must be fit robustly; least squares over the inliers
            # is wrecked by even a handful of off-plane points.
            inl = np.flatnonzero(best_mask)
            h_best = None
            h_best_count = 0
            for _ in range(32):
                quad = inl[rng.sample_distinct(len(inl), 4)]
                try:
                    h_cand = solve_h_4pt(pa[quad], pb[quad])
                except DegenerateInputError:
                    continue
                cons = symmetric_transfer_errors(h_cand, pa[inl], pb[inl]) <= threshold
                c = int(np.count_nonzero(cons))
                if c > h_best_count:
                    h_best, h_best_count = h_cand, c
            if h_best is not None and h_best_count / best_count >= _PLANE_DOMINANCE_MIN:
                flagged, h = True, h_best
        if flagged:
            recovered, h_consensus = _plane_parallax_recovery(
                h, pa, pb, threshold, cfg.degensac_confidence, rng
            )
            if recovered is None:
                return VerificationResult(
                    pair_id=match_set.pair_id,
                    status=Status.DEGENERATE_PLANE,
                    fundamental=None,
                    inlier_mask=h_consensus,
                    iterations_run=iterations,
                )
            mask = score(recovered)
            count = int(np.count_nonzero(mask))
            # The plane-corrupted model explains the plane only; a valid
            # epipolar geometry must explain strictly more of the set.
            if count > best_count:
                best_f, best_mask, best_count = recovered, mask, count
    if best_f is not None and best_count >= _MIN_MODEL_SUPPORT:
        # Terminal local optimization on the winning model, kept only if
        # support does not drop.
        refit, refit_mask, refit_count = _local_optimize(best_f, pa, pb, threshold)
        if refit_count >= best_count:
            best_f, best_mask, best_count = refit, refit_mask, refit_count
    if best_f is not None and best_count >= _MIN_MODEL_SUPPORT:
        status = Status.VERIFIED
    else:
        best_f = None
        best_mask = np.zeros(n, dtype=bool)
    return VerificationResult(
        pair_id=match_set.pair_id,
        status=status,
        fundamental=best_f,
        inlier_mask=best_mask,
        iterations_run=iterations,
    )
