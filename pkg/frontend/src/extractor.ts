/**
 * Deterministic corner extraction and patch description.
 *
 * Detection is the min-eigenvalue (Shi-Tomasi) response of a 3x3-averaged
 * structure tensor, with strict 3x3 non-maximum candidates and quadratic
 * sub-pixel refinement. Descriptors are 8x8 mean-centered intensity
 * patches sampled over a footprint fixed in ORIGINAL-image pixels, so the
 * same point described at two pyramid scales stays comparable.
 *
 * Everything is pure float arithmetic on the inputs: identical image bytes
 * produce identical keypoints, descriptors, and output files.
 */

import { GrayImage, bilinearSample } from "./image.js";

export interface Keypoint {
  x: number;
  y: number;
  score: number;
}

export const DESCRIPTOR_DIM = 64;
const PATCH_SIDE = 8;
const PATCH_STEP_ORIGINAL = 2.0; // descriptor footprint: 16x16 original px
const DETECT_BORDER = 10;
const RESPONSE_FLOOR = 1e-6;

/** 3x3 box average with edge replication. */
function box3(src: Float64Array, w: number, h: number): Float64Array {
  const out = new Float64Array(w * h);
  for (let y = 0; y < h; y++) {
    const ym = Math.max(y - 1, 0) * w;
    const y0 = y * w;
    const yp = Math.min(y + 1, h - 1) * w;
    for (let x = 0; x < w; x++) {
      const xm = Math.max(x - 1, 0);
      const xp = Math.min(x + 1, w - 1);
      out[y0 + x] =
        (src[ym + xm] + src[ym + x] + src[ym + xp] +
          src[y0 + xm] + src[y0 + x] + src[y0 + xp] +
          src[yp + xm] + src[yp + x] + src[yp + xp]) / 9;
    }
  }
  return out;
}

function cornerResponse(im: GrayImage): Float64Array {
  const { width: w, height: h, data: d } = im;
  const gxx = new Float64Array(w * h);
  const gxy = new Float64Array(w * h);
  const gyy = new Float64Array(w * h);
  for (let y = 0; y < h; y++) {
    const ym = Math.max(y - 1, 0) * w;
    const yp = Math.min(y + 1, h - 1) * w;
    for (let x = 0; x < w; x++) {
      const xm = Math.max(x - 1, 0);
      const xp = Math.min(x + 1, w - 1);
      const gx = (d[y * w + xp] - d[y * w + xm]) / 2;
      const gy = (d[yp + x] - d[ym + x]) / 2;
      gxx[y * w + x] = gx * gx;
      gxy[y * w + x] = gx * gy;
      gyy[y * w + x] = gy * gy;
    }
  }
  const a = box3(gxx, w, h);
  const b = box3(gxy, w, h);
  const c = box3(gyy, w, h);
  const resp = new Float64Array(w * h);
  for (let i = 0; i < w * h; i++) {
    const tr = a[i] + c[i];
    const det = a[i] * c[i] - b[i] * b[i];
    const disc = Math.sqrt(Math.max((tr * tr) / 4 - det, 0));
    resp[i] = tr / 2 - disc; // smaller structure-tensor eigenvalue
  }
  return resp;
}

function subpixelOffset(rm: number, r0: number, rp: number): number {
  const d1 = (rp - rm) / 2;
  const d2 = rp - 2 * r0 + rm;
  if (d2 >= -1e-12) return 0;
  return Math.max(-0.5, Math.min(0.5, -d1 / d2));
}

/**
 * Strict local maxima of the corner response, sub-pixel refined, scores
 * normalized so the strongest corner has score 1. Capped at maxCandidates
 * by descending response before normalization.
 */
export function detectCorners(im: GrayImage, maxCandidates = 800): Keypoint[] {
  const { width: w, height: h } = im;
  const r = cornerResponse(im);
  const found: Keypoint[] = [];
  for (let y = DETECT_BORDER; y < h - DETECT_BORDER; y++) {
    for (let x = DETECT_BORDER; x < w - DETECT_BORDER; x++) {
      const v = r[y * w + x];
      if (v <= RESPONSE_FLOOR) continue;
      let isMax = true;
      let plateau = 0;
      for (let dy = -1; dy <= 1 && isMax; dy++) {
        for (let dx = -1; dx <= 1; dx++) {
          const n = r[(y + dy) * w + x + dx];
          if (n > v) {
            isMax = false;
            break;
          }
          if (n === v) plateau++;
        }
      }
      if (!isMax || plateau > 1) continue; // plateau includes the center once
      const ox = subpixelOffset(r[y * w + x - 1], v, r[y * w + x + 1]);
      const oy = subpixelOffset(r[(y - 1) * w + x], v, r[(y + 1) * w + x]);
      found.push({ x: x + ox, y: y + oy, score: v });
    }
  }
  found.sort((p, q) => q.score - p.score);
  const kept = found.slice(0, maxCandidates);
  if (kept.length > 0) {
    const top = kept[0].score;
    for (const kp of kept) kp.score = kp.score / top;
  }
  return kept;
}

/** Greedy radius suppression in descending-score order (input must be sorted). */
export function radiusNms(kps: Keypoint[], radius: number): Keypoint[] {
  const r2 = radius * radius;
  const kept: Keypoint[] = [];
  for (const kp of kps) {
    let ok = true;
    for (const k of kept) {
      const dx = k.x - kp.x;
      const dy = k.y - kp.y;
      if (dx * dx + dy * dy <= r2) {
        ok = false;
        break;
      }
    }
    if (ok) kept.push(kp);
  }
  return kept;
}

export function topK(kps: Keypoint[], k: number): Keypoint[] {
  return kps.slice(0, Math.max(0, k));
}

/**
 * One 64-dim descriptor per keypoint: an 8x8 bilinear intensity patch over
 * a 16x16 original-pixel footprint (step 2 * scaleFactor working px),
 * mean-centered and L2-normalized.
 */
export function describeKeypoints(
  im: GrayImage,
  kps: Keypoint[],
  scaleFactor: number,
): Float32Array[] {
  const step = PATCH_STEP_ORIGINAL * scaleFactor;
  const offsets: number[] = [];
  for (let i = 0; i < PATCH_SIDE; i++) offsets.push((i - (PATCH_SIDE - 1) / 2) * step);
  const out: Float32Array[] = [];
  for (const kp of kps) {
    const patch = new Float64Array(DESCRIPTOR_DIM);
    let mean = 0;
    let k = 0;
    for (const oy of offsets) {
      for (const ox of offsets) {
        const v = bilinearSample(im, kp.x + ox, kp.y + oy);
        patch[k++] = v;
        mean += v;
      }
    }
    mean /= DESCRIPTOR_DIM;
    let norm = 0;
    for (let i = 0; i < DESCRIPTOR_DIM; i++) {
      patch[i] -= mean;
      norm += patch[i] * patch[i];
    }
    norm = Math.sqrt(norm);
    const desc = new Float32Array(DESCRIPTOR_DIM);
    if (norm > 1e-12) {
      for (let i = 0; i < DESCRIPTOR_DIM; i++) desc[i] = patch[i] / norm;
    } else {
      desc.fill(1 / PATCH_SIDE); // flat patch: fixed unit vector
    }
    // renormalize at f32 so the stored rows are unit-norm at file precision
    let n32 = 0;
    for (let i = 0; i < DESCRIPTOR_DIM; i++) n32 += desc[i] * desc[i];
    n32 = Math.sqrt(n32);
    for (let i = 0; i < DESCRIPTOR_DIM; i++) desc[i] = Math.fround(desc[i] / n32);
    out.push(desc);
  }
  return out;
}
