/**
 * Mutual-nearest-neighbor matching on descriptor cosine similarity.
 *
 * Confidence is (cosine + 1) / 2 so it lands in [0, 1] like a learned
 * matcher score; coordinates are emitted in ORIGINAL image pixels
 * (working coordinates divided by the file's scale factor).
 */

import { FeatureFile, MatchRecord } from "./formats.js";

export class MatchInputError extends Error {}

function similarityRow(a: Float32Array, rows: Float32Array[]): Float64Array {
  const out = new Float64Array(rows.length);
  for (let j = 0; j < rows.length; j++) {
    const b = rows[j];
    let s = 0;
    for (let k = 0; k < a.length; k++) s += a[k] * b[k];
    out[j] = s;
  }
  return out;
}

export function mutualNearestNeighbors(a: FeatureFile, b: FeatureFile, scaleTag = 1.0): MatchRecord[] {
  if (a.channel !== b.channel) {
    throw new MatchInputError(`channel mismatch: ${a.channel} vs ${b.channel}`);
  }
  const da = a.descriptors;
  const db = b.descriptors;
  if (da.length === 0 || db.length === 0) return [];
  if (da[0].length !== db[0].length) {
    throw new MatchInputError(`descriptor dim mismatch: ${da[0].length} vs ${db[0].length}`);
  }
  const bestForA = new Int32Array(da.length);
  const bestSim = new Float64Array(da.length);
  const bestForB = new Int32Array(db.length).fill(-1);
  const bestSimB = new Float64Array(db.length).fill(-Infinity);
  for (let i = 0; i < da.length; i++) {
    const sims = similarityRow(da[i], db);
    let arg = 0;
    for (let j = 1; j < sims.length; j++) if (sims[j] > sims[arg]) arg = j;
    bestForA[i] = arg;
    bestSim[i] = sims[arg];
    for (let j = 0; j < sims.length; j++) {
      if (sims[j] > bestSimB[j]) {
        bestSimB[j] = sims[j];
        bestForB[j] = i;
      }
    }
  }
  const out: MatchRecord[] = [];
  for (let i = 0; i < da.length; i++) {
    const j = bestForA[i];
    if (bestForB[j] !== i) continue;
    const confidence = Math.min(Math.max((bestSim[i] + 1) / 2, 0), 1);
    const ka = a.keypoints[i];
    const kb = b.keypoints[j];
    out.push({
      ax: ka.x / a.scaleFactor,
      ay: ka.y / a.scaleFactor,
      bx: kb.x / b.scaleFactor,
      by: kb.y / b.scaleFactor,
      confidence,
      channel: a.channel,
      scaleTag,
    });
  }
  return out;
}
