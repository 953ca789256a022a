/** Deterministic synthetic test images. */

import { GrayImage } from "../src/image.js";

/** splitmix64 mapped to floats in [0, 1); fully deterministic across runs. */
export function makeRng(seed: number): () => number {
  let state = BigInt(seed) & 0xffffffffffffffffn;
  return () => {
    state = (state + 0x9e3779b97f4a7c15n) & 0xffffffffffffffffn;
    let z = state;
    z = ((z ^ (z >> 30n)) * 0xbf58476d1ce4e5b9n) & 0xffffffffffffffffn;
    z = ((z ^ (z >> 27n)) * 0x94d049bb133111ebn) & 0xffffffffffffffffn;
    z = z ^ (z >> 31n);
    return Number(z >> 11n) / 2 ** 53;
  };
}

/**
 * High-contrast pattern of random axis-aligned rectangles. Its corners are
 * sharp and scale-stable, which is what a corner detector needs to be
 * repeatable across pyramid levels.
 */
export function rectanglePattern(seed: number, width = 1200, height = 900, count = 260): GrayImage {
  const rng = makeRng(seed);
  const data = new Float64Array(width * height).fill(0.5);
  for (let r = 0; r < count; r++) {
    const x0 = Math.floor(rng() * (width - 30));
    const y0 = Math.floor(rng() * (height - 30));
    const w = 12 + Math.floor(rng() * 48);
    const h = 12 + Math.floor(rng() * 48);
    const v = rng();
    for (let y = y0; y < Math.min(y0 + h, height); y++) {
      for (let x = x0; x < Math.min(x0 + w, width); x++) {
        data[y * width + x] = v;
      }
    }
  }
  return { width, height, data };
}

/** Smooth low-texture gradient: few corners, for negative-control pairs. */
export function smoothGradient(width = 1200, height = 900): GrayImage {
  const data = new Float64Array(width * height);
  for (let y = 0; y < height; y++) {
    for (let x = 0; x < width; x++) {
      data[y * width + x] = 0.5 + 0.4 * Math.sin(x / 300) * Math.cos(y / 260);
    }
  }
  return { width, height, data };
}
