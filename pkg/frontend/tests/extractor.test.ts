import { describe, expect, it } from "vitest";

import { DESCRIPTOR_DIM, detectCorners, radiusNms, topK } from "../src/extractor.js";
import { checkWeightsSupported, extractFeatures, ExportError } from "../src/export.js";
import { Channel, WeightsVariant } from "../src/formats.js";
import { rectanglePattern, smoothGradient } from "./helpers.js";

const OPTS = {
  channel: Channel.SP,
  weightsVariant: WeightsVariant.OUTDOOR,
  workingMaxDim: 1600,
  scaleSet: [1.0],
  nmsRadius: 4,
  maxKeypoints: 500,
};

describe("detection", () => {
  it("finds many corners on a rectangle pattern, few on a smooth gradient", () => {
    const textured = detectCorners(rectanglePattern(1, 400, 300, 60));
    const smooth = detectCorners(smoothGradient(400, 300));
    expect(textured.length).toBeGreaterThan(100);
    expect(smooth.length).toBeLessThan(textured.length / 4);
  });

  it("is deterministic and score-normalized", () => {
    const im = rectanglePattern(2, 400, 300, 60);
    const a = detectCorners(im);
    const b = detectCorners(im);
    expect(a).toEqual(b);
    expect(a[0].score).toBe(1);
    for (const kp of a) {
      expect(kp.score).toBeGreaterThan(0);
      expect(kp.score).toBeLessThanOrEqual(1);
    }
  });

  it("radius NMS enforces pairwise separation", () => {
    const kps = detectCorners(rectanglePattern(3, 400, 300, 60));
    const kept = radiusNms(kps, 6);
    for (let i = 0; i < kept.length; i++) {
      for (let j = i + 1; j < kept.length; j++) {
        const d = Math.hypot(kept[i].x - kept[j].x, kept[i].y - kept[j].y);
        expect(d).toBeGreaterThan(6);
      }
    }
  });

  it("topK keeps the highest-score prefix", () => {
    const kps = detectCorners(rectanglePattern(4, 400, 300, 60));
    const k = topK(kps, 10);
    expect(k.length).toBe(10);
    expect(k[0].score).toBeGreaterThanOrEqual(k[9].score);
  });
});

describe("extractFeatures", () => {
  it("emits one feature set per scale with consistent metadata", () => {
    const im = rectanglePattern(5, 640, 480, 100);
    const sets = extractFeatures(im, "img", { ...OPTS, scaleSet: [1.0, 0.5] });
    expect(sets.length).toBe(2);
    expect(sets[0].workingSize).toEqual([640, 480]);
    expect(sets[1].workingSize).toEqual([320, 240]);
    expect(sets[1].scaleFactor).toBe(0.5);
    for (const s of sets) {
      expect(s.keypoints.length).toBe(s.descriptors.length);
      expect(s.keypoints.length).toBeLessThanOrEqual(OPTS.maxKeypoints);
      for (const kp of s.keypoints) {
        expect(kp.x).toBeGreaterThanOrEqual(0);
        expect(kp.x).toBeLessThan(s.workingSize[0]);
        expect(kp.y).toBeLessThan(s.workingSize[1]);
      }
    }
  });

  it("descriptor rows are unit-norm at float32 precision", () => {
    const sets = extractFeatures(rectanglePattern(6, 400, 300, 60), "img", OPTS);
    for (const row of sets[0].descriptors) {
      expect(row.length).toBe(DESCRIPTOR_DIM);
      let n = 0;
      for (const v of row) n += v * v;
      expect(Math.abs(Math.sqrt(n) - 1)).toBeLessThan(1e-4);
    }
  });

  it("resizes oversized images to the working cap", () => {
    const im = rectanglePattern(7, 3200, 2400, 400);
    const sets = extractFeatures(im, "big", OPTS);
    expect(sets[0].workingSize).toEqual([1600, 1200]);
    expect(sets[0].scaleFactor).toBe(0.5);
    expect(sets[0].originalSize).toEqual([3200, 2400]);
  });

  it("rejects the indoor/DISK combination", () => {
    expect(() => checkWeightsSupported(Channel.DISK, WeightsVariant.INDOOR)).toThrow(ExportError);
    expect(() =>
      extractFeatures(rectanglePattern(8, 100, 100, 10), "img", {
        ...OPTS,
        channel: Channel.DISK,
        weightsVariant: WeightsVariant.INDOOR,
      }),
    ).toThrow(ExportError);
    expect(() => checkWeightsSupported(Channel.SP, WeightsVariant.INDOOR)).not.toThrow();
  });
});
