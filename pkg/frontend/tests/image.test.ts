import { describe, expect, it } from "vitest";

import { ImageDecodeError, bilinearSample, decodePnm, encodePgm, resizeImage, workingSize } from "../src/image.js";

describe("pnm decoding", () => {
  it("round-trips a P5 grayscale image", () => {
    const im = { width: 3, height: 2, data: Float64Array.from([0, 0.5, 1, 0.2, 0.4, 0.8]) };
    const decoded = decodePnm(encodePgm(im));
    expect(decoded.width).toBe(3);
    expect(decoded.height).toBe(2);
    for (let i = 0; i < 6; i++) {
      expect(decoded.data[i]).toBeCloseTo(im.data[i], 2);
    }
  });

  it("parses ASCII P2 with comments", () => {
    const buf = Buffer.from("P2\n# a comment\n2 2\n255\n0 128\n255 64\n", "ascii");
    const im = decodePnm(buf);
    expect(im.width).toBe(2);
    expect(Math.round(im.data[1] * 255)).toBe(128);
    expect(Math.round(im.data[2] * 255)).toBe(255);
  });

  it("collapses P6 color to luma", () => {
    const header = Buffer.from("P6\n1 1\n255\n", "ascii");
    const pixel = Buffer.from([255, 0, 0]); // pure red
    const im = decodePnm(Buffer.concat([header, pixel]));
    expect(im.data[0]).toBeCloseTo(0.299, 3);
  });

  it("rejects bad magic and truncation", () => {
    expect(() => decodePnm(Buffer.from("Q5\n1 1\n255\n\x00", "ascii"))).toThrow(ImageDecodeError);
    expect(() => decodePnm(Buffer.from("P5\n10 10\n255\nxx", "ascii"))).toThrow(ImageDecodeError);
  });
});

describe("resampling", () => {
  it("bilinear interpolates between neighbors", () => {
    const im = { width: 2, height: 1, data: Float64Array.from([0, 1]) };
    expect(bilinearSample(im, 0.5, 0)).toBeCloseTo(0.5, 6);
  });

  it("resize preserves a constant image exactly", () => {
    const im = { width: 8, height: 6, data: new Float64Array(48).fill(0.7) };
    const half = resizeImage(im, 4, 3);
    for (const v of half.data) expect(v).toBeCloseTo(0.7, 9);
  });

  it("workingSize caps the long side and never upscales", () => {
    expect(workingSize(3200, 2400, 1600)).toEqual({ width: 1600, height: 1200, scale: 0.5 });
    expect(workingSize(800, 600, 1600)).toEqual({ width: 800, height: 600, scale: 1.0 });
    expect(workingSize(1200, 2400, 1600)).toEqual({ width: 800, height: 1600, scale: 1600 / 2400 });
  });
});
