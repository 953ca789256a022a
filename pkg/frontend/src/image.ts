/**
 * Netpbm image loading (P2/P3/P5/P6) and grayscale resampling.
 *
 * Pixel values are normalized to [0, 1]; color inputs are collapsed to
 * luma. Resampling is plain bilinear with half-pixel centers so the same
 * image downscaled twice lands on the same grid every run.
 */

export interface GrayImage {
  width: number;
  height: number;
  /** row-major, length width * height, values in [0, 1] */
  data: Float64Array;
}

export class ImageDecodeError extends Error {}

interface Token {
  value: string;
  next: number;
}

function nextToken(buf: Buffer, pos: number): Token {
  // skip whitespace and '#' comments
  while (pos < buf.length) {
    const c = buf[pos];
    if (c === 0x23) {
      while (pos < buf.length && buf[pos] !== 0x0a) pos++;
    } else if (c === 0x20 || c === 0x09 || c === 0x0a || c === 0x0d) {
      pos++;
    } else {
      break;
    }
  }
  const start = pos;
  while (pos < buf.length) {
    const c = buf[pos];
    if (c === 0x20 || c === 0x09 || c === 0x0a || c === 0x0d || c === 0x23) break;
    pos++;
  }
  if (start === pos) throw new ImageDecodeError("unexpected end of header");
  return { value: buf.toString("ascii", start, pos), next: pos };
}

function headerInt(buf: Buffer, pos: number): { value: number; next: number } {
  const tok = nextToken(buf, pos);
  const v = Number(tok.value);
  if (!Number.isInteger(v) || v < 0) throw new ImageDecodeError(`bad header integer ${tok.value}`);
  return { value: v, next: tok.next };
}

const LUMA = [0.299, 0.587, 0.114];

export function decodePnm(buf: Buffer): GrayImage {
  if (buf.length < 2) throw new ImageDecodeError("file too small");
  const magic = buf.toString("ascii", 0, 2);
  if (!["P2", "P3", "P5", "P6"].includes(magic)) {
    throw new ImageDecodeError(`unsupported magic ${JSON.stringify(magic)}`);
  }
  const color = magic === "P3" || magic === "P6";
  const binary = magic === "P5" || magic === "P6";
  let pos = 2;
  const w = headerInt(buf, pos);
  const h = headerInt(buf, w.next);
  const m = headerInt(buf, h.next);
  const width = w.value;
  const height = h.value;
  const maxval = m.value;
  if (width <= 0 || height <= 0) throw new ImageDecodeError("empty image");
  if (maxval <= 0 || maxval > 255) throw new ImageDecodeError(`unsupported maxval ${maxval}`);
  const samples = width * height * (color ? 3 : 1);
  const raw = new Float64Array(samples);
  if (binary) {
    const start = m.next + 1; // single whitespace byte after maxval
    if (buf.length - start < samples) throw new ImageDecodeError("truncated pixel data");
    for (let i = 0; i < samples; i++) raw[i] = buf[start + i] / maxval;
  } else {
    pos = m.next;
    for (let i = 0; i < samples; i++) {
      const t = headerInt(buf, pos);
      if (t.value > maxval) throw new ImageDecodeError("sample exceeds maxval");
      raw[i] = t.value / maxval;
      pos = t.next;
    }
  }
  const data = new Float64Array(width * height);
  if (color) {
    for (let i = 0; i < width * height; i++) {
      data[i] = raw[3 * i] * LUMA[0] + raw[3 * i + 1] * LUMA[1] + raw[3 * i + 2] * LUMA[2];
    }
  } else {
    data.set(raw);
  }
  return { width, height, data };
}

export function encodePgm(im: GrayImage): Buffer {
  const header = Buffer.from(`P5\n${im.width} ${im.height}\n255\n`, "ascii");
  const body = Buffer.alloc(im.width * im.height);
  for (let i = 0; i < body.length; i++) {
    body[i] = Math.max(0, Math.min(255, Math.round(im.data[i] * 255)));
  }
  return Buffer.concat([header, body]);
}

/** Bilinear sample with edge clamping; coordinates in pixel units. */
export function bilinearSample(im: GrayImage, x: number, y: number): number {
  const xm = Math.min(Math.max(x, 0), im.width - 1);
  const ym = Math.min(Math.max(y, 0), im.height - 1);
  const x0 = Math.min(Math.max(Math.floor(xm), 0), Math.max(im.width - 2, 0));
  const y0 = Math.min(Math.max(Math.floor(ym), 0), Math.max(im.height - 2, 0));
  const x1 = Math.min(x0 + 1, im.width - 1);
  const y1 = Math.min(y0 + 1, im.height - 1);
  const fx = Math.min(Math.max(xm - x0, 0), 1);
  const fy = Math.min(Math.max(ym - y0, 0), 1);
  const w = im.width;
  const d = im.data;
  return (
    d[y0 * w + x0] * (1 - fx) * (1 - fy) +
    d[y0 * w + x1] * fx * (1 - fy) +
    d[y1 * w + x0] * (1 - fx) * fy +
    d[y1 * w + x1] * fx * fy
  );
}

export function resizeImage(im: GrayImage, width: number, height: number): GrayImage {
  const sx = im.width / width;
  const sy = im.height / height;
  const data = new Float64Array(width * height);
  for (let y = 0; y < height; y++) {
    const srcY = (y + 0.5) * sy - 0.5;
    for (let x = 0; x < width; x++) {
      data[y * width + x] = bilinearSample(im, (x + 0.5) * sx - 0.5, srcY);
    }
  }
  return { width, height, data };
}

/** Long side capped at workingMaxDim; never upscales. Mirrors the pipeline. */
export function workingSize(
  width: number,
  height: number,
  workingMaxDim: number,
): { width: number; height: number; scale: number } {
  const longest = Math.max(width, height);
  if (longest <= workingMaxDim) return { width, height, scale: 1.0 };
  const scale = workingMaxDim / longest;
  if (width >= height) {
    return { width: workingMaxDim, height: Math.round(height * scale), scale };
  }
  return { width: Math.round(width * scale), height: workingMaxDim, scale };
}
