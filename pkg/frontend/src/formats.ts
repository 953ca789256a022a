/**
 * MFK1 (per-image features) and MMT1 (per-pair matches) binary codecs.
 *
 * Both formats are little-endian with fixed field order and no padding.
 * Encoders are pure functions of their input, so identical values always
 * produce identical bytes.
 */

export const MFK_MAGIC = "MFK1";
export const MMT_MAGIC = "MMT1";
export const FORMAT_VERSION = 1;

export enum Channel {
  SP = 0,
  DISK = 1,
}

export enum WeightsVariant {
  OUTDOOR = 0,
  INDOOR = 1,
}

export interface FeatureFile {
  imageId: string;
  channel: Channel;
  weightsVariant: WeightsVariant;
  originalSize: [number, number];
  workingSize: [number, number];
  scaleFactor: number;
  /** n rows of (x, y, score) in working coordinates */
  keypoints: Array<{ x: number; y: number; score: number }>;
  /** n rows, unit-norm float32 */
  descriptors: Float32Array[];
}

export interface MatchRecord {
  ax: number;
  ay: number;
  bx: number;
  by: number;
  confidence: number;
  channel: Channel;
  scaleTag: number;
}

export interface MatchFile {
  pairId: string;
  imageA: string;
  imageB: string;
  matches: MatchRecord[];
}

export class FormatError extends Error {}

class ByteWriter {
  private parts: Buffer[] = [];

  ascii(s: string): void {
    this.parts.push(Buffer.from(s, "ascii"));
  }

  u8(v: number): void {
    const b = Buffer.alloc(1);
    b.writeUInt8(v);
    this.parts.push(b);
  }

  u32(v: number): void {
    const b = Buffer.alloc(4);
    b.writeUInt32LE(v);
    this.parts.push(b);
  }

  f32(v: number): void {
    const b = Buffer.alloc(4);
    b.writeFloatLE(v);
    this.parts.push(b);
  }

  f64(v: number): void {
    const b = Buffer.alloc(8);
    b.writeDoubleLE(v);
    this.parts.push(b);
  }

  string(s: string): void {
    const raw = Buffer.from(s, "utf-8");
    this.u32(raw.length);
    this.parts.push(raw);
  }

  bytes(): Buffer {
    return Buffer.concat(this.parts);
  }
}

class ByteReader {
  private pos = 0;

  constructor(private buf: Buffer) {}

  take(n: number): Buffer {
    if (this.pos + n > this.buf.length) {
      throw new FormatError(`need ${n} bytes at offset ${this.pos}`);
    }
    const out = this.buf.subarray(this.pos, this.pos + n);
    this.pos += n;
    return out;
  }

  u8(): number {
    return this.take(1).readUInt8();
  }

  u32(): number {
    return this.take(4).readUInt32LE();
  }

  f32(): number {
    return this.take(4).readFloatLE();
  }

  f64(): number {
    return this.take(8).readDoubleLE();
  }

  string(): string {
    const n = this.u32();
    return this.take(n).toString("utf-8");
  }

  atEnd(): boolean {
    return this.pos === this.buf.length;
  }
}

export function encodeFeatureFile(f: FeatureFile): Buffer {
  if (f.keypoints.length !== f.descriptors.length) {
    throw new FormatError("keypoint/descriptor count mismatch");
  }
  const d = f.descriptors.length > 0 ? f.descriptors[0].length : 0;
  const w = new ByteWriter();
  w.ascii(MFK_MAGIC);
  w.u32(FORMAT_VERSION);
  w.u8(f.channel);
  w.u8(f.weightsVariant);
  w.string(f.imageId);
  w.u32(f.originalSize[0]);
  w.u32(f.originalSize[1]);
  w.u32(f.workingSize[0]);
  w.u32(f.workingSize[1]);
  w.f64(f.scaleFactor);
  w.u32(f.keypoints.length);
  w.u32(d);
  for (const kp of f.keypoints) {
    w.f32(kp.x);
    w.f32(kp.y);
    w.f32(kp.score);
  }
  for (const row of f.descriptors) {
    if (row.length !== d) throw new FormatError("ragged descriptor rows");
    for (const v of row) w.f32(v);
  }
  return w.bytes();
}

export function decodeFeatureFile(buf: Buffer): FeatureFile {
  const r = new ByteReader(buf);
  if (r.take(4).toString("ascii") !== MFK_MAGIC) throw new FormatError("bad MFK1 magic");
  const version = r.u32();
  if (version !== FORMAT_VERSION) throw new FormatError(`unsupported version ${version}`);
  const channel = r.u8() as Channel;
  const weightsVariant = r.u8() as WeightsVariant;
  const imageId = r.string();
  const originalSize: [number, number] = [r.u32(), r.u32()];
  const workingSize: [number, number] = [r.u32(), r.u32()];
  const scaleFactor = r.f64();
  const n = r.u32();
  const d = r.u32();
  const keypoints = [];
  for (let i = 0; i < n; i++) {
    keypoints.push({ x: r.f32(), y: r.f32(), score: r.f32() });
  }
  const descriptors: Float32Array[] = [];
  for (let i = 0; i < n; i++) {
    const row = new Float32Array(d);
    for (let j = 0; j < d; j++) row[j] = r.f32();
    descriptors.push(row);
  }
  if (!r.atEnd()) throw new FormatError("trailing bytes");
  return { imageId, channel, weightsVariant, originalSize, workingSize, scaleFactor, keypoints, descriptors };
}

export function encodeMatchFile(m: MatchFile): Buffer {
  const w = new ByteWriter();
  w.ascii(MMT_MAGIC);
  w.u32(FORMAT_VERSION);
  w.string(m.pairId);
  w.string(m.imageA);
  w.string(m.imageB);
  w.u32(m.matches.length);
  for (const rec of m.matches) {
    w.f32(rec.ax);
    w.f32(rec.ay);
    w.f32(rec.bx);
    w.f32(rec.by);
    w.f32(rec.confidence);
    w.u8(rec.channel);
    w.f32(rec.scaleTag);
  }
  return w.bytes();
}

export function decodeMatchFile(buf: Buffer): MatchFile {
  const r = new ByteReader(buf);
  if (r.take(4).toString("ascii") !== MMT_MAGIC) throw new FormatError("bad MMT1 magic");
  const version = r.u32();
  if (version !== FORMAT_VERSION) throw new FormatError(`unsupported version ${version}`);
  const pairId = r.string();
  const imageA = r.string();
  const imageB = r.string();
  const count = r.u32();
  const matches: MatchRecord[] = [];
  for (let i = 0; i < count; i++) {
    matches.push({
      ax: r.f32(),
      ay: r.f32(),
      bx: r.f32(),
      by: r.f32(),
      confidence: r.f32(),
      channel: r.u8() as Channel,
      scaleTag: r.f32(),
    });
  }
  if (!r.atEnd()) throw new FormatError("trailing bytes");
  return { pairId, imageA, imageB, matches };
}
