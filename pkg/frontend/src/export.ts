/**
 * Batch export: images -> MFK1 feature files, feature pairs -> MMT1 match
 * files, plus an output manifest the downstream pipeline can run directly.
 *
 * File writes are atomic (temp file + rename in the target directory) so a
 * crashed export never leaves a half-written file with a valid magic.
 */

import { randomBytes } from "node:crypto";
import * as fs from "node:fs";
import * as path from "node:path";

import {
  describeKeypoints,
  detectCorners,
  radiusNms,
  topK,
} from "./extractor.js";
import {
  Channel,
  FeatureFile,
  WeightsVariant,
  decodeFeatureFile,
  encodeFeatureFile,
  encodeMatchFile,
} from "./formats.js";
import { GrayImage, decodePnm, resizeImage, workingSize } from "./image.js";
import { mutualNearestNeighbors } from "./matcher.js";

export class ExportError extends Error {}

export interface ExportOptions {
  channel: Channel;
  weightsVariant: WeightsVariant;
  workingMaxDim: number;
  scaleSet: number[];
  nmsRadius: number;
  maxKeypoints: number;
}

export const DEFAULT_SCALE_SET = [1.0, Math.SQRT1_2, 0.5];

export function defaultMaxKeypoints(channel: Channel): number {
  return channel === Channel.DISK ? 6000 : 4096;
}

export function atomicWrite(filePath: string, data: Buffer): void {
  const dir = path.dirname(filePath);
  const tmp = path.join(dir, `.${path.basename(filePath)}.${randomBytes(6).toString("hex")}.tmp`);
  fs.writeFileSync(tmp, data);
  fs.renameSync(tmp, filePath);
}

export function checkWeightsSupported(channel: Channel, weights: WeightsVariant): void {
  if (channel === Channel.DISK && weights === WeightsVariant.INDOOR) {
    throw new ExportError("no indoor weights exist for the DISK channel");
  }
}

function channelName(channel: Channel): string {
  return channel === Channel.SP ? "sp" : "disk";
}

/**
 * Extract one FeatureFile per scale in opts.scaleSet. The stored
 * scale_factor is the combined working-resize and pyramid scale, and
 * keypoint coordinates are in that scale's pixel grid.
 */
export function extractFeatures(
  image: GrayImage,
  imageId: string,
  opts: ExportOptions,
): FeatureFile[] {
  checkWeightsSupported(opts.channel, opts.weightsVariant);
  const base = workingSize(image.width, image.height, opts.workingMaxDim);
  const out: FeatureFile[] = [];
  for (const pyramidScale of opts.scaleSet) {
    if (!(pyramidScale > 0 && pyramidScale <= 1)) {
      throw new ExportError(`scale ${pyramidScale} outside (0, 1]`);
    }
    const sw = Math.round(base.width * pyramidScale);
    const sh = Math.round(base.height * pyramidScale);
    const scaleFactor = base.scale * pyramidScale;
    const im =
      sw === image.width && sh === image.height ? image : resizeImage(image, sw, sh);
    const kps = topK(radiusNms(detectCorners(im), opts.nmsRadius), opts.maxKeypoints);
    const descriptors = describeKeypoints(im, kps, scaleFactor);
    out.push({
      imageId,
      channel: opts.channel,
      weightsVariant: opts.weightsVariant,
      originalSize: [image.width, image.height],
      workingSize: [sw, sh],
      scaleFactor,
      keypoints: kps,
      descriptors,
    });
  }
  return out;
}

export function exportFeatures(
  imagePath: string,
  imageId: string,
  opts: ExportOptions,
  outDir: string,
): string[] {
  let raw: Buffer;
  try {
    raw = fs.readFileSync(imagePath);
  } catch (e) {
    throw new ExportError(`cannot read image ${imagePath}: ${e}`);
  }
  const image = decodePnm(raw);
  const files = extractFeatures(image, imageId, opts);
  const paths: string[] = [];
  files.forEach((f, i) => {
    const name = `${imageId}_${channelName(opts.channel)}_s${i}.mfk1`;
    const full = path.join(outDir, name);
    atomicWrite(full, encodeFeatureFile(f));
    paths.push(full);
  });
  return paths;
}

/** Match two already-extracted feature files and write one MMT1. */
export function exportMatches(
  pairId: string,
  a: FeatureFile,
  b: FeatureFile,
  outDir: string,
  scaleTag = 1.0,
): string {
  const matches = mutualNearestNeighbors(a, b, scaleTag);
  const full = path.join(outDir, `${pairId}_${channelName(a.channel)}.mmt1`);
  atomicWrite(
    full,
    encodeMatchFile({ pairId, imageA: a.imageId, imageB: b.imageId, matches }),
  );
  return full;
}

// ------------------------------------------------------------- manifests

export interface ManifestPair {
  pairId: string;
  imageA: string;
  imageB: string;
  label: string;
}

const LABELS = new Set(["MATCH", "NONMATCH", "UNKNOWN"]);

export function parseManifest(text: string): ManifestPair[] {
  const pairs: ManifestPair[] = [];
  const seen = new Set<string>();
  text.split("\n").forEach((line, idx) => {
    const stripped = line.trim();
    if (stripped === "" || stripped.startsWith("#")) return;
    const fields = stripped.split("\t");
    if (fields.length < 4) {
      throw new ExportError(`manifest line ${idx + 1}: expected 4 tab-separated fields`);
    }
    const [pairId, imageA, imageB, label] = fields;
    if (!LABELS.has(label)) {
      throw new ExportError(`manifest line ${idx + 1}: unknown label ${label}`);
    }
    if (seen.has(pairId)) {
      throw new ExportError(`manifest line ${idx + 1}: duplicate pair_id ${pairId}`);
    }
    seen.add(pairId);
    pairs.push({ pairId, imageA, imageB, label });
  });
  return pairs;
}

export interface BatchResult {
  featureFiles: string[];
  matchFiles: string[];
  manifestPath: string;
}

function imageIdFromPath(p: string): string {
  return path.basename(p).replace(/\.[^.]+$/, "");
}

/**
 * Export the whole manifest: per-scale features for every referenced image
 * (deduplicated), optional MMT1 matches per pair, and an output manifest
 * whose key=value tokens reference the emitted files by name.
 */
export function exportManifest(
  manifestPath: string,
  opts: ExportOptions,
  outDir: string,
  emitMatches: boolean,
  outManifestName = "pairs_out.tsv",
): BatchResult {
  const pairs = parseManifest(fs.readFileSync(manifestPath, "utf-8"));
  const baseDir = path.dirname(manifestPath);
  fs.mkdirSync(outDir, { recursive: true });

  const featuresByImage = new Map<string, string[]>();
  const featureFiles: string[] = [];
  for (const pair of pairs) {
    for (const imagePath of [pair.imageA, pair.imageB]) {
      if (featuresByImage.has(imagePath)) continue;
      const full = path.isAbsolute(imagePath) ? imagePath : path.join(baseDir, imagePath);
      const emitted = exportFeatures(full, imageIdFromPath(imagePath), opts, outDir);
      featuresByImage.set(imagePath, emitted);
      featureFiles.push(...emitted);
    }
  }

  const key = channelName(opts.channel);
  const matchFiles: string[] = [];
  const lines: string[] = [];
  for (const pair of pairs) {
    let filesA = featuresByImage.get(pair.imageA)!;
    let filesB = featuresByImage.get(pair.imageB)!;
    // A self-pair matched level-for-level is the identity map, which carries
    // no geometric information; pair adjacent pyramid levels instead so the
    // correspondences come from two genuinely different extractions.
    if (pair.imageA === pair.imageB && filesA.length > 1) {
      filesA = filesA.slice(0, -1);
      filesB = filesB.slice(1);
    }
    const tokens: string[] = [];
    if (emitMatches) {
      const a = decodeFeatureFile(fs.readFileSync(filesA[0]));
      const b = decodeFeatureFile(fs.readFileSync(filesB[0]));
      const emitted = exportMatches(pair.pairId, a, b, outDir, opts.scaleSet[0]);
      matchFiles.push(emitted);
      tokens.push(`${key}_matches=${path.basename(emitted)}`);
    } else {
      tokens.push(`${key}_a=${filesA.map((p) => path.basename(p)).join(";")}`);
      tokens.push(`${key}_b=${filesB.map((p) => path.basename(p)).join(";")}`);
    }
    lines.push(
      [pair.pairId, pair.imageA, pair.imageB, pair.label, ...tokens].join("\t"),
    );
  }
  const outManifest = path.join(outDir, outManifestName);
  atomicWrite(outManifest, Buffer.from(lines.join("\n") + "\n", "utf-8"));
  return { featureFiles, matchFiles, manifestPath: outManifest };
}
