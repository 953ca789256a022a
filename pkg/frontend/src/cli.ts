#!/usr/bin/env node
/**
 * Command-line entry point.
 *
 *   extractor-bridge export --manifest pairs.tsv --channel sp --weights outdoor \
 *       --out-dir out/ [--working-max-dim 1600] [--scales 1.0,0.7071,0.5] \
 *       [--nms 4] [--max-keypoints N] [--matches] [--emit-manifest pairs_out.tsv]
 *
 * Exit codes: 0 success, 1 operational error, 2 usage error.
 */

import { parseArgs } from "node:util";

import { DEFAULT_SCALE_SET, ExportError, defaultMaxKeypoints, exportManifest } from "./export.js";
import { Channel, WeightsVariant } from "./formats.js";
import { ImageDecodeError } from "./image.js";

class UsageError extends Error {}

function parseChannel(value: string): Channel {
  if (value === "sp") return Channel.SP;
  if (value === "disk") return Channel.DISK;
  throw new UsageError(`unknown channel ${value} (expected sp or disk)`);
}

function parseWeights(value: string): WeightsVariant {
  if (value === "outdoor") return WeightsVariant.OUTDOOR;
  if (value === "indoor") return WeightsVariant.INDOOR;
  throw new UsageError(`unknown weights variant ${value} (expected outdoor or indoor)`);
}

function parseScales(value: string): number[] {
  const scales = value.split(",").map((s) => Number(s.trim()));
  if (scales.length === 0 || scales.some((s) => !Number.isFinite(s))) {
    throw new UsageError(`bad scale list ${value}`);
  }
  return scales;
}

export function main(argv: string[]): number {
  try {
    if (argv[0] !== "export") {
      throw new UsageError("usage: extractor-bridge export --manifest FILE --channel sp|disk --weights outdoor|indoor --out-dir DIR");
    }
    const { values } = parseArgs({
      args: argv.slice(1),
      options: {
        manifest: { type: "string" },
        channel: { type: "string", default: "sp" },
        weights: { type: "string", default: "outdoor" },
        "out-dir": { type: "string" },
        "working-max-dim": { type: "string", default: "1600" },
        scales: { type: "string" },
        nms: { type: "string", default: "4" },
        "max-keypoints": { type: "string" },
        matches: { type: "boolean", default: false },
        "emit-manifest": { type: "string", default: "pairs_out.tsv" },
      },
    });
    if (!values.manifest || !values["out-dir"]) {
      throw new UsageError("--manifest and --out-dir are required");
    }
    const channel = parseChannel(values.channel!);
    const opts = {
      channel,
      weightsVariant: parseWeights(values.weights!),
      workingMaxDim: Number(values["working-max-dim"]),
      scaleSet: values.scales ? parseScales(values.scales) : [...DEFAULT_SCALE_SET],
      nmsRadius: Number(values.nms),
      maxKeypoints: values["max-keypoints"]
        ? Number(values["max-keypoints"])
        : defaultMaxKeypoints(channel),
    };
    const result = exportManifest(
      values.manifest,
      opts,
      values["out-dir"]!,
      values.matches!,
      values["emit-manifest"],
    );
    for (const f of [...result.featureFiles, ...result.matchFiles]) console.log(f);
    console.log(result.manifestPath);
    return 0;
  } catch (e) {
    if (e instanceof UsageError || (e instanceof TypeError && /option/i.test(e.message))) {
      console.error(`usage error: ${(e as Error).message}`);
      return 2;
    }
    if (e instanceof ExportError || e instanceof ImageDecodeError || (e as NodeJS.ErrnoException).code === "ENOENT") {
      console.error(`error: ${(e as Error).message}`);
      return 1;
    }
    throw e;
  }
}

const isDirect =
  typeof process.argv[1] === "string" &&
  import.meta.url.endsWith(process.argv[1].split("/").pop() ?? "");
if (isDirect) {
  process.exit(main(process.argv.slice(2)));
}
