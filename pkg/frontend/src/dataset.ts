/**
 * Tuple loading from the renderer's job manifest.
 *
 * The renderer writes `manifest.json` plus per-tuple 8-bit sRGB previews
 * named `{index}_{member}.png` with members I, T, Rtilde, R (optionally
 * Ttilde). This module reads those files directly; values stay in the 8-bit
 * display encoding, normalized to [0,1].
 */

import * as fs from "fs";
import * as path from "path";
import * as tf from "@tensorflow/tfjs";
import { ImageData, readPng } from "./png";
import { SeededRandom } from "./random";

export interface TupleRecord {
  index: number;
  files: { [member: string]: string }; // member -> absolute png path
}

export interface TupleImages {
  i: ImageData;
  t: ImageData;
  rTilde: ImageData;
  r: ImageData;
}

/** Batch of aligned crops as NHWC tensors in [0,1]. */
export interface TupleBatch {
  i: tf.Tensor4D;
  t: tf.Tensor4D;
  rTilde: tf.Tensor4D;
  r: tf.Tensor4D;
}

export function readManifest(manifestPath: string): TupleRecord[] {
  const dir = path.dirname(manifestPath);
  const manifest = JSON.parse(fs.readFileSync(manifestPath, "utf-8"));
  const records: TupleRecord[] = [];
  for (const rec of manifest.tuples ?? []) {
    if (rec.status !== "ok") continue;
    const files: { [member: string]: string } = {};
    for (const rel of Object.keys(rec.files)) {
      if (!rel.endsWith(".png")) continue;
      const member = rel.replace(/^\d+_/, "").replace(/\.png$/, "");
      files[member] = path.join(dir, rel);
    }
    records.push({ index: rec.index, files });
  }
  return records;
}

export function loadTuple(rec: TupleRecord): TupleImages {
  for (const member of ["I", "T", "Rtilde", "R"]) {
    if (!rec.files[member]) {
      throw new Error(`tuple ${rec.index} lacks member ${member}`);
    }
  }
  return {
    i: readPng(rec.files["I"]),
    t: readPng(rec.files["T"]),
    rTilde: readPng(rec.files["Rtilde"]),
    r: readPng(rec.files["R"]),
  };
}

function cropToTensor(img: ImageData, x0: number, y0: number, size: number): tf.Tensor3D {
  const out = new Float32Array(size * size * 3);
  for (let y = 0; y < size; y++) {
    const src = ((y0 + y) * img.width + x0) * 3;
    out.set(img.data.subarray(src, src + size * 3), y * size * 3);
  }
  return tf.tensor3d(out, [size, size, 3]);
}

/** Aligned random crops across all four members of the chosen tuples. */
export function sampleBatch(
  tuples: TupleImages[],
  batchSize: number,
  cropSize: number,
  rng: SeededRandom
): TupleBatch {
  const members: { [k in keyof TupleImages]: tf.Tensor3D[] } = {
    i: [], t: [], rTilde: [], r: [],
  };
  for (let b = 0; b < batchSize; b++) {
    const tup = tuples[rng.nextInt(tuples.length)];
    const maxX = tup.i.width - cropSize;
    const maxY = tup.i.height - cropSize;
    if (maxX < 0 || maxY < 0) {
      throw new Error(`crop ${cropSize} exceeds image ${tup.i.width}x${tup.i.height}`);
    }
    const x0 = rng.nextInt(maxX + 1);
    const y0 = rng.nextInt(maxY + 1);
    members.i.push(cropToTensor(tup.i, x0, y0, cropSize));
    members.t.push(cropToTensor(tup.t, x0, y0, cropSize));
    members.rTilde.push(cropToTensor(tup.rTilde, x0, y0, cropSize));
    members.r.push(cropToTensor(tup.r, x0, y0, cropSize));
  }
  const batch: TupleBatch = {
    i: tf.stack(members.i) as tf.Tensor4D,
    t: tf.stack(members.t) as tf.Tensor4D,
    rTilde: tf.stack(members.rTilde) as tf.Tensor4D,
    r: tf.stack(members.r) as tf.Tensor4D,
  };
  for (const key of Object.keys(members) as (keyof TupleImages)[]) {
    members[key].forEach((t) => t.dispose());
  }
  return batch;
}

export function disposeBatch(batch: TupleBatch): void {
  batch.i.dispose();
  batch.t.dispose();
  batch.rTilde.dispose();
  batch.r.dispose();
}

/** Full images of one tuple as a batch of one (for evaluation). */
export function tupleToTensors(tup: TupleImages): TupleBatch {
  const toT = (img: ImageData) =>
    tf.tensor4d(img.data, [1, img.height, img.width, 3]);
  return { i: toT(tup.i), t: toT(tup.t), rTilde: toT(tup.rTilde), r: toT(tup.r) };
}

/** PSNR in dB between two tensors in [0,1] (Infinity when identical). */
export function psnr(a: tf.Tensor, b: tf.Tensor): number {
  const mse = tf.tidy(() => tf.mean(tf.square(tf.sub(a, b))).dataSync()[0]);
  if (mse === 0) return Infinity;
  return 10 * Math.log10(1 / mse);
}
