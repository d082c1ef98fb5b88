import * as tf from "@tensorflow/tfjs";
import { FeatureExtractor } from "../src/features";
import { featureLoss, generatorLoss, LOG_EPSILON } from "../src/losses";
import { buildDiscriminator, discriminate } from "../src/models";

const features = new FeatureExtractor({ seed: 5, channels: 4, levels: 5 });
const x = tf.randomUniform([1, 8, 8, 3], 0, 1, "float32", 10) as tf.Tensor4D;
const y = tf.randomUniform([1, 8, 8, 3], 0, 1, "float32", 11) as tf.Tensor4D;

// double-precision loss oracle from float32 activations
function featRef(pred: tf.Tensor4D, target: tf.Tensor4D): number {
  const ap = features.activations(pred);
  const at = features.activations(target);
  let total = 0;
  for (let l = 0; l < ap.length; l++) {
    const a = ap[l].dataSync(), b = at[l].dataSync();
    let s = 0;
    for (let i = 0; i < a.length; i++) s += Math.abs(b[i] - a[i]);
    total += 0.2 * (s / a.length);
  }
  ap.forEach(t => t.dispose()); at.forEach(t => t.dispose());
  return total;
}

function numeric(f: (t: tf.Tensor4D) => number, t: tf.Tensor4D, idx: number, h: number) {
  const data = Float32Array.from(t.dataSync());
  const bump = (d: number) => { const c = Float32Array.from(data); c[idx] += d; return tf.tensor4d(c, t.shape as any); };
  return (f(bump(h)) - f(bump(-h))) / (2 * h);
}

const analytic = tf.grad((inp: tf.Tensor) => featureLoss(inp as tf.Tensor4D, y, features))(x).dataSync();
for (const h of [1e-3, 3e-3]) {
  const errs: number[] = [];
  for (const idx of [0, 10, 37, 50, 100, 120, 150, 191]) {
    const n = numeric((inp) => featRef(inp, y), x, idx, h);
    const denom = Math.max(Math.abs(n), Math.abs(analytic[idx]), 1e-4);
    errs.push(Math.abs(analytic[idx] - n) / denom);
  }
  console.log("feat h=" + h, errs.map((e) => e.toExponential(1)).join(" "));
}

const d = buildDiscriminator({ width: 8, depth: 2, seed: 12 });
const cond = tf.randomUniform([1, 8, 8, 3], 0, 1, "float32", 13) as tf.Tensor4D;
const fake = tf.randomUniform([1, 8, 8, 3], 0, 1, "float32", 14) as tf.Tensor4D;
function genRef(inp: tf.Tensor4D): number {
  const p = discriminate(d, cond, inp).dataSync();
  let s = 0;
  for (let i = 0; i < p.length; i++) s += -Math.log(p[i] + LOG_EPSILON);
  return s;
}
const ga = tf.grad((inp: tf.Tensor) => generatorLoss(d, cond, inp as tf.Tensor4D))(fake).dataSync();
for (const h of [1e-3, 3e-3]) {
  const errs: number[] = [];
  for (const idx of [3, 20, 50, 80, 120, 160]) {
    const n = numeric(genRef, fake, idx, h);
    const denom = Math.max(Math.abs(n), Math.abs(ga[idx]), 1e-4);
    errs.push(Math.abs(ga[idx] - n) / denom);
  }
  console.log("gen h=" + h, errs.map((e) => e.toExponential(1)).join(" "));
}
