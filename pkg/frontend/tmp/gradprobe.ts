import * as tf from "@tensorflow/tfjs";
import { FeatureExtractor } from "../src/features";
import { featureLoss, generatorLoss } from "../src/losses";
import { buildDiscriminator } from "../src/models";

const features = new FeatureExtractor({ seed: 5, channels: 4, levels: 5 });
const x = tf.randomUniform([1, 8, 8, 3], 0, 1, "float32", 10) as tf.Tensor4D;
const y = tf.randomUniform([1, 8, 8, 3], 0, 1, "float32", 11) as tf.Tensor4D;

function numeric(f: (t: tf.Tensor4D) => number, t: tf.Tensor4D, idx: number, h: number) {
  const data = Float32Array.from(t.dataSync());
  const bump = (d: number) => { const c = Float32Array.from(data); c[idx] += d; return tf.tensor4d(c, t.shape as any); };
  return (f(bump(h)) - f(bump(-h))) / (2 * h);
}

const lossFn = (inp: tf.Tensor4D) => featureLoss(inp, y, features);
const analytic = tf.grad((inp: tf.Tensor) => lossFn(inp as tf.Tensor4D))(x).dataSync();
for (const h of [1e-3, 3e-3, 1e-2, 3e-2]) {
  const errs: number[] = [];
  for (const idx of [0, 10, 37, 50, 100, 120, 150, 191]) {
    const n = numeric((inp) => lossFn(inp).dataSync()[0], x, idx, h);
    const denom = Math.max(Math.abs(n), Math.abs(analytic[idx]), 1e-4);
    errs.push(Math.abs(analytic[idx] - n) / denom);
  }
  console.log("feat h=" + h, errs.map((e) => e.toExponential(1)).join(" "));
}

const d = buildDiscriminator({ width: 8, depth: 2, seed: 12 });
const cond = tf.randomUniform([1, 8, 8, 3], 0, 1, "float32", 13) as tf.Tensor4D;
const fake = tf.randomUniform([1, 8, 8, 3], 0, 1, "float32", 14) as tf.Tensor4D;
const gFn = (inp: tf.Tensor4D) => generatorLoss(d, cond, inp);
const ga = tf.grad((inp: tf.Tensor) => gFn(inp as tf.Tensor4D))(fake).dataSync();
for (const h of [1e-3, 3e-3, 1e-2, 3e-2]) {
  const errs: number[] = [];
  for (const idx of [3, 20, 50, 80, 120, 160]) {
    const n = numeric((inp) => gFn(inp).dataSync()[0], fake, idx, h);
    const denom = Math.max(Math.abs(n), Math.abs(ga[idx]), 1e-4);
    errs.push(Math.abs(ga[idx] - n) / denom);
  }
  console.log("gen h=" + h, errs.map((e) => e.toExponential(1)).join(" "));
}
