import * as tf from "@tensorflow/tfjs";
import { FeatureExtractor } from "../src/features";
import { featureLoss, generatorLoss, LOG_EPSILON } from "../src/losses";
import { buildDiscriminator, discriminate } from "../src/models";

const features = new FeatureExtractor({ seed: 5, channels: 4, levels: 5 });
const x = tf.randomUniform([1, 8, 8, 3], 0, 1, "float32", 10) as tf.Tensor4D;
const y = tf.randomUniform([1, 8, 8, 3], 0, 1, "float32", 11) as tf.Tensor4D;

function featRef(pred: tf.Tensor4D): number {
  const ap = features.activations(pred);
  const at = features.activations(y);
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

function directional(f: (t: tf.Tensor4D) => number, t: tf.Tensor4D, v: Float32Array, h: number) {
  const data = Float32Array.from(t.dataSync());
  const bump = (s: number) => {
    const c = Float32Array.from(data);
    for (let i = 0; i < c.length; i++) c[i] += s * v[i];
    return tf.tensor4d(c, t.shape as any);
  };
  return (f(bump(h)) - f(bump(-h))) / (2 * h);
}

function probe(name: string, lossT: (inp: tf.Tensor) => tf.Scalar, lossRef: (t: tf.Tensor4D) => number, at: tf.Tensor4D) {
  const g = tf.grad(lossT)(at).dataSync();
  for (const seed of [1, 2, 3]) {
    const rng = tf.randomNormal([g.length], 0, 1, "float32", seed).dataSync() as Float32Array;
    let dot = 0; for (let i = 0; i < g.length; i++) dot += g[i] * rng[i];
    for (const h of [1e-3, 3e-3]) {
      const n = directional(lossRef, at, rng, h);
      console.log(`${name} dir${seed} h=${h}: rel ${(Math.abs(n - dot) / Math.max(Math.abs(dot), 1e-6)).toExponential(2)}`);
    }
  }
}

probe("feat", (inp) => featureLoss(inp as tf.Tensor4D, y, features), featRef, x);

const d = buildDiscriminator({ width: 8, depth: 2, seed: 12 });
const cond = tf.randomUniform([1, 8, 8, 3], 0, 1, "float32", 13) as tf.Tensor4D;
const fake = tf.randomUniform([1, 8, 8, 3], 0, 1, "float32", 14) as tf.Tensor4D;
function genRef(inp: tf.Tensor4D): number {
  const p = discriminate(d, cond, inp).dataSync();
  let s = 0; for (let i = 0; i < p.length; i++) s += -Math.log(p[i] + LOG_EPSILON);
  return s;
}
probe("gen", (inp) => generatorLoss(d, cond, inp as tf.Tensor4D), genRef, fake);
