import * as tf from "@tensorflow/tfjs";
import { describe, expect, it } from "vitest";
import { FeatureExtractor } from "../src/features";
import {
  buildBtNet,
  buildDiscriminator,
  buildSpNet,
  discriminate,
  splitSpOutput,
} from "../src/models";

const features = new FeatureExtractor({ seed: 31, channels: 4, levels: 5 });
const IN_CH = features.hypercolumnChannels();

describe("network shape contracts", () => {
  it("sp-net maps augmented input to two finite 3-channel images", () => {
    const sp = buildSpNet(IN_CH);
    const x = tf.randomUniform([2, 16, 16, 3], 0, 1, "float32", 1) as tf.Tensor4D;
    const out = sp.apply(features.hypercolumn(x)) as tf.Tensor4D;
    expect(out.shape).toEqual([2, 16, 16, 6]);
    const [t, r] = splitSpOutput(out);
    expect(t.shape).toEqual([2, 16, 16, 3]);
    expect(r.shape).toEqual([2, 16, 16, 3]);
    const vals = out.dataSync();
    expect(vals.every((v) => Number.isFinite(v) && v >= 0 && v <= 1)).toBe(true);
  });

  it("bt-net maps augmented reflection to one 3-channel image", () => {
    const bt = buildBtNet(IN_CH);
    const x = tf.randomUniform([1, 16, 16, 3], 0, 1, "float32", 2) as tf.Tensor4D;
    const out = bt.apply(features.hypercolumn(x)) as tf.Tensor4D;
    expect(out.shape).toEqual([1, 16, 16, 3]);
  });

  it("fully convolutional: doubling input resolution doubles output resolution", () => {
    const sp = buildSpNet(IN_CH);
    const small = tf.randomUniform([1, 16, 16, 3], 0, 1, "float32", 3) as tf.Tensor4D;
    const large = tf.randomUniform([1, 32, 32, 3], 0, 1, "float32", 4) as tf.Tensor4D;
    const outSmall = sp.apply(features.hypercolumn(small)) as tf.Tensor4D;
    const outLarge = sp.apply(features.hypercolumn(large)) as tf.Tensor4D;
    expect(outSmall.shape.slice(1, 3)).toEqual([16, 16]);
    expect(outLarge.shape.slice(1, 3)).toEqual([32, 32]);
  });

  it("discriminator produces one probability per sample", () => {
    const d = buildDiscriminator();
    const cond = tf.randomUniform([3, 16, 16, 3], 0, 1, "float32", 5) as tf.Tensor4D;
    const img = tf.randomUniform([3, 16, 16, 3], 0, 1, "float32", 6) as tf.Tensor4D;
    const p = discriminate(d, cond, img);
    expect(p.shape).toEqual([3, 1]);
    const vals = p.dataSync();
    expect(vals.every((v) => v > 0 && v < 1)).toBe(true);
  });

  it("seeded builders are reproducible", () => {
    const a = buildSpNet(IN_CH).getWeights().map((w) => w.dataSync());
    const b = buildSpNet(IN_CH).getWeights().map((w) => w.dataSync());
    for (let i = 0; i < a.length; i++) {
      expect(Array.from(a[i])).toEqual(Array.from(b[i]));
    }
  });
});

describe("feature extractor", () => {
  it("emits five levels at halving resolutions", () => {
    const x = tf.randomUniform([1, 32, 32, 3], 0, 1, "float32", 7) as tf.Tensor4D;
    const acts = features.activations(x);
    expect(acts.length).toBe(5);
    expect(acts.map((a) => a.shape[1])).toEqual([32, 16, 8, 4, 2]);
    acts.forEach((a) => a.dispose());
  });

  it("hypercolumn stacks input plus upsampled activations", () => {
    const x = tf.randomUniform([1, 16, 16, 3], 0, 1, "float32", 8) as tf.Tensor4D;
    const h = features.hypercolumn(x);
    expect(h.shape).toEqual([1, 16, 16, IN_CH]);
  });

  it("is frozen: same input, same features across calls", () => {
    const x = tf.randomUniform([1, 8, 8, 3], 0, 1, "float32", 9) as tf.Tensor4D;
    const a = features.hypercolumn(x).dataSync();
    const b = features.hypercolumn(x).dataSync();
    expect(Array.from(a)).toEqual(Array.from(b));
  });
});
