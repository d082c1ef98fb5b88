/**
 * Frozen feature extractor for the perceptual loss and hypercolumn inputs.
 *
 * The reference configuration would use five layers of a pretrained
 * perceptual network; no pretrained weights ship in this offline toolchain,
 * so the documented fallback is a fixed stack of seeded random convolutions
 * (label: "random-feature fallback"). Reports produced with it are internally
 * consistent but not comparable to pretrained-feature numbers.
 */

import * as tf from "@tensorflow/tfjs";

export const FEATURE_FALLBACK_LABEL = "random-feature fallback";

export interface FeatureExtractorConfig {
  seed: number;
  channels: number; // per level
  levels: number;
}

export const DEFAULT_FEATURES: FeatureExtractorConfig = {
  seed: 1234,
  channels: 4,
  levels: 5,
};

export class FeatureExtractor {
  readonly label = FEATURE_FALLBACK_LABEL;
  readonly config: FeatureExtractorConfig;
  private kernels: tf.Tensor4D[] = [];
  private biases: tf.Tensor1D[] = [];

  constructor(config: FeatureExtractorConfig = DEFAULT_FEATURES) {
    this.config = config;
    let inCh = 3;
    for (let level = 0; level < config.levels; level++) {
      // Glorot-style scale keeps activations O(1) through the stack
      const fanIn = 3 * 3 * inCh;
      const scale = Math.sqrt(2 / fanIn);
      this.kernels.push(
        tf.tidy(() =>
          tf.mul(
            tf.randomNormal([3, 3, inCh, config.channels], 0, 1, "float32",
              config.seed + level),
            scale
          )
        ) as tf.Tensor4D
      );
      this.biases.push(tf.zeros([config.channels]));
      inCh = config.channels;
    }
  }

  /**
   * Activations of every level, each at half the previous resolution.
   * Inputs are NHWC in [0,1].
   */
  activations(x: tf.Tensor4D): tf.Tensor4D[] {
    return tf.tidy(() => {
      const out: tf.Tensor4D[] = [];
      let h: tf.Tensor4D = x;
      for (let level = 0; level < this.config.levels; level++) {
        const stride = level === 0 ? 1 : 2;
        h = tf.relu(
          tf.add(
            tf.conv2d(h, this.kernels[level], stride, "same"),
            this.biases[level]
          )
        ) as tf.Tensor4D;
        out.push(h);
      }
      out.forEach((t) => tf.keep(t));
      return out;
    });
  }

  /** Input concatenated with all levels upsampled back to input size. */
  hypercolumn(x: tf.Tensor4D): tf.Tensor4D {
    return tf.tidy(() => {
      const acts = this.activations(x);
      const size: [number, number] = [x.shape[1], x.shape[2]];
      const ups = acts.map((a) =>
        a.shape[1] === size[0] && a.shape[2] === size[1]
          ? a
          : tf.image.resizeBilinear(a, size)
      );
      const out = tf.concat([x, ...ups], -1) as tf.Tensor4D;
      acts.forEach((a) => a.dispose());
      return out;
    });
  }

  /** Channels produced by hypercolumn() for a 3-channel input. */
  hypercolumnChannels(): number {
    return 3 + this.config.levels * this.config.channels;
  }

  dispose(): void {
    this.kernels.forEach((k) => k.dispose());
    this.biases.forEach((b) => b.dispose());
  }
}
