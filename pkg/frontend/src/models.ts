/**
 * Toy-scale fully convolutional networks.
 *
 * SP-net separates the input (augmented with hypercolumn features) into a
 * predicted transmission and a predicted glass-reflection; BT-net removes
 * the glass/lens effects from the predicted reflection. Both share the same
 * trunk structure; SP-net has two 3-channel outputs, BT-net one. The trunks
 * never pool, so doubling the input resolution doubles the output
 * resolution.
 */

import * as tf from "@tensorflow/tfjs";

export interface ModelConfig {
  width: number;      // trunk channel count
  depth: number;      // number of trunk conv layers
  seed: number;
}

export const DEFAULT_MODEL: ModelConfig = { width: 16, depth: 4, seed: 7 };

function trunk(input: tf.SymbolicTensor, cfg: ModelConfig, tag: string): tf.SymbolicTensor {
  // plain 3x3 stride-1 convs: tfjs cannot backprop dilated conv2d yet
  let h = input;
  for (let layer = 0; layer < cfg.depth; layer++) {
    h = tf.layers
      .conv2d({
        filters: cfg.width,
        kernelSize: 3,
        padding: "same",
        activation: "relu",
        kernelInitializer: tf.initializers.heNormal({ seed: cfg.seed + layer }),
        name: `${tag}_conv${layer}`,
      })
      .apply(h) as tf.SymbolicTensor;
  }
  return h;
}

/** SP-net: (I + features) -> [T*, R~*] stacked as 6 channels in [0,1]. */
export function buildSpNet(inChannels: number, cfg: ModelConfig = DEFAULT_MODEL): tf.LayersModel {
  const input = tf.input({ shape: [null, null, inChannels], name: "sp_in" });
  const h = trunk(input, cfg, "sp");
  const out = tf.layers
    .conv2d({
      filters: 6,
      kernelSize: 1,
      activation: "sigmoid",
      kernelInitializer: tf.initializers.glorotUniform({ seed: cfg.seed + 100 }),
      name: "sp_out",
    })
    .apply(h) as tf.SymbolicTensor;
  return tf.model({ inputs: input, outputs: out, name: "sp_net" });
}

/** Split SP-net output into (T*, R~*). */
export function splitSpOutput(out: tf.Tensor4D): [tf.Tensor4D, tf.Tensor4D] {
  const t = tf.slice(out, [0, 0, 0, 0], [-1, -1, -1, 3]) as tf.Tensor4D;
  const r = tf.slice(out, [0, 0, 0, 3], [-1, -1, -1, 3]) as tf.Tensor4D;
  return [t, r];
}

/** BT-net: (R~* + features) -> R* in [0,1]. */
export function buildBtNet(inChannels: number, cfg: ModelConfig = DEFAULT_MODEL): tf.LayersModel {
  const input = tf.input({ shape: [null, null, inChannels], name: "bt_in" });
  const h = trunk(input, cfg, "bt");
  const out = tf.layers
    .conv2d({
      filters: 3,
      kernelSize: 1,
      activation: "sigmoid",
      kernelInitializer: tf.initializers.glorotUniform({ seed: cfg.seed + 200 }),
      name: "bt_out",
    })
    .apply(h) as tf.SymbolicTensor;
  return tf.model({ inputs: input, outputs: out, name: "bt_net" });
}

/**
 * Conditional patch discriminator over (condition, image) pairs.
 * Returns per-sample probabilities: the mean over patch outputs.
 */
export function buildDiscriminator(cfg: ModelConfig = DEFAULT_MODEL): tf.LayersModel {
  const input = tf.input({ shape: [null, null, 6], name: "d_in" });
  let h = input;
  const widths = [cfg.width / 2, cfg.width];
  for (let layer = 0; layer < widths.length; layer++) {
    h = tf.layers
      .conv2d({
        filters: widths[layer],
        kernelSize: 3,
        strides: 2,
        padding: "same",
        activation: "relu",
        kernelInitializer: tf.initializers.heNormal({ seed: cfg.seed + 300 + layer }),
        name: `d_conv${layer}`,
      })
      .apply(h) as tf.SymbolicTensor;
  }
  const patch = tf.layers
    .conv2d({
      filters: 1,
      kernelSize: 3,
      padding: "same",
      activation: "sigmoid",
      kernelInitializer: tf.initializers.glorotUniform({ seed: cfg.seed + 400 }),
      name: "d_patch",
    })
    .apply(h) as tf.SymbolicTensor;
  const prob = tf.layers
    .globalAveragePooling2d({ name: "d_prob" })
    .apply(patch) as tf.SymbolicTensor;
  return tf.model({ inputs: input, outputs: prob, name: "discriminator" });
}

/** Apply the discriminator to a (condition, image) pair. */
export function discriminate(
  d: tf.LayersModel,
  condition: tf.Tensor4D,
  image: tf.Tensor4D
): tf.Tensor2D {
  return d.apply(tf.concat([condition, image], -1)) as tf.Tensor2D;
}
