/**
 * Loss terms for the two-network training scheme.
 *
 * Every sub-network combines a pixel L1 term, a multi-level feature term
 * (weight gamma per level), and a conditional adversarial term. The
 * separation network's total is the sum of an a-posteriori part (computed on
 * predictions that still carry glass/lens effects) and an a-priori part
 * (computed after the backtrack network removes those effects).
 */

import * as tf from "@tensorflow/tfjs";
import { FeatureExtractor } from "./features";
import { discriminate, splitSpOutput } from "./models";

/** Guard inside log() calls; recorded in configs/reports. */
export const LOG_EPSILON = 1e-6;

export interface LossWeights {
  gamma: number; // feature-level weight
  adv: number;   // adversarial weight
  l1: number;    // pixel weight
}

export const DEFAULT_WEIGHTS: LossWeights = { gamma: 0.2, adv: 1.0, l1: 1.0 };

/** Mean absolute difference (normalized L1). Exactly 0 on identical inputs. */
export function l1Loss(pred: tf.Tensor, target: tf.Tensor): tf.Scalar {
  return tf.tidy(() => tf.mean(tf.abs(tf.sub(pred, target)))) as tf.Scalar;
}

/** Sum over feature levels of gamma * mean|phi_l(target) - phi_l(pred)|. */
export function featureLoss(
  pred: tf.Tensor4D,
  target: tf.Tensor4D,
  features: FeatureExtractor,
  gamma: number = DEFAULT_WEIGHTS.gamma
): tf.Scalar {
  return tf.tidy(() => {
    const actPred = features.activations(pred);
    const actTarget = features.activations(target);
    let total: tf.Scalar = tf.scalar(0);
    for (let level = 0; level < actPred.length; level++) {
      const diff = tf.mean(tf.abs(tf.sub(actTarget[level], actPred[level]))) as tf.Scalar;
      total = tf.add(total, tf.mul(diff, gamma)) as tf.Scalar;
    }
    actPred.forEach((a) => a.dispose());
    actTarget.forEach((a) => a.dispose());
    return total;
  }) as tf.Scalar;
}

/**
 * Discriminator objective: sum over the batch of
 * log D(X, f(X)) - log D(X, Y); minimizing drives fakes to 0, reals to 1.
 */
export function discriminatorLoss(
  d: tf.LayersModel,
  condition: tf.Tensor4D,
  fake: tf.Tensor4D,
  real: tf.Tensor4D
): tf.Scalar {
  return tf.tidy(() => {
    const pFake = discriminate(d, condition, fake);
    const pReal = discriminate(d, condition, real);
    const logFake = tf.log(tf.add(pFake, LOG_EPSILON));
    const logReal = tf.log(tf.add(pReal, LOG_EPSILON));
    return tf.sum(tf.sub(logFake, logReal)) as tf.Scalar;
  }) as tf.Scalar;
}

/** Generator-side adversarial term: sum over the batch of -log D(X, f(X)). */
export function generatorLoss(
  d: tf.LayersModel,
  condition: tf.Tensor4D,
  fake: tf.Tensor4D
): tf.Scalar {
  return tf.tidy(() => {
    const pFake = discriminate(d, condition, fake);
    return tf.neg(tf.sum(tf.log(tf.add(pFake, LOG_EPSILON)))) as tf.Scalar;
  }) as tf.Scalar;
}

export interface SpLossTerms {
  total: tf.Scalar;
  posteriori: number;
  priori: number;
  l1T: number;
  featT: number;
  advT: number;
  l1Rt: number;
  featRt: number;
  l1R: number;
  featR: number;
}

/**
 * Separation-network loss.
 *
 * posteriori = L1(T*,T) + Lft(T*,T) + Ladv(I,T*) + L1(R~*,R~) + Lft(R~*,R~)
 * priori     = L1(R*,R) + Lft(R*,R)   with R* = BT(R~*)
 * total      = posteriori + (a-priori enabled ? priori : 0)
 */
export function spLoss(args: {
  spOut: tf.Tensor4D;
  btNet: tf.LayersModel;
  d: tf.LayersModel;
  input: tf.Tensor4D;
  t: tf.Tensor4D;
  rTilde: tf.Tensor4D;
  r: tf.Tensor4D;
  features: FeatureExtractor;
  weights?: LossWeights;
  apriori?: boolean;
}): SpLossTerms {
  const w = args.weights ?? DEFAULT_WEIGHTS;
  const apriori = args.apriori ?? true;
  const parts: { [k: string]: tf.Scalar } = {};
  const total = tf.tidy(() => {
    const [tPred, rtPred] = splitSpOutput(args.spOut);
    parts.l1T = l1Loss(tPred, args.t);
    parts.featT = featureLoss(tPred, args.t, args.features, w.gamma);
    parts.advT = generatorLoss(args.d, args.input, tPred);
    parts.l1Rt = l1Loss(rtPred, args.rTilde);
    parts.featRt = featureLoss(rtPred, args.rTilde, args.features, w.gamma);
    let pst = tf.addN([
      tf.mul(parts.l1T, w.l1),
      parts.featT,
      tf.mul(parts.advT, w.adv),
      tf.mul(parts.l1Rt, w.l1),
      parts.featRt,
    ]) as tf.Scalar;
    const rPred = args.btNet.apply(rtPred) as tf.Tensor4D;
    parts.l1R = l1Loss(rPred, args.r);
    parts.featR = featureLoss(rPred, args.r, args.features, w.gamma);
    const pr = tf.add(tf.mul(parts.l1R, w.l1), parts.featR) as tf.Scalar;
    parts.pst = pst;
    parts.pr = pr;
    Object.values(parts).forEach((t) => tf.keep(t));
    return apriori ? (tf.add(pst, pr) as tf.Scalar) : (tf.add(pst, 0) as tf.Scalar);
  }) as tf.Scalar;
  const read = (k: string) => {
    const v = parts[k].dataSync()[0];
    return v;
  };
  const out: SpLossTerms = {
    total,
    posteriori: read("pst"),
    priori: read("pr"),
    l1T: read("l1T"),
    featT: read("featT"),
    advT: read("advT"),
    l1Rt: read("l1Rt"),
    featRt: read("featRt"),
    l1R: read("l1R"),
    featR: read("featR"),
  };
  Object.values(parts).forEach((t) => t.dispose());
  return out;
}

export interface BtLossTerms {
  total: tf.Scalar;
  l1: number;
  feat: number;
  adv: number;
}

/** Backtrack-network loss: L1(R*,R) + Lft(R*,R) + Ladv(R~, R*). */
export function btLoss(args: {
  rPred: tf.Tensor4D;
  rTilde: tf.Tensor4D;
  r: tf.Tensor4D;
  d: tf.LayersModel;
  features: FeatureExtractor;
  weights?: LossWeights;
}): BtLossTerms {
  const w = args.weights ?? DEFAULT_WEIGHTS;
  const parts: { [k: string]: tf.Scalar } = {};
  const total = tf.tidy(() => {
    parts.l1 = l1Loss(args.rPred, args.r);
    parts.feat = featureLoss(args.rPred, args.r, args.features, w.gamma);
    parts.adv = generatorLoss(args.d, args.rTilde, args.rPred);
    Object.values(parts).forEach((t) => tf.keep(t));
    return tf.addN([
      tf.mul(parts.l1, w.l1),
      parts.feat,
      tf.mul(parts.adv, w.adv),
    ]) as tf.Scalar;
  }) as tf.Scalar;
  const out: BtLossTerms = {
    total,
    l1: parts.l1.dataSync()[0],
    feat: parts.feat.dataSync()[0],
    adv: parts.adv.dataSync()[0],
  };
  Object.values(parts).forEach((t) => t.dispose());
  return out;
}
