/**
 * Two-stage training.
 *
 * Stage 1 trains BT-net alone on (R~, R) pairs. Stage 2 connects the
 * pretrained BT-net behind SP-net and trains the separation with the
 * a-posteriori + a-priori loss combination; BT-net keeps fine-tuning in this
 * stage. Per-term losses stream to a CSV so ablations (--no-apriori) stay
 * comparable term by term.
 */

import * as fs from "fs";
import * as path from "path";
import * as tf from "@tensorflow/tfjs";
import { loadModel, saveModel } from "./checkpoint";
import {
  TupleBatch,
  TupleImages,
  disposeBatch,
  loadTuple,
  readManifest,
  sampleBatch,
} from "./dataset";
import { DEFAULT_FEATURES, FEATURE_FALLBACK_LABEL, FeatureExtractor } from "./features";
import {
  BtLossTerms,
  DEFAULT_WEIGHTS,
  LossWeights,
  btLoss,
  discriminatorLoss,
  spLoss,
} from "./losses";
import {
  DEFAULT_MODEL,
  ModelConfig,
  buildBtNet,
  buildDiscriminator,
  buildSpNet,
  splitSpOutput,
} from "./models";
import { SeededRandom } from "./random";

export interface TrainConfig {
  steps: number;
  batchSize: number;
  cropSize: number;
  learningRate: number;
  seed: number;
  apriori: boolean;
  logEvery: number;
  weights: LossWeights;
  model: ModelConfig;
  featureLabel: string;
}

export const DEFAULT_TRAIN: TrainConfig = {
  steps: 400,
  batchSize: 2,
  cropSize: 32,
  learningRate: 1e-4,
  seed: 11,
  apriori: true,
  logEvery: 20,
  weights: DEFAULT_WEIGHTS,
  model: DEFAULT_MODEL,
  featureLabel: FEATURE_FALLBACK_LABEL,
}

export interface TrainedNets {
  features: FeatureExtractor;
  bt: tf.LayersModel;
  sp: tf.LayersModel | null;
  dBt: tf.LayersModel;
  dSp: tf.LayersModel | null;
}

export function loadTuplesFromManifest(manifestPath: string, limit?: number): TupleImages[] {
  const records = readManifest(manifestPath);
  const chosen = limit ? records.slice(0, limit) : records;
  if (chosen.length === 0) {
    throw new Error(`no usable tuples in ${manifestPath}`);
  }
  return chosen.map(loadTuple);
}

function trainableVars(model: tf.LayersModel): tf.Variable[] {
  return model.trainableWeights.map((w) => w.read() as unknown as tf.Variable);
}

function csvWriter(csvPath: string | null, header: string[]) {
  if (!csvPath) return { row: (_: (number | string)[]) => undefined, close: () => undefined };
  fs.mkdirSync(path.dirname(csvPath), { recursive: true });
  const fd = fs.openSync(csvPath, "w");
  fs.writeSync(fd, header.join(",") + "\n");
  return {
    row: (values: (number | string)[]) => {
      fs.writeSync(fd, values.map((v) => (typeof v === "number" ? v.toPrecision(8) : v)).join(",") + "\n");
    },
    close: () => fs.closeSync(fd),
  };
}

/** Hypercolumn-augmented forward through SP-net. */
export function spForward(
  sp: tf.LayersModel,
  features: FeatureExtractor,
  input: tf.Tensor4D
): [tf.Tensor4D, tf.Tensor4D] {
  const out = sp.apply(features.hypercolumn(input)) as tf.Tensor4D;
  return splitSpOutput(out);
}

/** Hypercolumn-augmented forward through BT-net. */
export function btForward(
  bt: tf.LayersModel,
  features: FeatureExtractor,
  rTilde: tf.Tensor4D
): tf.Tensor4D {
  return bt.apply(features.hypercolumn(rTilde)) as tf.Tensor4D;
}

export interface StageResult {
  lossFirst: number;
  lossLast: number;
  rows: number;
}

/** Stage 1: BT-net on (R~, R) pairs with L1 + feature + adversarial loss. */
export async function trainBt(
  tuples: TupleImages[],
  config: TrainConfig,
  outDir: string,
  csvName = "bt_loss.csv"
): Promise<{ nets: TrainedNets; result: StageResult }> {
  const features = new FeatureExtractor({ ...DEFAULT_FEATURES, seed: config.seed + 1000 });
  const bt = buildBtNet(features.hypercolumnChannels(), config.model);
  const dBt = buildDiscriminator(config.model);
  const optG = tf.train.adam(config.learningRate);
  const optD = tf.train.adam(config.learningRate);
  const rng = new SeededRandom(config.seed);
  const csv = csvWriter(path.join(outDir, csvName), ["step", "total", "l1", "feat", "adv"]);

  let first = NaN;
  let last = NaN;
  for (let step = 0; step < config.steps; step++) {
    const batch = sampleBatch(tuples, config.batchSize, config.cropSize, rng);
    optD.minimize(() => {
      const fake = btForward(bt, features, batch.rTilde);
      return discriminatorLoss(dBt, batch.rTilde, fake, batch.r);
    }, false, trainableVars(dBt));
    let terms: BtLossTerms | null = null;
    optG.minimize(() => {
      const rPred = btForward(bt, features, batch.rTilde);
      terms = btLoss({
        rPred, rTilde: batch.rTilde, r: batch.r, d: dBt,
        features, weights: config.weights,
      });
      return terms.total;
    }, false, trainableVars(bt));
    const t = terms as unknown as BtLossTerms;
    const total = t.l1 * config.weights.l1 + t.feat + t.adv * config.weights.adv;
    if (Number.isNaN(first)) first = total;
    last = total;
    if (step % config.logEvery === 0 || step === config.steps - 1) {
      csv.row([step, total, t.l1, t.feat, t.adv]);
    }
    disposeBatch(batch);
  }
  csv.close();
  await saveModel(bt, path.join(outDir, "bt.json"));
  await saveModel(dBt, path.join(outDir, "d_bt.json"));
  return {
    nets: { features, bt, sp: null, dBt, dSp: null },
    result: { lossFirst: first, lossLast: last, rows: config.steps },
  };
}

/** Stage 2: SP-net with the pretrained BT-net attached (and fine-tuned). */
export async function trainSp(
  tuples: TupleImages[],
  config: TrainConfig,
  outDir: string,
  btCheckpoint: string,
  csvName = "sp_loss.csv"
): Promise<{ nets: TrainedNets; result: StageResult }> {
  const features = new FeatureExtractor({ ...DEFAULT_FEATURES, seed: config.seed + 1000 });
  const bt = await loadModel(btCheckpoint);
  const sp = buildSpNet(features.hypercolumnChannels(), config.model);
  const dSp = buildDiscriminator(config.model);
  const optG = tf.train.adam(config.learningRate);
  const optD = tf.train.adam(config.learningRate);
  const rng = new SeededRandom(config.seed + 1);
  const csv = csvWriter(path.join(outDir, csvName), [
    "step", "total", "posteriori", "priori", "l1T", "featT", "advT",
    "l1Rt", "featRt", "l1R", "featR",
  ]);

  const genVars = [...trainableVars(sp), ...trainableVars(bt)];
  let first = NaN;
  let last = NaN;
  for (let step = 0; step < config.steps; step++) {
    const batch = sampleBatch(tuples, config.batchSize, config.cropSize, rng);
    optD.minimize(() => {
      const [tPred] = spForward(sp, features, batch.i);
      return discriminatorLoss(dSp, batch.i, tPred, batch.t);
    }, false, trainableVars(dSp));
    let terms: ReturnType<typeof spLoss> | null = null;
    optG.minimize(() => {
      const spOut = sp.apply(features.hypercolumn(batch.i)) as tf.Tensor4D;
      terms = spLoss({
        spOut,
        btNet: wrapBtWithFeatures(bt, features),
        d: dSp,
        input: batch.i,
        t: batch.t,
        rTilde: batch.rTilde,
        r: batch.r,
        features,
        weights: config.weights,
        apriori: config.apriori,
      });
      return terms.total;
    }, false, genVars);
    const t = terms as unknown as ReturnType<typeof spLoss>;
    const total = t.posteriori + (config.apriori ? t.priori : 0);
    if (Number.isNaN(first)) first = total;
    last = total;
    if (step % config.logEvery === 0 || step === config.steps - 1) {
      csv.row([
        step, total, t.posteriori, t.priori, t.l1T, t.featT, t.advT,
        t.l1Rt, t.featRt, t.l1R, t.featR,
      ]);
    }
    disposeBatch(batch);
  }
  csv.close();
  await saveModel(sp, path.join(outDir, "sp.json"));
  await saveModel(bt, path.join(outDir, "bt_finetuned.json"));
  await saveModel(dSp, path.join(outDir, "d_sp.json"));
  return {
    nets: { features, bt, sp, dBt: dSp, dSp },
    result: { lossFirst: first, lossLast: last, rows: config.steps },
  };
}

/**
 * Present BT as a model over raw 3-channel reflections: spLoss applies its
 * btNet argument directly to R~*, so the hypercolumn augmentation is folded
 * in here.
 */
export function wrapBtWithFeatures(
  bt: tf.LayersModel,
  features: FeatureExtractor
): tf.LayersModel {
  const wrapper = {
    apply: (x: tf.Tensor4D) => btForward(bt, features, x),
  };
  return wrapper as unknown as tf.LayersModel;
}
