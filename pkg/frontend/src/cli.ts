/** CLI: train-bt, train-sp, eval over rendered tuple datasets. */

import * as fs from "fs";
import * as path from "path";
import * as tf from "@tensorflow/tfjs";
import yargs from "yargs";
import { hideBin } from "yargs/helpers";
import { loadModel } from "./checkpoint";
import { psnr, tupleToTensors } from "./dataset";
import { DEFAULT_FEATURES, FeatureExtractor } from "./features";
import {
  DEFAULT_TRAIN,
  TrainConfig,
  btForward,
  loadTuplesFromManifest,
  spForward,
  trainBt,
  trainSp,
} from "./train";

function trainConfig(argv: any): TrainConfig {
  return {
    ...DEFAULT_TRAIN,
    steps: argv.steps,
    batchSize: argv.batch,
    cropSize: argv.crop,
    learningRate: argv.lr,
    seed: argv.seed,
    apriori: !(argv.noApriori ?? false),
    logEvery: argv.logEvery,
  };
}

const commonTrainOptions = {
  dataset: { type: "string" as const, demandOption: true, describe: "path to manifest.json" },
  out: { type: "string" as const, demandOption: true, describe: "output directory" },
  steps: { type: "number" as const, default: DEFAULT_TRAIN.steps },
  batch: { type: "number" as const, default: DEFAULT_TRAIN.batchSize },
  crop: { type: "number" as const, default: DEFAULT_TRAIN.cropSize },
  lr: { type: "number" as const, default: DEFAULT_TRAIN.learningRate },
  seed: { type: "number" as const, default: DEFAULT_TRAIN.seed },
  limit: { type: "number" as const, describe: "use only the first N tuples" },
  logEvery: { type: "number" as const, default: DEFAULT_TRAIN.logEvery },
};

export async function main(argv: string[]): Promise<number> {
  let exitCode = 0;
  await yargs(argv)
    .command(
      "train-bt",
      "stage 1: train the backtrack network on (R~, R) pairs",
      commonTrainOptions,
      async (args) => {
        const tuples = loadTuplesFromManifest(args.dataset!, args.limit);
        const { result } = await trainBt(tuples, trainConfig(args), args.out!);
        console.log(
          `bt training done: loss ${result.lossFirst.toFixed(4)} -> ` +
          `${result.lossLast.toFixed(4)} over ${result.rows} steps; ` +
          `checkpoints in ${args.out}`
        );
      }
    )
    .command(
      "train-sp",
      "stage 2: train the separation network with the pretrained BT-net",
      {
        ...commonTrainOptions,
        btCheckpoint: {
          type: "string" as const, demandOption: true,
          describe: "bt.json from stage 1",
        },
        noApriori: {
          type: "boolean" as const, default: false,
          describe: "ablation: drop the a-priori loss term",
        },
      },
      async (args) => {
        const tuples = loadTuplesFromManifest(args.dataset!, args.limit);
        const { result } = await trainSp(
          tuples, trainConfig(args), args.out!, args.btCheckpoint!
        );
        console.log(
          `sp training done (apriori=${!args.noApriori}): loss ` +
          `${result.lossFirst.toFixed(4)} -> ${result.lossLast.toFixed(4)}; ` +
          `checkpoints in ${args.out}`
        );
      }
    )
    .command(
      "eval",
      "PSNR of separated outputs against ground truth on a test set",
      {
        testset: { type: "string" as const, demandOption: true, describe: "manifest.json" },
        sp: { type: "string" as const, demandOption: true },
        bt: { type: "string" as const, demandOption: true },
        seed: { type: "number" as const, default: DEFAULT_TRAIN.seed },
        report: { type: "string" as const },
        limit: { type: "number" as const },
      },
      async (args) => {
        const features = new FeatureExtractor({
          ...DEFAULT_FEATURES, seed: args.seed + 1000,
        });
        const sp = await loadModel(args.sp!);
        const bt = await loadModel(args.bt!);
        const tuples = loadTuplesFromManifest(args.testset!, args.limit);
        const rows: any[] = [];
        for (const tup of tuples) {
          const batch = tupleToTensors(tup);
          const [tPred, rtPred] = spForward(sp, features, batch.i);
          const rPred = btForward(bt, features, rtPred);
          rows.push({
            psnr_T_pred: psnr(tPred, batch.t),
            psnr_T_input: psnr(batch.i, batch.t),
            psnr_R_pred: psnr(rPred, batch.r),
            psnr_R_glass: psnr(batch.rTilde, batch.r),
          });
          tf.dispose([batch.i, batch.t, batch.rTilde, batch.r, tPred, rtPred, rPred]);
        }
        const mean = (k: string) =>
          rows.reduce((s, r) => s + r[k], 0) / rows.length;
        const summary = {
          features: features.label,
          tuples: rows.length,
          mean_psnr_T_pred: mean("psnr_T_pred"),
          mean_psnr_T_input: mean("psnr_T_input"),
          mean_psnr_R_pred: mean("psnr_R_pred"),
          mean_psnr_R_glass: mean("psnr_R_glass"),
          per_tuple: rows,
        };
        console.log(
          `T: pred ${summary.mean_psnr_T_pred.toFixed(2)} dB vs input ` +
          `${summary.mean_psnr_T_input.toFixed(2)} dB | R: pred ` +
          `${summary.mean_psnr_R_pred.toFixed(2)} dB vs glass ` +
          `${summary.mean_psnr_R_glass.toFixed(2)} dB [${features.label}]`
        );
        if (args.report) {
          fs.mkdirSync(path.dirname(args.report), { recursive: true });
          fs.writeFileSync(args.report, JSON.stringify(summary, null, 1));
        }
      }
    )
    .demandCommand(1)
    .strict()
    .fail((msg, err) => {
      console.error(msg ?? err?.message);
      exitCode = 2;
    })
    .parseAsync();
  return exitCode;
}

if (require.main === module) {
  main(hideBin(process.argv)).then((code) => {
    process.exitCode = code;
  });
}
