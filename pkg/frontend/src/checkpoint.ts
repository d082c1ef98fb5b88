/** Single-file JSON checkpoints (topology + weight specs + base64 weights). */

import * as fs from "fs";
import * as path from "path";
import * as tf from "@tensorflow/tfjs";

export async function saveModel(model: tf.LayersModel, filePath: string): Promise<void> {
  fs.mkdirSync(path.dirname(filePath), { recursive: true });
  await model.save(
    tf.io.withSaveHandler(async (artifacts) => {
      const weightData = artifacts.weightData as ArrayBuffer;
      const payload = {
        modelTopology: artifacts.modelTopology,
        weightSpecs: artifacts.weightSpecs,
        weightData: Buffer.from(weightData).toString("base64"),
      };
      const tmp = filePath + ".tmp";
      fs.writeFileSync(tmp, JSON.stringify(payload));
      fs.renameSync(tmp, filePath);
      return {
        modelArtifactsInfo: {
          dateSaved: new Date(),
          modelTopologyType: "JSON",
        },
      };
    })
  );
}

export async function loadModel(filePath: string): Promise<tf.LayersModel> {
  const payload = JSON.parse(fs.readFileSync(filePath, "utf-8"));
  const raw = Buffer.from(payload.weightData, "base64");
  const weightData = raw.buffer.slice(raw.byteOffset, raw.byteOffset + raw.byteLength);
  return tf.loadLayersModel(
    tf.io.fromMemory({
      modelTopology: payload.modelTopology,
      weightSpecs: payload.weightSpecs,
      weightData,
    })
  );
}
