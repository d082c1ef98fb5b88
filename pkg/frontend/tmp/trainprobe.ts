import * as path from "path";
import { DEFAULT_TRAIN, loadTuplesFromManifest, trainBt } from "../src/train";

async function run() {
  const manifest = path.join(__dirname, "..", "test", ".fixtures", "out", "manifest.json");
  const tuples = loadTuplesFromManifest(manifest, 10);
  const t0 = Date.now();
  const { result } = await trainBt(tuples, { ...DEFAULT_TRAIN, steps: 30 }, "tmp/probe_bt");
  const dt = (Date.now() - t0) / 1000;
  console.log(`30 steps in ${dt.toFixed(1)}s (${(dt / 30 * 1000).toFixed(0)} ms/step)`);
  console.log(`loss ${result.lossFirst.toFixed(4)} -> ${result.lossLast.toFixed(4)}`);
}
run();
