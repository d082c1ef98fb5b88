import { execFileSync } from "child_process";
import * as fs from "fs";
import * as path from "path";

/** Render the fixture dataset (once) through the renderer's CLI. */
export default function setup(): void {
  const manifest = path.join(__dirname, ".fixtures", "out", "manifest.json");
  if (fs.existsSync(manifest)) return;
  execFileSync("python3", [path.join(__dirname, "gen_fixtures.py")], {
    stdio: "inherit",
  });
}
