import * as fs from "fs";
import { PNG } from "pngjs";

/** Decoded image: float RGB in [0,1], shape [height, width, 3] flattened row-major. */
export interface ImageData {
  width: number;
  height: number;
  data: Float32Array; // length = width * height * 3
}

export function readPng(path: string): ImageData {
  const png = PNG.sync.read(fs.readFileSync(path));
  const { width, height } = png;
  const out = new Float32Array(width * height * 3);
  for (let i = 0; i < width * height; i++) {
    out[i * 3] = png.data[i * 4] / 255;
    out[i * 3 + 1] = png.data[i * 4 + 1] / 255;
    out[i * 3 + 2] = png.data[i * 4 + 2] / 255;
  }
  return { width, height, data: out };
}

export function writePng(path: string, img: ImageData): void {
  const png = new PNG({ width: img.width, height: img.height });
  for (let i = 0; i < img.width * img.height; i++) {
    for (let c = 0; c < 3; c++) {
      png.data[i * 4 + c] = Math.max(0, Math.min(255, Math.round(img.data[i * 3 + c] * 255)));
    }
    png.data[i * 4 + 3] = 255;
  }
  fs.writeFileSync(path, PNG.sync.write(png));
}
