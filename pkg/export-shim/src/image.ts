import * as fs from 'fs';
import * as path from 'path';

import jpeg from 'jpeg-js';
import { PNG } from 'pngjs';

/** RGB raster with channel values in [0, 1], row-major HxWx3. */
export interface RgbImage {
  width: number;
  height: number;
  data: Float32Array; // length = width * height * 3
}

export function decodeImageFile(filePath: string): RgbImage {
  const buffer = fs.readFileSync(filePath);
  const ext = path.extname(filePath).toLowerCase();
  let width: number;
  let height: number;
  let rgba: Uint8Array;
  if (ext === '.png') {
    const decoded = PNG.sync.read(buffer);
    width = decoded.width;
    height = decoded.height;
    rgba = decoded.data;
  } else if (ext === '.jpg' || ext === '.jpeg') {
    const decoded = jpeg.decode(buffer, { useTArray: true });
    width = decoded.width;
    height = decoded.height;
    rgba = decoded.data;
  } else {
    throw new Error(`unsupported image extension ${ext || '(none)'}`);
  }
  const data = new Float32Array(width * height * 3);
  for (let px = 0; px < width * height; px++) {
    data[px * 3] = rgba[px * 4] / 255;
    data[px * 3 + 1] = rgba[px * 4 + 1] / 255;
    data[px * 3 + 2] = rgba[px * 4 + 2] / 255;
  }
  return { width, height, data };
}

/**
 * Bilinear resize with pixel-center alignment (output pixel i samples the
 * source at (i + 0.5) * in/out - 0.5, clamped to the frame).
 */
export function resizeBilinear(img: RgbImage, outWidth: number, outHeight: number): RgbImage {
  if (outWidth < 1 || outHeight < 1) {
    throw new Error(`bad target size ${outWidth}x${outHeight}`);
  }
  if (outWidth === img.width && outHeight === img.height) {
    return { width: img.width, height: img.height, data: img.data.slice() };
  }
  const out = new Float32Array(outWidth * outHeight * 3);
  const sy = img.height / outHeight;
  const sx = img.width / outWidth;
  for (let i = 0; i < outHeight; i++) {
    let fy = (i + 0.5) * sy - 0.5;
    fy = Math.min(Math.max(fy, 0), img.height - 1);
    const y0 = Math.floor(fy);
    const y1 = Math.min(y0 + 1, img.height - 1);
    const ty = fy - y0;
    for (let j = 0; j < outWidth; j++) {
      let fx = (j + 0.5) * sx - 0.5;
      fx = Math.min(Math.max(fx, 0), img.width - 1);
      const x0 = Math.floor(fx);
      const x1 = Math.min(x0 + 1, img.width - 1);
      const tx = fx - x0;
      for (let c = 0; c < 3; c++) {
        const p00 = img.data[(y0 * img.width + x0) * 3 + c];
        const p01 = img.data[(y0 * img.width + x1) * 3 + c];
        const p10 = img.data[(y1 * img.width + x0) * 3 + c];
        const p11 = img.data[(y1 * img.width + x1) * 3 + c];
        const top = p00 + tx * (p01 - p00);
        const bottom = p10 + tx * (p11 - p10);
        out[(i * outWidth + j) * 3 + c] = top + ty * (bottom - top);
      }
    }
  }
  return { width: outWidth, height: outHeight, data: out };
}
