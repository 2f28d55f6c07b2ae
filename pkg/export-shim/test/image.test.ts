import * as fs from 'fs';
import * as os from 'os';
import * as path from 'path';

import jpeg from 'jpeg-js';
import { PNG } from 'pngjs';
import { afterAll, beforeAll, describe, expect, it } from 'vitest';

import { RgbImage, decodeImageFile, resizeBilinear } from '../src/image';

let tmpDir: string;

beforeAll(() => {
  tmpDir = fs.mkdtempSync(path.join(os.tmpdir(), 'shim-image-'));
});

afterAll(() => {
  fs.rmSync(tmpDir, { recursive: true, force: true });
});

export function writePng(filePath: string, width: number, height: number,
                         fill: (x: number, y: number) => [number, number, number]): void {
  const png = new PNG({ width, height });
  for (let y = 0; y < height; y++) {
    for (let x = 0; x < width; x++) {
      const [r, g, b] = fill(x, y);
      const idx = (y * width + x) * 4;
      png.data[idx] = r;
      png.data[idx + 1] = g;
      png.data[idx + 2] = b;
      png.data[idx + 3] = 255;
    }
  }
  fs.mkdirSync(path.dirname(filePath), { recursive: true });
  fs.writeFileSync(filePath, PNG.sync.write(png));
}

function constantImage(width: number, height: number, value: number): RgbImage {
  return {
    width,
    height,
    data: new Float32Array(width * height * 3).fill(value),
  };
}

describe('decodeImageFile', () => {
  it('decodes png to rgb floats in [0,1]', () => {
    const file = path.join(tmpDir, 'a.png');
    writePng(file, 4, 3, (x) => [x * 50, 128, 255]);
    const img = decodeImageFile(file);
    expect(img.width).toBe(4);
    expect(img.height).toBe(3);
    expect(img.data[0]).toBeCloseTo(0, 6);
    expect(img.data[1]).toBeCloseTo(128 / 255, 6);
    expect(img.data[2]).toBeCloseTo(1, 6);
  });

  it('decodes jpeg', () => {
    const raw = Buffer.alloc(8 * 8 * 4, 200);
    const encoded = jpeg.encode({ data: raw, width: 8, height: 8 }, 100);
    const file = path.join(tmpDir, 'b.jpg');
    fs.writeFileSync(file, encoded.data);
    const img = decodeImageFile(file);
    expect(img.width).toBe(8);
    expect(img.height).toBe(8);
    for (const v of img.data) {
      expect(v).toBeGreaterThanOrEqual(0);
      expect(v).toBeLessThanOrEqual(1);
    }
  });

  it('rejects unknown extensions', () => {
    const file = path.join(tmpDir, 'c.gif');
    fs.writeFileSync(file, Buffer.from('nope'));
    expect(() => decodeImageFile(file)).toThrow(/unsupported/);
  });

  it('throws on corrupted bytes', () => {
    const file = path.join(tmpDir, 'broken.png');
    fs.writeFileSync(file, Buffer.from('definitely not a png'));
    expect(() => decodeImageFile(file)).toThrow();
  });
});

describe('resizeBilinear', () => {
  it('same size copies', () => {
    const img = constantImage(5, 4, 0.25);
    const out = resizeBilinear(img, 5, 4);
    expect(Array.from(out.data)).toEqual(Array.from(img.data));
  });

  it('averages a 2x2 checker into one pixel', () => {
    const img: RgbImage = {
      width: 2,
      height: 2,
      data: new Float32Array([
        0, 0, 0, 1, 1, 1,
        0, 0, 0, 1, 1, 1,
      ]),
    };
    const out = resizeBilinear(img, 1, 1);
    expect(out.data[0]).toBeCloseTo(0.5, 12);
  });

  it('keeps constants constant at any scale', () => {
    const out = resizeBilinear(constantImage(3, 7, 0.625), 221, 221);
    expect(out.width).toBe(221);
    expect(out.height).toBe(221);
    for (const v of out.data) {
      expect(v).toBe(0.625);
    }
  });

  it('rejects degenerate targets', () => {
    expect(() => resizeBilinear(constantImage(2, 2, 0), 0, 5)).toThrow(/size/);
  });
});
