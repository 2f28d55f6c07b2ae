import * as fs from 'fs';
import * as path from 'path';

import * as tf from '@tensorflow/tfjs';

import { listDataset } from './dataset';
import { FeatureRecord, serializeDogfeat } from './dogfeat';
import { decodeImageFile, resizeBilinear } from './image';
import {
  expectedInputSize,
  extractFeatureVector,
  loadModelFromDir,
  truncateAtLayer,
} from './model';

/** Network input side length used by the reference pipeline. */
export const DEFAULT_TARGET_SIZE = 221;

export interface ExportConfig {
  datasetRoot: string;
  outputPath: string;
  modelDir: string;
  /** activation layer to export; default: the model's final layer */
  layer?: string;
  /** free-form identifier recorded in the output comments */
  modelId?: string;
  /** override only deliberately; the pipeline expects 221 */
  targetSize?: number;
}

export interface ExportResult {
  records: number;
  dim: number;
  warnings: string[];
}

export async function exportFeatures(config: ExportConfig): Promise<ExportResult> {
  const targetSize = config.targetSize ?? DEFAULT_TARGET_SIZE;
  const entries = listDataset(config.datasetRoot);

  // A broken model path must be fatal, unlike per-image problems.
  const base = await loadModelFromDir(config.modelDir);
  const model = truncateAtLayer(base, config.layer);
  const layerName = config.layer ?? base.layers[base.layers.length - 1].name;
  const input = expectedInputSize(base);
  const width = Number.isFinite(input.width) && input.width ? input.width : targetSize;
  const height = Number.isFinite(input.height) && input.height ? input.height : targetSize;

  const warnings: string[] = [];
  const records: FeatureRecord[] = [];
  let dim = -1;
  for (const entry of entries) {
    let vector: number[];
    try {
      const raw = decodeImageFile(entry.filePath);
      const resized = resizeBilinear(raw, width, height);
      vector = extractFeatureVector(model, resized);
    } catch (err) {
      const message = `skipped unreadable image ${entry.label}/${entry.imageId}: ${
        err instanceof Error ? err.message : String(err)
      }`;
      warnings.push(message);
      console.warn(message);
      continue;
    }
    if (dim === -1) {
      dim = vector.length;
    }
    records.push({ individualLabel: entry.label, imageId: entry.imageId, vector });
  }
  if (records.length === 0) {
    throw new Error('no image in the dataset could be processed');
  }

  const comments = [
    `model: ${config.modelId ?? path.basename(config.modelDir)}`,
    `layer: ${layerName}`,
    `preprocessing: rgb in [0,1], bilinear resize to ${width}x${height}`,
    `backend: tfjs ${tf.version.tfjs}`,
  ];
  fs.mkdirSync(path.dirname(path.resolve(config.outputPath)), { recursive: true });
  fs.writeFileSync(config.outputPath, serializeDogfeat(records, dim, comments), 'utf-8');
  return { records: records.length, dim, warnings };
}
