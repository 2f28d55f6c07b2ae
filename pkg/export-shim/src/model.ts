import * as fs from 'fs';
import * as path from 'path';

import * as tf from '@tensorflow/tfjs';

import { RgbImage } from './image';

/**
 * Load a TFJS layers model saved as `<dir>/model.json` plus weight shards.
 * Works without tfjs-node by assembling the artifacts in memory.
 */
export async function loadModelFromDir(dir: string): Promise<tf.LayersModel> {
  const manifestPath = path.join(dir, 'model.json');
  if (!fs.existsSync(manifestPath)) {
    throw new Error(`model load failure: ${manifestPath} does not exist`);
  }
  const manifest = JSON.parse(fs.readFileSync(manifestPath, 'utf-8'));
  const weightSpecs: tf.io.WeightsManifestEntry[] = [];
  const buffers: Buffer[] = [];
  for (const group of manifest.weightsManifest ?? []) {
    weightSpecs.push(...group.weights);
    for (const shard of group.paths) {
      buffers.push(fs.readFileSync(path.join(dir, shard)));
    }
  }
  const weightData = new Uint8Array(Buffer.concat(buffers)).buffer;
  return tf.loadLayersModel(
    tf.io.fromMemory({
      modelTopology: manifest.modelTopology,
      weightSpecs,
      weightData,
    }),
  );
}

/** Save a layers model to `<dir>/model.json` + `weights.bin`. */
export async function saveModelToDir(model: tf.LayersModel, dir: string): Promise<void> {
  fs.mkdirSync(dir, { recursive: true });
  await model.save(
    tf.io.withSaveHandler(async (artifacts) => {
      const weightData = tf.io.CompositeArrayBuffer.join(artifacts.weightData);
      fs.writeFileSync(path.join(dir, 'weights.bin'), Buffer.from(weightData));
      fs.writeFileSync(
        path.join(dir, 'model.json'),
        JSON.stringify({
          modelTopology: artifacts.modelTopology,
          weightsManifest: [{ paths: ['weights.bin'], weights: artifacts.weightSpecs }],
        }),
      );
      return { modelArtifactsInfo: { dateSaved: new Date(), modelTopologyType: 'JSON' } };
    }),
  );
}

export function layerNames(model: tf.LayersModel): string[] {
  return model.layers.map((layer) => layer.name);
}

/**
 * Model truncated at the selected activation layer (default: the final
 * layer). The flattened activation is the exported feature vector.
 */
export function truncateAtLayer(model: tf.LayersModel, layerName?: string): tf.LayersModel {
  if (!layerName) {
    return model;
  }
  const layer = model.getLayer(layerName);
  return tf.model({ inputs: model.inputs, outputs: layer.output as tf.SymbolicTensor });
}

export function expectedInputSize(model: tf.LayersModel): { width: number; height: number } {
  const shape = model.inputs[0].shape; // [batch, height, width, channels]
  return { height: shape[1] as number, width: shape[2] as number };
}

/** Run one image through the network and flatten the activation. */
export function extractFeatureVector(model: tf.LayersModel, img: RgbImage): number[] {
  const result = tf.tidy(() => {
    const input = tf.tensor4d(img.data, [1, img.height, img.width, 3]);
    const out = model.predict(input) as tf.Tensor;
    return out.flatten();
  });
  const values = Array.from(result.dataSync());
  result.dispose();
  return values;
}
