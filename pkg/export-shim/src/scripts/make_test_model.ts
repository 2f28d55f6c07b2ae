// Builds a small deterministic convnet and saves it in the on-disk layout
// the exporter loads. Stands in for a pretrained backbone in tests and
// demos: weights are seeded, never trained.
import * as tf from '@tensorflow/tfjs';

import { saveModelToDir } from '../model';

export function buildTestModel(inputSize = 221): tf.LayersModel {
  const model = tf.sequential({ name: 'seeded-testnet' });
  model.add(
    tf.layers.conv2d({
      name: 'conv1',
      filters: 8,
      kernelSize: 5,
      strides: 4,
      activation: 'relu',
      inputShape: [inputSize, inputSize, 3],
      kernelInitializer: tf.initializers.glorotUniform({ seed: 41 }),
      biasInitializer: 'zeros',
    }),
  );
  model.add(tf.layers.maxPooling2d({ name: 'pool1', poolSize: 3, strides: 3 }));
  model.add(
    tf.layers.conv2d({
      name: 'conv2',
      filters: 16,
      kernelSize: 3,
      strides: 2,
      activation: 'relu',
      kernelInitializer: tf.initializers.glorotUniform({ seed: 42 }),
      biasInitializer: 'zeros',
    }),
  );
  model.add(tf.layers.globalAveragePooling2d({ name: 'gap' }));
  return model;
}

async function main() {
  const outDir = process.argv[2];
  const size = process.argv[3] ? Number(process.argv[3]) : 221;
  if (!outDir) {
    console.error('usage: make_test_model <output-dir> [input-size]');
    process.exitCode = 2;
    return;
  }
  const model = buildTestModel(size);
  await saveModelToDir(model, outDir);
  console.log(`saved seeded test model (input ${size}x${size}) to ${outDir}`);
}

if (require.main === module) {
  main();
}
