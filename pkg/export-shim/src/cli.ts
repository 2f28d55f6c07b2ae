#!/usr/bin/env node
import { DEFAULT_TARGET_SIZE, exportFeatures } from './export';

const USAGE = `usage: dogfeat-export --dataset DIR --out FILE --model DIR
                      [--layer NAME] [--model-id TEXT] [--size N]

Runs a pretrained TFJS layers model over a dataset laid out as
root/<individual_label>/<images> and writes one DOGFEAT record per image.
Images are resized to the model's input size (default ${DEFAULT_TARGET_SIZE}x${DEFAULT_TARGET_SIZE}).`;

function parseArgs(argv: string[]): Map<string, string> {
  const out = new Map<string, string>();
  for (let i = 0; i < argv.length; i += 2) {
    const flag = argv[i];
    if (!flag.startsWith('--') || i + 1 >= argv.length) {
      throw new Error(`bad argument ${flag}`);
    }
    out.set(flag.slice(2), argv[i + 1]);
  }
  return out;
}

async function main(): Promise<number> {
  const argv = process.argv.slice(2);
  if (argv.includes('--help') || argv.includes('-h')) {
    console.log(USAGE);
    return 0;
  }
  let args: Map<string, string>;
  try {
    args = parseArgs(argv);
  } catch (err) {
    console.error(String(err));
    console.error(USAGE);
    return 2;
  }
  const dataset = args.get('dataset');
  const out = args.get('out');
  const model = args.get('model');
  if (!dataset || !out || !model) {
    console.error('missing required flag (--dataset, --out, --model)');
    console.error(USAGE);
    return 2;
  }
  try {
    const result = await exportFeatures({
      datasetRoot: dataset,
      outputPath: out,
      modelDir: model,
      layer: args.get('layer'),
      modelId: args.get('model-id'),
      targetSize: args.has('size') ? Number(args.get('size')) : undefined,
    });
    console.log(
      `wrote ${result.records} records of dim ${result.dim} to ${out}` +
        (result.warnings.length ? ` (${result.warnings.length} skipped)` : ''),
    );
    return 0;
  } catch (err) {
    console.error(err instanceof Error ? err.message : String(err));
    return 1;
  }
}

main().then((code) => {
  process.exitCode = code;
});
