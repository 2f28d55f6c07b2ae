import * as fs from 'fs';
import * as path from 'path';

/** One image file inside a labeled dataset tree. */
export interface DatasetEntry {
  label: string;
  /** file name without extension; the record key used by feature consumers */
  imageId: string;
  filePath: string;
}

/**
 * Walk `root/<label>/<files>` in the canonical order: labels sorted
 * lexicographically, file names sorted within each label.
 */
export function listDataset(root: string): DatasetEntry[] {
  if (!fs.existsSync(root) || !fs.statSync(root).isDirectory()) {
    throw new Error(`dataset root ${root} is not a directory`);
  }
  const labels = fs
    .readdirSync(root)
    .filter((name) => fs.statSync(path.join(root, name)).isDirectory())
    .sort();
  if (labels.length === 0) {
    throw new Error(`dataset root ${root} contains no individual directories`);
  }
  const entries: DatasetEntry[] = [];
  for (const label of labels) {
    const dir = path.join(root, label);
    const files = fs
      .readdirSync(dir)
      .filter((name) => fs.statSync(path.join(dir, name)).isFile())
      .sort();
    for (const file of files) {
      const stem = file.includes('.') ? file.slice(0, file.lastIndexOf('.')) : file;
      entries.push({ label, imageId: stem, filePath: path.join(dir, file) });
    }
  }
  return entries;
}
