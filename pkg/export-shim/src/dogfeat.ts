/**
 * DOGFEAT feature-file grammar (UTF-8, LF):
 *
 *   DOGFEAT 1 <count> <dim>
 *   # comment lines may follow the header
 *   <individual_label>\t<image_id>\t<v1> <v2> ... <v_dim>
 *
 * Floats are written in shortest round-trip decimal form. Labels and ids
 * must not contain tabs or newlines.
 */

export interface FeatureRecord {
  individualLabel: string;
  imageId: string;
  vector: number[];
}

export const DOGFEAT_MAGIC = 'DOGFEAT';
export const DOGFEAT_VERSION = 1;

function checkToken(value: string, what: string): string {
  if (value.includes('\t') || value.includes('\n') || value.length === 0) {
    throw new Error(`${what} must be non-empty and contain no tab/newline: ${JSON.stringify(value)}`);
  }
  return value;
}

export function formatValue(v: number): string {
  if (!Number.isFinite(v)) {
    throw new Error(`non-finite feature value ${v}`);
  }
  return String(v);
}

export function serializeDogfeat(
  records: FeatureRecord[],
  dim: number,
  comments: string[] = [],
): string {
  const lines: string[] = [`${DOGFEAT_MAGIC} ${DOGFEAT_VERSION} ${records.length} ${dim}`];
  for (const comment of comments) {
    lines.push(`# ${comment}`);
  }
  const seen = new Set<string>();
  for (const record of records) {
    checkToken(record.individualLabel, 'individual label');
    checkToken(record.imageId, 'image id');
    if (record.vector.length !== dim) {
      throw new Error(
        `record ${record.individualLabel}/${record.imageId} has ` +
          `${record.vector.length} values, expected ${dim}`,
      );
    }
    const key = `${record.individualLabel}\t${record.imageId}`;
    if (seen.has(key)) {
      throw new Error(`duplicate record key ${record.individualLabel}/${record.imageId}`);
    }
    seen.add(key);
    const values = record.vector.map(formatValue).join(' ');
    lines.push(`${record.individualLabel}\t${record.imageId}\t${values}`);
  }
  return lines.join('\n') + '\n';
}

/** Strict reader used by the shim's own tests to prove round-trips. */
export function parseDogfeat(text: string): { dim: number; records: FeatureRecord[] } {
  const lines = text.split('\n');
  if (lines[lines.length - 1] === '') {
    lines.pop();
  }
  if (lines.length === 0) {
    throw new Error('line 1: missing header');
  }
  const header = lines[0].split(' ');
  if (header.length !== 4 || header[0] !== DOGFEAT_MAGIC || header[1] !== String(DOGFEAT_VERSION)) {
    throw new Error(`line 1: bad header ${JSON.stringify(lines[0])}`);
  }
  const count = Number(header[2]);
  const dim = Number(header[3]);
  const records: FeatureRecord[] = [];
  for (let i = 1; i < lines.length; i++) {
    const line = lines[i];
    if (line.startsWith('#')) {
      continue;
    }
    const parts = line.split('\t');
    if (parts.length !== 3) {
      throw new Error(`line ${i + 1}: expected 3 tab-separated fields`);
    }
    const vector = parts[2].split(' ').map(Number);
    if (vector.length !== dim || vector.some((v) => !Number.isFinite(v))) {
      throw new Error(`line ${i + 1}: bad value row`);
    }
    records.push({ individualLabel: parts[0], imageId: parts[1], vector });
  }
  if (records.length !== count) {
    throw new Error(`header declares ${count} records, found ${records.length}`);
  }
  return { dim, records };
}
