/**
 * The SEAHM1 heatmap format shared with the core pipeline:
 * 6-byte magic, u32le height, u32le width, f32le values row-major,
 * every value in [0, 1].
 */

export const HEATMAP_MAGIC = 'SEAHM1';

export interface Heatmap {
  height: number;
  width: number;
  values: Float32Array;
}

export class FormatError extends Error {}

export function encodeHeatmap(map: Heatmap): Buffer {
  const { height, width, values } = map;
  if (values.length !== height * width) {
    throw new FormatError(
      `expected ${height * width} values for ${height}x${width}, got ${values.length}`,
    );
  }
  const buf = Buffer.alloc(14 + 4 * values.length);
  buf.write(HEATMAP_MAGIC, 0, 'ascii');
  buf.writeUInt32LE(height, 6);
  buf.writeUInt32LE(width, 10);
  for (let i = 0; i < values.length; i++) {
    buf.writeFloatLE(values[i], 14 + 4 * i);
  }
  return buf;
}

export function decodeHeatmap(buf: Buffer): Heatmap {
  if (buf.length < 14 || buf.toString('ascii', 0, 6) !== HEATMAP_MAGIC) {
    throw new FormatError(`bad magic ${buf.toString('ascii', 0, 6)}`);
  }
  const height = buf.readUInt32LE(6);
  const width = buf.readUInt32LE(10);
  const count = height * width;
  if (buf.length !== 14 + 4 * count) {
    throw new FormatError(
      `expected ${14 + 4 * count} bytes for ${height}x${width}, got ${buf.length}`,
    );
  }
  const values = new Float32Array(count);
  for (let i = 0; i < count; i++) {
    values[i] = buf.readFloatLE(14 + 4 * i);
  }
  return { height, width, values };
}

export function checkRange(map: Heatmap): string | null {
  for (let i = 0; i < map.values.length; i++) {
    const v = map.values[i];
    if (!Number.isFinite(v) || v < 0 || v > 1) {
      return `value ${v} at index ${i} outside [0, 1]`;
    }
  }
  return null;
}

/**
 * The core pipeline's normalization: absolute value then min-max scaling;
 * constant maps become all-zero. Computed in float64 before the f32 cast
 * so both implementations quantize the same way.
 */
export function normalizeScores(raw: Float64Array | number[]): Float32Array {
  const mag = Array.from(raw, (v) => Math.abs(v));
  let lo = Infinity;
  let hi = -Infinity;
  for (const v of mag) {
    if (v < lo) lo = v;
    if (v > hi) hi = v;
  }
  const out = new Float32Array(mag.length);
  if (!(hi > lo)) return out;
  for (let i = 0; i < mag.length; i++) {
    out[i] = Math.min(1, Math.max(0, (mag[i] - lo) / (hi - lo)));
  }
  return out;
}
