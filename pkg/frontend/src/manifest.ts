/**
 * The export manifest: one record per (image, method) heatmap file, with
 * a validator that re-checks every referenced file's magic, dimensions,
 * and value range.
 */

import * as fs from 'node:fs';
import * as path from 'node:path';

import { checkRange, decodeHeatmap, FormatError } from './heatmap.js';

export interface ManifestRecord {
  image_id: string;
  method: string;
  heatmap_path: string;
  predicted_class: number;
  original_dims: [number, number];
}

export type Manifest = ManifestRecord[];

export function writeManifest(manifest: Manifest, outDir: string): string {
  const file = path.join(outDir, 'manifest.json');
  fs.writeFileSync(file, JSON.stringify(manifest, null, 1));
  return file;
}

export function readManifest(file: string): Manifest {
  const doc = JSON.parse(fs.readFileSync(file, 'utf-8'));
  if (!Array.isArray(doc)) throw new FormatError('manifest must be a JSON list');
  return doc as Manifest;
}

export interface ValidationReport {
  checked: number;
  violations: string[];
}

export function validateManifest(file: string): ValidationReport {
  const manifest = readManifest(file);
  const root = path.dirname(file);
  const violations: string[] = [];
  for (const record of manifest) {
    const target = path.isAbsolute(record.heatmap_path)
      ? record.heatmap_path
      : path.join(root, record.heatmap_path);
    if (!fs.existsSync(target)) {
      violations.push(`${record.image_id}/${record.method}: missing file ${target}`);
      continue;
    }
    let map;
    try {
      map = decodeHeatmap(fs.readFileSync(target));
    } catch (err) {
      violations.push(`${record.image_id}/${record.method}: ${(err as Error).message}`);
      continue;
    }
    const [h, w] = record.original_dims;
    if (map.height !== h || map.width !== w) {
      violations.push(
        `${record.image_id}/${record.method}: dims ${map.height}x${map.width} != ${h}x${w}`,
      );
    }
    const range = checkRange(map);
    if (range) {
      violations.push(`${record.image_id}/${record.method}: ${range}`);
    }
  }
  return { checked: manifest.length, violations };
}
