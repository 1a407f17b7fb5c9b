/**
 * Bridges tfjs models to the core attribution pipeline: runs the
 * gradient-based methods on a batch of images, normalizes each map the
 * same way the core does, and writes one SEAHM1 file per (image, method)
 * plus a manifest the core's trainer can consume.
 */

import * as fs from 'node:fs';
import * as path from 'node:path';
import * as tf from '@tensorflow/tfjs';

import { attribute, Method, METHODS, predictedClass, SgOptions } from './attribution.js';
import { encodeHeatmap, Heatmap, normalizeScores } from './heatmap.js';
import { Manifest, writeManifest } from './manifest.js';

export interface NamedImage {
  id: string;
  map: Heatmap;
}

export interface ExportOptions {
  igSteps?: number;
  sg?: SgOptions;
}

export function exportHeatmaps(
  model: tf.LayersModel,
  images: NamedImage[],
  methods: Method[],
  outDir: string,
  opts: ExportOptions = {},
): Manifest {
  for (const m of methods) {
    if (!METHODS.includes(m)) throw new Error(`unsupported method ${m}`);
  }
  fs.mkdirSync(outDir, { recursive: true });
  const manifest: Manifest = [];
  for (const { id, map } of images) {
    const c = predictedClass(model, map.values);
    for (const method of methods) {
      const raw = attribute(method, model, map.values, c, opts.igSteps, opts.sg);
      const out: Heatmap = {
        height: map.height,
        width: map.width,
        values: normalizeScores(raw),
      };
      const name = `${id}_${method}.hm`;
      fs.writeFileSync(path.join(outDir, name), encodeHeatmap(out));
      manifest.push({
        image_id: id,
        method,
        heatmap_path: name,
        predicted_class: c,
        original_dims: [map.height, map.width],
      });
    }
  }
  writeManifest(manifest, outDir);
  return manifest;
}
