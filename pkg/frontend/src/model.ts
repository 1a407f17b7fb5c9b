/**
 * Loading and saving tfjs layers models on disk without tfjs-node: a
 * minimal file IO handler reading/writing model.json plus weights.bin,
 * and a writer for the core pipeline's SEACL1 classifier format so toy
 * models can be shared across both implementations.
 */

import * as fs from 'node:fs';
import * as path from 'node:path';
import * as tf from '@tensorflow/tfjs';

export async function saveModel(model: tf.LayersModel, dir: string): Promise<void> {
  fs.mkdirSync(dir, { recursive: true });
  await model.save({
    async save(artifacts: tf.io.ModelArtifacts) {
      const weightData = artifacts.weightData as ArrayBuffer;
      fs.writeFileSync(path.join(dir, 'weights.bin'), Buffer.from(weightData));
      const manifest = {
        modelTopology: artifacts.modelTopology,
        weightsManifest: [
          { paths: ['weights.bin'], weights: artifacts.weightSpecs },
        ],
      };
      fs.writeFileSync(path.join(dir, 'model.json'), JSON.stringify(manifest));
      return { modelArtifactsInfo: { dateSaved: new Date(), modelTopologyType: 'JSON' } };
    },
  });
}

export async function loadModel(dir: string): Promise<tf.LayersModel> {
  const manifestPath = path.join(dir, 'model.json');
  if (!fs.existsSync(manifestPath)) {
    throw new Error(`no model.json under ${dir}`);
  }
  const manifest = JSON.parse(fs.readFileSync(manifestPath, 'utf-8'));
  const weightSpecs = manifest.weightsManifest.flatMap(
    (group: { weights: tf.io.WeightsManifestEntry[] }) => group.weights,
  );
  const buffers = manifest.weightsManifest.flatMap(
    (group: { paths: string[] }) =>
      group.paths.map((p: string) => fs.readFileSync(path.join(dir, p))),
  );
  const total = Buffer.concat(buffers);
  const weightData = total.buffer.slice(
    total.byteOffset,
    total.byteOffset + total.byteLength,
  );
  return tf.loadLayersModel({
    async load() {
      return {
        modelTopology: manifest.modelTopology,
        weightSpecs,
        weightData,
      };
    },
  });
}

/** Dense stack with biases; hidden activation tanh, linear logits. */
export function denseClassifier(
  layerDims: number[],
  weights?: { kernel: number[][]; bias: number[] }[],
): tf.LayersModel {
  const model = tf.sequential();
  for (let i = 1; i < layerDims.length; i++) {
    model.add(
      tf.layers.dense({
        inputShape: i === 1 ? [layerDims[0]] : undefined,
        units: layerDims[i],
        activation: i === layerDims.length - 1 ? undefined : 'tanh',
      }),
    );
  }
  if (weights) {
    weights.forEach((w, i) => {
      model.layers[i].setWeights([tf.tensor2d(w.kernel), tf.tensor1d(w.bias)]);
    });
  }
  return model;
}

const CLASSIFIER_MAGIC = 'SEACL1';

/**
 * SEACL1: magic, u32le layer count, u32le dims, u8 activation
 * (0=tanh, 1=softplus), then per layer f32le weights with shape
 * (out, in) row-major followed by f32le biases.
 */
export function encodeClassifier(
  layerDims: number[],
  layers: { kernel: number[][]; bias: number[] }[],
  activation: 'tanh' | 'softplus' = 'tanh',
): Buffer {
  const L = layerDims.length - 1;
  let size = 6 + 4 + 4 * layerDims.length + 1;
  for (let i = 0; i < L; i++) {
    size += 4 * layerDims[i] * layerDims[i + 1] + 4 * layerDims[i + 1];
  }
  const buf = Buffer.alloc(size);
  let off = 0;
  buf.write(CLASSIFIER_MAGIC, off, 'ascii');
  off += 6;
  buf.writeUInt32LE(L, off);
  off += 4;
  for (const d of layerDims) {
    buf.writeUInt32LE(d, off);
    off += 4;
  }
  buf.writeUInt8(activation === 'tanh' ? 0 : 1, off);
  off += 1;
  layers.forEach((layer, i) => {
    // tfjs kernels are (in, out); the file stores (out, in) row-major
    for (let o = 0; o < layerDims[i + 1]; o++) {
      for (let inp = 0; inp < layerDims[i]; inp++) {
        buf.writeFloatLE(layer.kernel[inp][o], off);
        off += 4;
      }
    }
    for (let o = 0; o < layerDims[i + 1]; o++) {
      buf.writeFloatLE(layer.bias[o], off);
      off += 4;
    }
  });
  return buf;
}
