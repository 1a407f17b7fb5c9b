/**
 * Gradient-based attribution against a tfjs model's class logit, using
 * the framework's autodiff: plain gradients, integrated gradients with a
 * midpoint Riemann sum, their noise-smoothed average, and the
 * input-times-gradient product.
 */

import * as tf from '@tensorflow/tfjs';

export type Method = 'vg' | 'ig' | 'sg' | 'ixg';

export const METHODS: Method[] = ['vg', 'ig', 'sg', 'ixg'];

export interface SgOptions {
  samples?: number;
  sigma?: number | null;
  seed?: number;
}

export function predictedClass(model: tf.LayersModel, x: Float32Array): number {
  return tf.tidy(() => {
    const logits = model.predict(tf.tensor2d([Array.from(x)])) as tf.Tensor2D;
    return logits.argMax(1).dataSync()[0];
  });
}

/** Per-row gradient of the class-c logit for a batch of inputs. */
function classGradients(model: tf.LayersModel, xs: tf.Tensor2D, c: number): tf.Tensor2D {
  const grad = tf.grad((t: tf.Tensor) => {
    const logits = model.apply(t) as tf.Tensor2D;
    // summing over the batch leaves each row's own gradient in place
    return logits.slice([0, c], [-1, 1]).sum();
  });
  return grad(xs) as tf.Tensor2D;
}

export function vanillaGradient(
  model: tf.LayersModel,
  x: Float32Array,
  c: number,
): Float64Array {
  const data = tf.tidy(
    () => classGradients(model, tf.tensor2d([Array.from(x)]), c).dataSync() as Float32Array,
  );
  return Float64Array.from(data);
}

export function integratedGradients(
  model: tf.LayersModel,
  x: Float32Array,
  c: number,
  steps = 50,
  baseline?: Float32Array,
): Float64Array {
  if (steps < 1) throw new Error('steps must be >= 1');
  const base = baseline ?? new Float32Array(x.length);
  const mean = tf.tidy(() => {
    const rows: number[][] = [];
    for (let t = 0; t < steps; t++) {
      const alpha = (t + 0.5) / steps;
      rows.push(Array.from(x, (v, i) => base[i] + alpha * (v - base[i])));
    }
    const grads = classGradients(model, tf.tensor2d(rows), c);
    return grads.mean(0).dataSync() as Float32Array;
  });
  return Float64Array.from(x, (v, i) => (v - base[i]) * mean[i]);
}

export function smoothIntegratedGradients(
  model: tf.LayersModel,
  x: Float32Array,
  c: number,
  steps = 50,
  opts: SgOptions = {},
): Float64Array {
  const samples = opts.samples ?? 25;
  const seed = opts.seed ?? 0;
  let sigma = opts.sigma;
  if (sigma === undefined || sigma === null) {
    let lo = Infinity;
    let hi = -Infinity;
    for (const v of x) {
      if (v < lo) lo = v;
      if (v > hi) hi = v;
    }
    sigma = 0.1 * (hi - lo);
  }
  if (sigma === 0) return integratedGradients(model, x, c, steps);
  const total = new Float64Array(x.length);
  for (let j = 0; j < samples; j++) {
    const noise = tf.tidy(() =>
      Array.from(tf.randomNormal([x.length], 0, sigma as number, 'float32', seed + j).dataSync()),
    );
    const noisy = Float32Array.from(x, (v, i) => v + noise[i]);
    const ig = integratedGradients(model, noisy, c, steps);
    for (let i = 0; i < total.length; i++) total[i] += ig[i];
  }
  for (let i = 0; i < total.length; i++) total[i] /= samples;
  return total;
}

export function inputTimesGradient(
  model: tf.LayersModel,
  x: Float32Array,
  c: number,
): Float64Array {
  const g = vanillaGradient(model, x, c);
  return Float64Array.from(x, (v, i) => v * g[i]);
}

export function attribute(
  method: Method,
  model: tf.LayersModel,
  x: Float32Array,
  c: number,
  igSteps = 50,
  sg: SgOptions = {},
): Float64Array {
  switch (method) {
    case 'vg':
      return vanillaGradient(model, x, c);
    case 'ig':
      return integratedGradients(model, x, c, igSteps);
    case 'sg':
      return smoothIntegratedGradients(model, x, c, igSteps, sg);
    case 'ixg':
      return inputTimesGradient(model, x, c);
    default:
      throw new Error(`unsupported method ${method}`);
  }
}
