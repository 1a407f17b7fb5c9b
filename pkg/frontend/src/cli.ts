/**
 * Adapter command line.
 *
 *   node dist/cli.js export --model <dir> --images <files...> \
 *        --methods vg,ig,sg --out <dir>
 *   node dist/cli.js validate --manifest <file>
 *
 * Exit codes: 0 success, 1 usage/validation problem, 2 IO/format problem.
 */

import * as fs from 'node:fs';
import * as path from 'node:path';

import { Method, METHODS } from './attribution.js';
import { decodeHeatmap, FormatError } from './heatmap.js';
import { exportHeatmaps, NamedImage } from './adapter.js';
import { validateManifest } from './manifest.js';
import { loadModel } from './model.js';

function parseArgs(argv: string[]): Map<string, string[]> {
  const out = new Map<string, string[]>();
  let key: string | null = null;
  for (const token of argv) {
    if (token.startsWith('--')) {
      key = token.slice(2);
      if (!out.has(key)) out.set(key, []);
    } else if (key) {
      out.get(key)!.push(token);
    } else {
      throw new Error(`unexpected positional argument ${token}`);
    }
  }
  return out;
}

function need(args: Map<string, string[]>, key: string): string[] {
  const vals = args.get(key);
  if (!vals || vals.length === 0) {
    throw new Error(`missing required flag --${key}`);
  }
  return vals;
}

async function runExport(args: Map<string, string[]>): Promise<number> {
  const modelDir = need(args, 'model')[0];
  const imagePaths = need(args, 'images');
  const outDir = need(args, 'out')[0];
  const methods = (args.get('methods')?.[0] ?? 'vg,ig,sg')
    .split(',')
    .map((m) => m.trim())
    .filter(Boolean) as Method[];
  for (const m of methods) {
    if (!METHODS.includes(m)) {
      console.error(`error: unsupported method ${m}`);
      return 1;
    }
  }
  const seed = Number(args.get('seed')?.[0] ?? '0');
  const model = await loadModel(modelDir);
  const images: NamedImage[] = imagePaths.map((p) => ({
    id: path.basename(p).replace(/\.[^.]*$/, ''),
    map: decodeHeatmap(fs.readFileSync(p)),
  }));
  const manifest = exportHeatmaps(model, images, methods, outDir, {
    sg: { seed },
  });
  console.error(`wrote ${manifest.length} heatmaps + manifest to ${outDir}`);
  return 0;
}

function runValidate(args: Map<string, string[]>): number {
  const file = need(args, 'manifest')[0];
  const report = validateManifest(file);
  for (const violation of report.violations) {
    console.error(`violation: ${violation}`);
  }
  console.log(
    `checked ${report.checked} records, ${report.violations.length} violations`,
  );
  return report.violations.length === 0 ? 0 : 1;
}

export async function main(argv: string[]): Promise<number> {
  const [command, ...rest] = argv;
  try {
    const args = parseArgs(rest);
    if (command === 'export') return await runExport(args);
    if (command === 'validate') return runValidate(args);
    console.error('usage: cli.js export|validate ...');
    return 1;
  } catch (err) {
    if (err instanceof FormatError) {
      console.error(`error: ${(err as Error).message}`);
      return 2;
    }
    if (err instanceof Error && 'code' in err) {
      console.error(`error: ${err.message}`);
      return 2; // fs errors carry a code
    }
    console.error(`error: ${(err as Error).message}`);
    return 1;
  }
}

const isDirect =
  process.argv[1] && path.resolve(process.argv[1]) === new URL(import.meta.url).pathname;
if (isDirect) {
  main(process.argv.slice(2)).then((code) => {
    process.exit(code);
  });
}
