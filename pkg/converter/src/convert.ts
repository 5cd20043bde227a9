/** File and directory conversion: each MAT archive becomes one canonical CSV. */

import * as fs from "node:fs";
import * as path from "node:path";

import { ExtractOptions, extractRecord, toCanonicalCsv } from "./canonical.js";
import { MatParseError, parseMat } from "./matfile.js";

export interface ConvertOptions extends ExtractOptions {
  rateHz?: number;
  /** When converting a directory, keep only these subject ids. */
  subjects?: number[];
}

export interface ConvertResult {
  input: string;
  output: string;
  subject: number;
  exercise: number;
  samples: number;
  channels: number;
}

export function convertFile(
  inputPath: string,
  outDir: string,
  options: ConvertOptions = {},
): ConvertResult {
  let blob: Uint8Array;
  try {
    blob = fs.readFileSync(inputPath);
  } catch (err) {
    throw new MatParseError(`cannot read ${inputPath}: ${err}`);
  }
  const record = extractRecord(parseMat(blob), options);
  const csv = toCanonicalCsv(record, options.rateHz);
  fs.mkdirSync(outDir, { recursive: true });
  const output = path.join(outDir, `subject${record.subject}_e${record.exercise}.csv`);
  fs.writeFileSync(output, csv, "utf8");
  return {
    input: inputPath,
    output,
    subject: record.subject,
    exercise: record.exercise,
    samples: record.emg.dims[0],
    channels: record.emg.dims[1],
  };
}

export function convertPath(
  inputPath: string,
  outDir: string,
  options: ConvertOptions = {},
): ConvertResult[] {
  const stat = fs.statSync(inputPath, { throwIfNoEntry: false });
  if (!stat) {
    throw new MatParseError(`input not found: ${inputPath}`);
  }
  if (stat.isFile()) {
    return [convertFile(inputPath, outDir, options)];
  }
  const entries = fs
    .readdirSync(inputPath)
    .filter((name) => name.toLowerCase().endsWith(".mat"))
    .sort();
  if (entries.length === 0) {
    throw new MatParseError(`no .mat files under ${inputPath}`);
  }
  const results: ConvertResult[] = [];
  for (const name of entries) {
    const result = convertFile(path.join(inputPath, name), outDir, options);
    if (options.subjects && !options.subjects.includes(result.subject)) {
      fs.rmSync(result.output);
      continue;
    }
    results.push(result);
  }
  return results;
}
