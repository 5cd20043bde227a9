#!/usr/bin/env node
/**
 * db1-convert <input.mat | directory> <out-dir>
 *   [--subjects 1,2,...]      keep only these subject ids (directory mode)
 *   [--subject N]             override a missing subject field
 *   [--labels auto|stimulus|restimulus]   label source (default auto)
 *   [--no-offset]             keep raw per-exercise label ids
 *   [--rate HZ]               sampling rate for the header (default 100)
 *
 * Exit codes: 0 success, 1 conversion failure (corrupt or unreadable input),
 * 2 usage error.
 */

import { pathToFileURL } from "node:url";

import { ConvertOptions, convertPath } from "./convert.js";
import { MatParseError } from "./matfile.js";

function usage(message?: string): never {
  if (message) console.error(`error: ${message}`);
  console.error(
    "usage: db1-convert <input.mat|dir> <out-dir> [--subjects 1,2] [--subject N]\n" +
      "                   [--labels auto|stimulus|restimulus] [--no-offset] [--rate HZ]",
  );
  process.exit(2);
}

export function parseArgs(argv: string[]): { input: string; outDir: string; options: ConvertOptions } {
  const positional: string[] = [];
  const options: ConvertOptions = {};
  for (let i = 0; i < argv.length; i++) {
    const arg = argv[i];
    const next = () => {
      i += 1;
      if (i >= argv.length) usage(`${arg} needs a value`);
      return argv[i];
    };
    if (arg === "--subjects") {
      options.subjects = next()
        .split(",")
        .map((s) => {
          const n = Number(s);
          if (!Number.isInteger(n)) usage(`bad subject id ${s}`);
          return n;
        });
    } else if (arg === "--subject") {
      options.subjectOverride = Number(next());
    } else if (arg === "--labels") {
      const value = next();
      if (value !== "auto" && value !== "stimulus" && value !== "restimulus") {
        usage(`--labels must be auto, stimulus, or restimulus; got ${value}`);
      }
      options.labels = value;
    } else if (arg === "--no-offset") {
      options.applyOffset = false;
    } else if (arg === "--rate") {
      const rate = Number(next());
      if (!(rate > 0)) usage(`--rate must be positive, got ${argv[i]}`);
      options.rateHz = rate;
    } else if (arg.startsWith("--")) {
      usage(`unknown flag ${arg}`);
    } else {
      positional.push(arg);
    }
  }
  if (positional.length !== 2) {
    usage(`expected <input> and <out-dir>, got ${positional.length} arguments`);
  }
  return { input: positional[0], outDir: positional[1], options };
}

export function main(argv: string[]): number {
  let parsed;
  try {
    parsed = parseArgs(argv);
  } catch (err) {
    if (err instanceof Error && "exitCode" in err) throw err;
    console.error(`error: ${err}`);
    return 2;
  }
  try {
    const results = convertPath(parsed.input, parsed.outDir, parsed.options);
    for (const r of results) {
      console.log(
        `${r.input} -> ${r.output} (subject ${r.subject}, exercise ${r.exercise}, ` +
          `${r.samples} samples x ${r.channels} channels)`,
      );
    }
    return 0;
  } catch (err) {
    if (err instanceof MatParseError) {
      console.error(`error: ${err.message}`);
      return 1;
    }
    throw err;
  }
}

if (process.argv[1] && import.meta.url === pathToFileURL(process.argv[1]).href) {
  process.exit(main(process.argv.slice(2)));
}
