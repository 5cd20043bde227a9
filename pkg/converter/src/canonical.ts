/**
 * Canonical CSV emission for one DB1 recording.
 *
 * Format consumed by the training pipeline: header
 * `subject,<id>,rate,<hz>,channels,<n>`, one `# ...` provenance comment,
 * then `t_index,ch1,...,chN,label` rows. Values are written as the
 * shortest decimal that round-trips the float32 value, so the transcription
 * is lossless at 32-bit precision.
 */

import { MatParseError, MatVariable, at } from "./matfile.js";

/** Movement counts per DB1 exercise give each class a globally unique id. */
export const DEFAULT_EXERCISE_OFFSETS: Record<number, number> = { 1: 0, 2: 12, 3: 29 };

/** DB1's published sampling rate; the archives carry no rate field. */
export const DEFAULT_RATE_HZ = 100;

export interface Db1Record {
  emg: MatVariable; // samples x channels
  labels: Float64Array; // per-sample class labels, already offset
  labelField: "restimulus" | "stimulus";
  subject: number;
  exercise: number;
  offset: number;
}

export interface ExtractOptions {
  labels?: "auto" | "stimulus" | "restimulus";
  applyOffset?: boolean;
  offsets?: Record<number, number>;
  subjectOverride?: number;
}

function scalar(variables: Map<string, MatVariable>, name: string): number | null {
  const v = variables.get(name);
  if (!v || v.data.length < 1) return null;
  return v.data[0];
}

/** Pull the EMG matrix, label vector, and provenance out of parsed variables. */
export function extractRecord(
  variables: Map<string, MatVariable>,
  options: ExtractOptions = {},
): Db1Record {
  const emg = variables.get("emg");
  if (!emg) {
    throw new MatParseError('required field "emg" is missing');
  }
  if (emg.dims.length !== 2) {
    throw new MatParseError(`"emg" must be 2-D, got [${emg.dims.join("x")}]`);
  }
  const samples = emg.dims[0];

  const preference = options.labels ?? "auto";
  let labelField: "restimulus" | "stimulus";
  if (preference === "auto") {
    labelField = variables.has("restimulus") ? "restimulus" : "stimulus";
  } else {
    labelField = preference;
  }
  const labelVar = variables.get(labelField);
  if (!labelVar) {
    throw new MatParseError(`required label field "${labelField}" is missing`);
  }
  if (labelVar.data.length !== samples) {
    throw new MatParseError(
      `label vector "${labelField}" has ${labelVar.data.length} entries for ${samples} emg rows`,
    );
  }

  const subject = options.subjectOverride ?? scalar(variables, "subject");
  if (subject === null) {
    throw new MatParseError('required field "subject" is missing (or pass --subject)');
  }
  const exercise = scalar(variables, "exercise") ?? 1;

  const offsets = options.offsets ?? DEFAULT_EXERCISE_OFFSETS;
  const offset = options.applyOffset === false ? 0 : offsets[exercise] ?? 0;
  const labels = new Float64Array(samples);
  for (let t = 0; t < samples; t++) {
    const raw = labelVar.data[t];
    if (!Number.isInteger(raw) || raw < 0) {
      throw new MatParseError(`label at sample ${t} is not a non-negative integer: ${raw}`);
    }
    labels[t] = raw === 0 ? 0 : raw + offset;
  }
  return { emg, labels, labelField, subject, exercise, offset };
}

/** Shortest decimal that parses back to the same float32 value. */
export function formatValue(value: number): string {
  return String(Math.fround(value));
}

export function toCanonicalCsv(record: Db1Record, rateHz: number = DEFAULT_RATE_HZ): string {
  const samples = record.emg.dims[0];
  const channels = record.emg.dims[1];
  const lines: string[] = [
    `subject,${record.subject},rate,${rateHz},channels,${channels}`,
    `# source exercise:${record.exercise} labels:${record.labelField} offset:${record.offset}`,
  ];
  for (let t = 0; t < samples; t++) {
    const cells: string[] = [String(t)];
    for (let ch = 0; ch < channels; ch++) {
      cells.push(formatValue(at(record.emg, t, ch)));
    }
    cells.push(String(record.labels[t]));
    lines.push(cells.join(","));
  }
  return lines.join("\n") + "\n";
}
