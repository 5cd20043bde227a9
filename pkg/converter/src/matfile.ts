/**
 * Minimal MAT-file (level 5) reader: enough of the format to pull numeric
 * matrices out of Ninapro distribution archives.
 *
 * Supported: little-endian files, plain and zlib-compressed top-level
 * elements, numeric array classes (double, single, int8..uint64), the small
 * data element format, and column-major data extraction. Cell arrays,
 * structs, sparse and character matrices are skipped by name when walking
 * top-level elements and rejected if requested explicitly.
 */

import * as zlib from "node:zlib";

export class MatParseError extends Error {
  constructor(message: string) {
    super(message);
    this.name = "MatParseError";
  }
}

/** One numeric variable; `data` is column-major as stored by MATLAB. */
export interface MatVariable {
  name: string;
  dims: number[];
  data: Float64Array;
}

const MI_INT8 = 1;
const MI_UINT8 = 2;
const MI_INT16 = 3;
const MI_UINT16 = 4;
const MI_INT32 = 5;
const MI_UINT32 = 6;
const MI_SINGLE = 7;
const MI_DOUBLE = 9;
const MI_INT64 = 12;
const MI_UINT64 = 13;
const MI_MATRIX = 14;
const MI_COMPRESSED = 15;

const MX_DOUBLE = 6;
const MX_SINGLE = 7;
const MX_INT8 = 8;
const MX_UINT8 = 9;
const MX_INT16 = 10;
const MX_UINT16 = 11;
const MX_INT32 = 12;
const MX_UINT32 = 13;
const MX_INT64 = 14;
const MX_UINT64 = 15;

const NUMERIC_CLASSES = new Set([
  MX_DOUBLE, MX_SINGLE, MX_INT8, MX_UINT8, MX_INT16, MX_UINT16,
  MX_INT32, MX_UINT32, MX_INT64, MX_UINT64,
]);

interface Element {
  type: number;
  /** Payload view, excluding the tag. */
  view: DataView;
  /** Offset of the next element (tag + padded payload). */
  next: number;
}

function readElement(view: DataView, offset: number, context: string): Element {
  if (offset + 8 > view.byteLength) {
    throw new MatParseError(`${context}: truncated element tag at byte ${offset}`);
  }
  const word = view.getUint32(offset, true);
  const small = (word & 0xffff0000) !== 0;
  if (small) {
    const type = word & 0xffff;
    const size = word >>> 16;
    if (size > 4) {
      throw new MatParseError(`${context}: small element claims ${size} bytes`);
    }
    return {
      type,
      view: new DataView(view.buffer, view.byteOffset + offset + 4, size),
      next: offset + 8,
    };
  }
  const type = word;
  const size = view.getUint32(offset + 4, true);
  if (offset + 8 + size > view.byteLength) {
    throw new MatParseError(
      `${context}: element of ${size} bytes overruns buffer at byte ${offset}`,
    );
  }
  const padded = type === MI_COMPRESSED ? size : (size + 7) & ~7;
  return {
    type,
    view: new DataView(view.buffer, view.byteOffset + offset + 8, size),
    next: offset + 8 + padded,
  };
}

function numericValues(type: number, view: DataView, context: string): Float64Array {
  const readers: Record<number, [number, (o: number) => number]> = {
    [MI_INT8]: [1, (o) => view.getInt8(o)],
    [MI_UINT8]: [1, (o) => view.getUint8(o)],
    [MI_INT16]: [2, (o) => view.getInt16(o, true)],
    [MI_UINT16]: [2, (o) => view.getUint16(o, true)],
    [MI_INT32]: [4, (o) => view.getInt32(o, true)],
    [MI_UINT32]: [4, (o) => view.getUint32(o, true)],
    [MI_SINGLE]: [4, (o) => view.getFloat32(o, true)],
    [MI_DOUBLE]: [8, (o) => view.getFloat64(o, true)],
    [MI_INT64]: [8, (o) => Number(view.getBigInt64(o, true))],
    [MI_UINT64]: [8, (o) => Number(view.getBigUint64(o, true))],
  };
  const reader = readers[type];
  if (!reader) {
    throw new MatParseError(`${context}: unsupported numeric element type ${type}`);
  }
  const [width, read] = reader;
  const count = Math.floor(view.byteLength / width);
  const out = new Float64Array(count);
  for (let i = 0; i < count; i++) {
    out[i] = read(i * width);
  }
  return out;
}

function parseMatrix(view: DataView, context: string): MatVariable | null {
  let offset = 0;

  const flags = readElement(view, offset, `${context} array-flags`);
  if (flags.type !== MI_UINT32 || flags.view.byteLength < 8) {
    throw new MatParseError(`${context}: malformed array flags`);
  }
  const flagsWord = flags.view.getUint32(0, true);
  const arrayClass = flagsWord & 0xff;
  const complex = (flagsWord & 0x0800) !== 0;
  offset = flags.next;

  const dimsEl = readElement(view, offset, `${context} dimensions`);
  if (dimsEl.type !== MI_INT32) {
    throw new MatParseError(`${context}: malformed dimensions element`);
  }
  const dims: number[] = [];
  for (let i = 0; i < dimsEl.view.byteLength / 4; i++) {
    dims.push(dimsEl.view.getInt32(i * 4, true));
  }
  offset = dimsEl.next;

  const nameEl = readElement(view, offset, `${context} name`);
  if (nameEl.type !== MI_INT8) {
    throw new MatParseError(`${context}: malformed name element`);
  }
  const name = new TextDecoder("ascii").decode(
    new Uint8Array(nameEl.view.buffer, nameEl.view.byteOffset, nameEl.view.byteLength),
  );
  offset = nameEl.next;

  if (!NUMERIC_CLASSES.has(arrayClass)) {
    return null; // cell/struct/char/sparse: callers skip these by name
  }

  const dataEl = readElement(view, offset, `${context} "${name}" data`);
  const data = numericValues(dataEl.type, dataEl.view, `${context} "${name}"`);
  const expected = dims.reduce((a, b) => a * b, 1);
  if (data.length !== expected) {
    throw new MatParseError(
      `${context} "${name}": ${data.length} values for dimensions [${dims.join("x")}]`,
    );
  }
  if (complex) {
    throw new MatParseError(`${context} "${name}": complex matrices are not supported`);
  }
  return { name, dims, data };
}

/** Parse every top-level numeric variable of a level-5 MAT file. */
export function parseMat(buffer: Uint8Array): Map<string, MatVariable> {
  if (buffer.byteLength < 128) {
    throw new MatParseError(`file too short for a MAT header (${buffer.byteLength} bytes)`);
  }
  const view = new DataView(buffer.buffer, buffer.byteOffset, buffer.byteLength);
  const endian = view.getUint16(126, false);
  // "IM" read big-endian means the writer was little-endian
  if (endian !== 0x494d) {
    if (endian === 0x4d49) {
      throw new MatParseError("big-endian MAT files are not supported");
    }
    throw new MatParseError("missing MI endian indicator; not a level-5 MAT file");
  }
  const version = view.getUint16(124, true);
  if (version !== 0x0100) {
    throw new MatParseError(`unsupported MAT version 0x${version.toString(16)}`);
  }

  const variables = new Map<string, MatVariable>();
  let offset = 128;
  let index = 0;
  while (offset < buffer.byteLength) {
    const element = readElement(view, offset, `element ${index}`);
    if (element.type === MI_COMPRESSED) {
      let inflated: Buffer;
      try {
        inflated = zlib.inflateSync(
          Buffer.from(element.view.buffer, element.view.byteOffset, element.view.byteLength),
        );
      } catch (err) {
        throw new MatParseError(`element ${index}: corrupt compressed stream (${err})`);
      }
      const innerView = new DataView(inflated.buffer, inflated.byteOffset, inflated.byteLength);
      const inner = readElement(innerView, 0, `element ${index} (inflated)`);
      if (inner.type === MI_MATRIX) {
        const variable = parseMatrix(inner.view, `element ${index}`);
        if (variable) variables.set(variable.name, variable);
      }
    } else if (element.type === MI_MATRIX) {
      const variable = parseMatrix(element.view, `element ${index}`);
      if (variable) variables.set(variable.name, variable);
    }
    // any other top-level type (utf8 comments etc.) is skipped
    offset = element.next;
    index += 1;
  }
  return variables;
}

/** Column-major accessor: value at (row, col) of a 2-D variable. */
export function at(variable: MatVariable, row: number, col: number): number {
  const rows = variable.dims[0];
  return variable.data[col * rows + row];
}
