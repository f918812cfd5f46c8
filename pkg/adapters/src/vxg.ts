/**
 * VXG container packing and parsing.
 *
 * The toolkit's grids are cubic (A, A, A, F) volumes indexed (x, y, z,
 * channel); the on-disk payload is channel-fastest, then x, then y, then z,
 * which is the C order of the axes permuted to (z, y, x, channel). Grids
 * use dtype 0 (float32), masks dtype 1 (uint8, F = 1, nonzero means set).
 */

import * as fs from "fs";

import { Dtype, NpyArray, cStrides, gatherToC } from "./npy";

export const VXG_MAGIC = "VXGF";
export const VXG_VERSION = 1;
export const HEADER_SIZE = 20;

/** output axis order (z, y, x, c) expressed over input axes (x, y, z, c) */
const TO_FILE_ORDER = [2, 1, 0, 3];
/** and the inverse, turning file order back into (x, y, z, c) */
const TO_MEMORY_ORDER = [2, 1, 0, 3];

export interface GridHeader {
  resolution: number;
  channels: number;
  dtype: 0 | 1;
}

function checkGridShape(shape: number[], context: string): { a: number; f: number } {
  if (shape.length !== 4) {
    throw new Error(
      `${context}: expected a 4-d (A, A, A, F) array indexed (x, y, z, channel), ` +
        `got shape (${shape.join(", ")})`
    );
  }
  const [a, b, c, f] = shape;
  if (a !== b || b !== c) {
    throw new Error(
      `${context}: grid must be cubic, got (${shape.join(", ")})`
    );
  }
  if (a < 1 || f < 1) {
    throw new Error(`${context}: grid needs A >= 1 and F >= 1, got (${shape.join(", ")})`);
  }
  return { a, f };
}

function packHeader(header: GridHeader): Buffer {
  const buf = Buffer.alloc(HEADER_SIZE);
  buf.write(VXG_MAGIC, 0, "ascii");
  buf.writeUInt32LE(VXG_VERSION, 4);
  buf.writeUInt32LE(header.resolution, 8);
  buf.writeUInt32LE(header.channels, 12);
  buf.writeUInt8(header.dtype, 16);
  return buf;
}

function parseHeader(blob: Buffer, path: string): GridHeader {
  if (blob.length < HEADER_SIZE) {
    throw new Error(`${path}: truncated header (${blob.length} bytes)`);
  }
  if (blob.subarray(0, 4).toString("ascii") !== VXG_MAGIC) {
    throw new Error(`${path}: bad magic, expected ${VXG_MAGIC}`);
  }
  const version = blob.readUInt32LE(4);
  if (version !== VXG_VERSION) {
    throw new Error(`${path}: unsupported version ${version}`);
  }
  const resolution = blob.readUInt32LE(8);
  const channels = blob.readUInt32LE(12);
  const dtype = blob.readUInt8(16);
  if (dtype !== 0 && dtype !== 1) {
    throw new Error(`${path}: unknown dtype code ${dtype}`);
  }
  if (blob[17] !== 0 || blob[18] !== 0 || blob[19] !== 0) {
    throw new Error(`${path}: reserved header bytes must be zero`);
  }
  return { resolution, channels, dtype };
}

/**
 * Write an (A, A, A, F) float array as a VXG grid. Float64 input is rounded
 * to float32; float32 values are preserved bit-exactly.
 */
export function exportGrid(array: NpyArray, path: string): void {
  if (array.dtype === "|u1") {
    throw new Error("exportGrid needs a float array; use exportMask for uint8 masks");
  }
  const { a, f } = checkGridShape(array.shape, "exportGrid");
  const fileOrder = gatherToC(
    array.data as Float32Array | Float64Array,
    array.shape,
    cStrides(array.shape),
    TO_FILE_ORDER
  );
  const body = Buffer.alloc(fileOrder.length * 4);
  for (let i = 0; i < fileOrder.length; i++) {
    body.writeFloatLE(Math.fround(fileOrder[i]), i * 4);
  }
  fs.writeFileSync(
    path,
    Buffer.concat([packHeader({ resolution: a, channels: f, dtype: 0 }), body])
  );
}

/** Read a dtype-0 VXG grid back as a float32 (A, A, A, F) array, (x, y, z, c). */
export function importGrid(path: string): NpyArray {
  const blob = fs.readFileSync(path);
  const header = parseHeader(blob, path);
  if (header.dtype !== 0) {
    throw new Error(`${path}: grids use dtype 0; use importMask for dtype 1`);
  }
  const { resolution: a, channels: f } = header;
  const expected = a * a * a * f * 4;
  const body = blob.subarray(HEADER_SIZE);
  if (body.length !== expected) {
    throw new Error(`${path}: payload is ${body.length} bytes, header declares ${expected}`);
  }
  const fileOrder = new Float32Array(a * a * a * f);
  for (let i = 0; i < fileOrder.length; i++) {
    fileOrder[i] = body.readFloatLE(i * 4);
  }
  const fileShape = [a, a, a, f]; // (z, y, x, c)
  const data = gatherToC(fileOrder, fileShape, cStrides(fileShape), TO_MEMORY_ORDER);
  return { dtype: "<f4", shape: [a, a, a, f], data };
}

/** Write an (A, A, A) uint8 array (nonzero = set) as a mask container. */
export function exportMask(array: NpyArray, path: string): void {
  if (array.shape.length !== 3) {
    throw new Error(
      `exportMask: expected a 3-d (A, A, A) array indexed (x, y, z), got ` +
        `shape (${array.shape.join(", ")})`
    );
  }
  const [a, b, c] = array.shape;
  if (a !== b || b !== c) {
    throw new Error(`exportMask: mask must be cubic, got (${array.shape.join(", ")})`);
  }
  const bits = new Uint8Array(array.data.length);
  for (let i = 0; i < bits.length; i++) bits[i] = array.data[i] !== 0 ? 1 : 0;
  const fileOrder = gatherToC(bits, [a, a, a], cStrides([a, a, a]), [2, 1, 0]);
  fs.writeFileSync(
    path,
    Buffer.concat([
      packHeader({ resolution: a, channels: 1, dtype: 1 }),
      Buffer.from(fileOrder.buffer, fileOrder.byteOffset, fileOrder.byteLength),
    ])
  );
}

/** Read a dtype-1 mask container back as a uint8 (A, A, A) array, (x, y, z). */
export function importMask(path: string): NpyArray {
  const blob = fs.readFileSync(path);
  const header = parseHeader(blob, path);
  if (header.dtype !== 1 || header.channels !== 1) {
    throw new Error(`${path}: masks use dtype 1 and F=1`);
  }
  const a = header.resolution;
  const body = blob.subarray(HEADER_SIZE);
  if (body.length !== a * a * a) {
    throw new Error(`${path}: payload is ${body.length} bytes, header declares ${a * a * a}`);
  }
  const fileOrder = new Uint8Array(body);
  const data = gatherToC(
    new Uint8Array(fileOrder),
    [a, a, a],
    cStrides([a, a, a]),
    [2, 1, 0]
  );
  for (let i = 0; i < data.length; i++) data[i] = data[i] !== 0 ? 1 : 0;
  return { dtype: "|u1", shape: [a, a, a], data };
}
