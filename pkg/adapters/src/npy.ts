/**
 * Minimal .npy (NumPy array file) reader and writer.
 *
 * Supports format versions 1.0 and 2.0, little-endian float32/float64 and
 * uint8 payloads, and both C and Fortran element order on read. Writing
 * always produces version 1.0, C order. No dependencies beyond Node.
 */

import * as fs from "fs";

const MAGIC = Buffer.from("\x93NUMPY", "latin1");

export type Dtype = "<f4" | "<f8" | "|u1";

export interface NpyArray {
  dtype: Dtype;
  shape: number[];
  /** C-order (row-major) elements, regardless of the on-disk order. */
  data: Float32Array | Float64Array | Uint8Array;
}

function itemSize(dtype: Dtype): number {
  return dtype === "<f4" ? 4 : dtype === "<f8" ? 8 : 1;
}

export function cStrides(shape: number[]): number[] {
  const strides = new Array(shape.length).fill(1);
  for (let i = shape.length - 2; i >= 0; i--) {
    strides[i] = strides[i + 1] * shape[i + 1];
  }
  return strides;
}

function fStrides(shape: number[]): number[] {
  const strides = new Array(shape.length).fill(1);
  for (let i = 1; i < shape.length; i++) {
    strides[i] = strides[i - 1] * shape[i - 1];
  }
  return strides;
}

function elementCount(shape: number[]): number {
  return shape.reduce((a, b) => a * b, 1);
}

/**
 * Gather a strided view into a fresh C-contiguous array. `perm` maps output
 * axes to input axes, so `perm = [2, 1, 0, 3]` swaps the first two spatial
 * axes of a 4-d array.
 */
export function gatherToC<T extends Float32Array | Float64Array | Uint8Array>(
  src: T,
  shape: number[],
  strides: number[],
  perm?: number[]
): T {
  const ndim = shape.length;
  const order = perm ?? shape.map((_, i) => i);
  if (order.length !== ndim) {
    throw new Error(`permutation has ${order.length} axes, array has ${ndim}`);
  }
  const outShape = order.map((axis) => shape[axis]);
  const outStrides = order.map((axis) => strides[axis]);
  const total = elementCount(outShape);
  const out = new (src.constructor as new (n: number) => T)(total);
  const index = new Array(ndim).fill(0);
  let offset = 0;
  for (let flat = 0; flat < total; flat++) {
    out[flat] = src[offset];
    for (let axis = ndim - 1; axis >= 0; axis--) {
      index[axis] += 1;
      offset += outStrides[axis];
      if (index[axis] < outShape[axis]) break;
      index[axis] = 0;
      offset -= outStrides[axis] * outShape[axis];
    }
  }
  return out;
}

function parseHeader(header: string): { dtype: Dtype; fortran: boolean; shape: number[] } {
  const descr = /'descr'\s*:\s*'([^']+)'/.exec(header);
  const fortran = /'fortran_order'\s*:\s*(True|False)/.exec(header);
  const shape = /'shape'\s*:\s*\(([^)]*)\)/.exec(header);
  if (!descr || !fortran || !shape) {
    throw new Error(`unparseable npy header: ${header.trim()}`);
  }
  const dtype = descr[1];
  if (dtype !== "<f4" && dtype !== "<f8" && dtype !== "|u1") {
    throw new Error(`unsupported npy dtype ${dtype}; expected <f4, <f8, or |u1`);
  }
  const dims = shape[1]
    .split(",")
    .map((s) => s.trim())
    .filter((s) => s.length > 0)
    .map((s) => {
      const n = Number(s);
      if (!Number.isInteger(n) || n < 0) throw new Error(`bad shape entry ${s}`);
      return n;
    });
  if (dims.length === 0) {
    throw new Error("scalar (0-d) npy arrays are not supported");
  }
  return { dtype, fortran: fortran[1] === "True", shape: dims };
}

export function readNpy(path: string): NpyArray {
  const blob = fs.readFileSync(path);
  if (blob.length < 10 || !blob.subarray(0, 6).equals(MAGIC)) {
    throw new Error(`${path}: not an npy file (bad magic)`);
  }
  const major = blob[6];
  let headerLen: number;
  let headerStart: number;
  if (major === 1) {
    headerLen = blob.readUInt16LE(8);
    headerStart = 10;
  } else if (major === 2 || major === 3) {
    headerLen = blob.readUInt32LE(8);
    headerStart = 12;
  } else {
    throw new Error(`${path}: unsupported npy version ${major}`);
  }
  const header = blob.subarray(headerStart, headerStart + headerLen).toString("latin1");
  const { dtype, fortran, shape } = parseHeader(header);
  const total = elementCount(shape);
  const body = blob.subarray(headerStart + headerLen);
  const expected = total * itemSize(dtype);
  if (body.length !== expected) {
    throw new Error(
      `${path}: payload is ${body.length} bytes, header declares ${expected}`
    );
  }

  let data: Float32Array | Float64Array | Uint8Array;
  if (dtype === "<f4") {
    data = new Float32Array(total);
    for (let i = 0; i < total; i++) data[i] = body.readFloatLE(i * 4);
  } else if (dtype === "<f8") {
    data = new Float64Array(total);
    for (let i = 0; i < total; i++) data[i] = body.readDoubleLE(i * 8);
  } else {
    data = new Uint8Array(body); // copy-free view is fine, bytes are bytes
    data = new Uint8Array(data); // ...but detach from the file buffer
  }

  if (fortran) {
    data = gatherToC(data as Float32Array, shape, fStrides(shape)) as typeof data;
  }
  return { dtype, shape, data };
}

export function writeNpy(path: string, array: NpyArray): void {
  const { dtype, shape, data } = array;
  const total = elementCount(shape);
  if (data.length !== total) {
    throw new Error(
      `data has ${data.length} elements, shape (${shape.join(", ")}) needs ${total}`
    );
  }
  const shapeRepr = shape.length === 1 ? `(${shape[0]},)` : `(${shape.join(", ")})`;
  let header = `{'descr': '${dtype}', 'fortran_order': False, 'shape': ${shapeRepr}, }`;
  const unpadded = 10 + header.length + 1;
  header += " ".repeat((64 - (unpadded % 64)) % 64) + "\n";

  const head = Buffer.alloc(10 + header.length);
  MAGIC.copy(head, 0);
  head[6] = 1;
  head[7] = 0;
  head.writeUInt16LE(header.length, 8);
  head.write(header, 10, "latin1");

  const body = Buffer.alloc(total * itemSize(dtype));
  if (dtype === "<f4") {
    for (let i = 0; i < total; i++) body.writeFloatLE(data[i], i * 4);
  } else if (dtype === "<f8") {
    for (let i = 0; i < total; i++) body.writeDoubleLE(data[i], i * 8);
  } else {
    Buffer.from(data.buffer, data.byteOffset, data.byteLength).copy(body);
  }
  fs.writeFileSync(path, Buffer.concat([head, body]));
}
