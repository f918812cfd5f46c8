/**
 * Building the metrics embeddings JSON from raw embedding dumps.
 *
 * The consumer expects unit-normalized vectors; exports normalize every
 * vector and warn when any input norm strays from 1 by more than 1e-3,
 * which usually means the dump skipped the encoder's final normalization.
 */

import * as fs from "fs";

import { NpyArray } from "./npy";

export interface EmbeddingInputs {
  imageInput: NpyArray;
  imageEdited: NpyArray;
  textInput: NpyArray;
  textEdited: NpyArray;
  textWord: NpyArray;
  textGeneric: NpyArray;
}

export interface ExportReport {
  views: number;
  dim: number;
  maxNormDeviation: number;
  warnings: string[];
}

function asMatrix(array: NpyArray, name: string): number[][] {
  if (array.shape.length === 1) {
    return [Array.from(array.data as Float32Array | Float64Array)];
  }
  if (array.shape.length !== 2) {
    throw new Error(
      `${name}: expected (N, D) or (D,) embeddings, got shape (${array.shape.join(", ")})`
    );
  }
  const [n, d] = array.shape;
  const rows: number[][] = [];
  for (let i = 0; i < n; i++) {
    rows.push(Array.from(array.data.subarray(i * d, (i + 1) * d) as Float64Array));
  }
  return rows;
}

function normalize(rows: number[][], name: string, report: ExportReport): number[][] {
  return rows.map((row, index) => {
    const norm = Math.sqrt(row.reduce((acc, v) => acc + v * v, 0));
    if (!Number.isFinite(norm) || norm === 0) {
      throw new Error(`${name}[${index}]: zero or non-finite norm, cannot normalize`);
    }
    const deviation = Math.abs(norm - 1.0);
    if (deviation > report.maxNormDeviation) report.maxNormDeviation = deviation;
    if (deviation > 1e-3) {
      report.warnings.push(
        `${name}[${index}]: input norm ${norm.toFixed(6)} deviates from 1; renormalized`
      );
    }
    return row.map((v) => v / norm);
  });
}

export function exportEmbeddings(inputs: EmbeddingInputs, path: string): ExportReport {
  const report: ExportReport = { views: 0, dim: 0, maxNormDeviation: 0, warnings: [] };

  const imageInput = normalize(asMatrix(inputs.imageInput, "image_input"), "image_input", report);
  const imageEdited = normalize(
    asMatrix(inputs.imageEdited, "image_edited"), "image_edited", report
  );
  const texts: Record<string, number[]> = {};
  for (const [key, array] of Object.entries({
    text_input: inputs.textInput,
    text_edited: inputs.textEdited,
    text_word: inputs.textWord,
    text_generic: inputs.textGeneric,
  })) {
    const rows = asMatrix(array, key);
    if (rows.length !== 1) {
      throw new Error(`${key}: expected a single (D,) vector, got ${rows.length} rows`);
    }
    texts[key] = normalize(rows, key, report)[0];
  }

  const dim = imageInput[0].length;
  if (imageEdited.length !== imageInput.length) {
    throw new Error(
      `view counts differ: image_input has ${imageInput.length}, ` +
        `image_edited has ${imageEdited.length}`
    );
  }
  for (const [name, rows] of [
    ["image_input", imageInput],
    ["image_edited", imageEdited],
  ] as const) {
    for (const row of rows) {
      if (row.length !== dim) {
        throw new Error(`${name}: inconsistent dimension ${row.length}, expected ${dim}`);
      }
    }
  }
  for (const [key, vec] of Object.entries(texts)) {
    if (vec.length !== dim) {
      throw new Error(`${key}: dimension ${vec.length} does not match images (D=${dim})`);
    }
  }

  report.views = imageInput.length;
  report.dim = dim;
  const doc = {
    image_input: imageInput,
    image_edited: imageEdited,
    ...texts,
  };
  fs.writeFileSync(path, JSON.stringify(doc));
  return report;
}
