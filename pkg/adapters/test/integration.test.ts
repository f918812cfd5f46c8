/**
 * Cross-component checks: files produced here must be accepted by the
 * primary toolkit, and embeddings exported from raw dumps must score
 * identically to a fixture written by the toolkit itself.
 */

import { execFileSync } from "child_process";
import * as fs from "fs";
import * as os from "os";
import * as path from "path";

import { describe, expect, it } from "vitest";

import { exportEmbeddings } from "../src/embeddings";
import { NpyArray, writeNpy } from "../src/npy";
import { exportGrid } from "../src/vxg";
import { main } from "../src/cli";

function tmpDir(): string {
  return fs.mkdtempSync(path.join(os.tmpdir(), "adapt-"));
}

function havePrimary(): boolean {
  try {
    execFileSync("voxmerge", ["prompt-diff", "--input-prompt", "a", "--edit-prompt", "b"], {
      stdio: "pipe",
    });
    return true;
  } catch {
    return false;
  }
}

function mulberry(seed: number): () => number {
  let state = seed >>> 0;
  return () => {
    state |= 0;
    state = (state + 0x6d2b79f5) | 0;
    let t = Math.imul(state ^ (state >>> 15), 1 | state);
    t = (t + Math.imul(t ^ (t >>> 7), 61 | t)) ^ t;
    return ((t ^ (t >>> 14)) >>> 0) / 4294967296 - 0.5;
  };
}

function randomMatrix(rows: number, cols: number, seed: number): NpyArray {
  const rand = mulberry(seed);
  const data = new Float64Array(rows * cols);
  for (let i = 0; i < data.length; i++) data[i] = rand();
  return { dtype: "<f8", shape: rows === 1 ? [cols] : [rows, cols], data };
}

const primary = havePrimary();

describe("embeddings export", () => {
  it("normalizes and reports deviating norms", () => {
    const dir = tmpDir();
    const out = path.join(dir, "e.json");
    const report = exportEmbeddings(
      {
        imageInput: randomMatrix(3, 8, 1),
        imageEdited: randomMatrix(3, 8, 2),
        textInput: randomMatrix(1, 8, 3),
        textEdited: randomMatrix(1, 8, 4),
        textWord: randomMatrix(1, 8, 5),
        textGeneric: randomMatrix(1, 8, 6),
      },
      out
    );
    expect(report.views).toBe(3);
    expect(report.dim).toBe(8);
    expect(report.warnings.length).toBeGreaterThan(0); // raw data is unnormalized
    const doc = JSON.parse(fs.readFileSync(out, "utf-8"));
    for (const row of doc.image_input) {
      const norm = Math.sqrt(row.reduce((a: number, v: number) => a + v * v, 0));
      expect(Math.abs(norm - 1)).toBeLessThan(1e-12);
    }
  });

  it("rejects dimension mismatches naming the offender", () => {
    const dir = tmpDir();
    expect(() =>
      exportEmbeddings(
        {
          imageInput: randomMatrix(3, 8, 1),
          imageEdited: randomMatrix(3, 8, 2),
          textInput: randomMatrix(1, 7, 3),
          textEdited: randomMatrix(1, 8, 4),
          textWord: randomMatrix(1, 8, 5),
          textGeneric: randomMatrix(1, 8, 6),
        },
        path.join(dir, "e.json")
      )
    ).toThrow(/text_input/);
  });
});

describe.runIf(primary)("primary toolkit consumes adapter outputs", () => {
  it("metrics scores exported embeddings identically to a toolkit fixture", () => {
    const dir = tmpDir();
    const n = 70;
    const d = 512;

    // raw (unnormalized) dumps, written as npy for the adapter path
    const arrays: Record<string, NpyArray> = {
      image_input: randomMatrix(n, d, 11),
      image_edited: randomMatrix(n, d, 12),
      text_input: randomMatrix(1, d, 13),
      text_edited: randomMatrix(1, d, 14),
      text_word: randomMatrix(1, d, 15),
      text_generic: randomMatrix(1, d, 16),
    };
    const npyPaths: Record<string, string> = {};
    for (const [key, array] of Object.entries(arrays)) {
      npyPaths[key] = path.join(dir, `${key}.npy`);
      writeNpy(npyPaths[key], array);
    }

    const exported = path.join(dir, "exported.json");
    const code = main([
      "export-embeddings",
      "--image-input", npyPaths.image_input,
      "--image-edited", npyPaths.image_edited,
      "--text-input", npyPaths.text_input,
      "--text-edited", npyPaths.text_edited,
      "--text-word", npyPaths.text_word,
      "--text-generic", npyPaths.text_generic,
      "--out", exported,
    ]);
    expect(code).toBe(0);

    // the in-toolkit fixture: same raw values loaded and rewritten by the
    // primary library (its loader applies the same normalization)
    const fixture = path.join(dir, "fixture.json");
    const script = [
      "import json, sys",
      "from voxmerge import EmbeddingSet",
      "from voxmerge.io import write_embeddings",
      `raw = json.load(open(${JSON.stringify(exported)}))`,
      "e = EmbeddingSet(**raw)",
      `write_embeddings(e, ${JSON.stringify(fixture)})`,
    ].join("\n");
    execFileSync("python3", ["-c", script], { stdio: "pipe" });

    const run = (file: string) =>
      execFileSync("voxmerge", ["metrics", file], { stdio: "pipe" }).toString();
    expect(run(exported)).toBe(run(fixture));
  });

  it("exported grids are readable by the primary and roundtrip through it", () => {
    const dir = tmpDir();
    const a = 8;
    const f = 3;
    const rand = mulberry(77);
    const data = new Float32Array(a * a * a * f);
    for (let i = 0; i < data.length; i++) data[i] = Math.fround(rand());
    const grid: NpyArray = { dtype: "<f4", shape: [a, a, a, f], data };
    const vxg = path.join(dir, "g.vxg");
    exportGrid(grid, vxg);

    const echoed = path.join(dir, "echo.vxg");
    const script = [
      "from voxmerge.io import read_grid, write_grid",
      `grid = read_grid(${JSON.stringify(vxg)})`,
      "assert grid.resolution == 8 and grid.channels == 3",
      `write_grid(grid, ${JSON.stringify(echoed)})`,
    ].join("\n");
    execFileSync("python3", ["-c", script], { stdio: "pipe" });
    expect(fs.readFileSync(echoed).equals(fs.readFileSync(vxg))).toBe(true);
  });
});
