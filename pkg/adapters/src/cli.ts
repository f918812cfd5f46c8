#!/usr/bin/env node
/**
 * vox-adapt: convert ML tensor dumps to the voxmerge file formats and back.
 *
 *   vox-adapt export-grid <input.npy> <output.vxg>
 *   vox-adapt import-grid <input.vxg> <output.npy>
 *   vox-adapt export-mask <input.npy> <output.msk>
 *   vox-adapt import-mask <input.msk> <output.npy>
 *   vox-adapt export-embeddings --image-input a.npy --image-edited b.npy
 *       --text-input t0.npy --text-edited t1.npy --text-word w.npy
 *       --text-generic g.npy --out embeddings.json
 *
 * Shape conventions: grids are (A, A, A, F) indexed (x, y, z, channel);
 * masks are (A, A, A); image embeddings are (N, D), text embeddings (D,).
 */

import { readNpy, writeNpy } from "./npy";
import { exportEmbeddings } from "./embeddings";
import { exportGrid, exportMask, importGrid, importMask } from "./vxg";

function usage(): never {
  console.error(
    [
      "usage:",
      "  vox-adapt export-grid <input.npy> <output.vxg>",
      "  vox-adapt import-grid <input.vxg> <output.npy>",
      "  vox-adapt export-mask <input.npy> <output.msk>",
      "  vox-adapt import-mask <input.msk> <output.npy>",
      "  vox-adapt export-embeddings --image-input A.npy --image-edited B.npy",
      "      --text-input T.npy --text-edited E.npy --text-word W.npy",
      "      --text-generic G.npy --out embeddings.json",
    ].join("\n")
  );
  process.exit(1);
}

function parseFlags(argv: string[], required: string[]): Map<string, string> {
  const flags = new Map<string, string>();
  for (let i = 0; i < argv.length; i += 2) {
    const key = argv[i];
    const value = argv[i + 1];
    if (!key.startsWith("--") || value === undefined) usage();
    flags.set(key.slice(2), value);
  }
  for (const name of required) {
    if (!flags.has(name)) {
      console.error(`missing required flag --${name}`);
      usage();
    }
  }
  return flags;
}

export function main(argv: string[]): number {
  const [command, ...rest] = argv;
  try {
    switch (command) {
      case "export-grid": {
        if (rest.length !== 2) usage();
        exportGrid(readNpy(rest[0]), rest[1]);
        console.log(`wrote ${rest[1]}`);
        return 0;
      }
      case "import-grid": {
        if (rest.length !== 2) usage();
        writeNpy(rest[1], importGrid(rest[0]));
        console.log(`wrote ${rest[1]}`);
        return 0;
      }
      case "export-mask": {
        if (rest.length !== 2) usage();
        exportMask(readNpy(rest[0]), rest[1]);
        console.log(`wrote ${rest[1]}`);
        return 0;
      }
      case "import-mask": {
        if (rest.length !== 2) usage();
        writeNpy(rest[1], importMask(rest[0]));
        console.log(`wrote ${rest[1]}`);
        return 0;
      }
      case "export-embeddings": {
        const flags = parseFlags(rest, [
          "image-input",
          "image-edited",
          "text-input",
          "text-edited",
          "text-word",
          "text-generic",
          "out",
        ]);
        const report = exportEmbeddings(
          {
            imageInput: readNpy(flags.get("image-input")!),
            imageEdited: readNpy(flags.get("image-edited")!),
            textInput: readNpy(flags.get("text-input")!),
            textEdited: readNpy(flags.get("text-edited")!),
            textWord: readNpy(flags.get("text-word")!),
            textGeneric: readNpy(flags.get("text-generic")!),
          },
          flags.get("out")!
        );
        for (const warning of report.warnings) console.error(`warning: ${warning}`);
        console.log(
          `wrote ${flags.get("out")} (N=${report.views}, D=${report.dim}, ` +
            `max norm deviation ${report.maxNormDeviation.toExponential(2)})`
        );
        return 0;
      }
      default:
        usage();
    }
  } catch (err) {
    console.error(`error: ${err instanceof Error ? err.message : err}`);
    return 2;
  }
}

if (require.main === module) {
  process.exit(main(process.argv.slice(2)));
}
