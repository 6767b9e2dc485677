/** octoarm-plot <run-dir> --kind <k> --out <dir> */

import { mkdirSync, writeFileSync } from "node:fs";
import { join } from "node:path";
import { pathToFileURL } from "node:url";

import { SchemaError } from "./csv.js";
import { FigureKind, render } from "./plots.js";

const KINDS: FigureKind[] = ["snapshots", "controls", "wave-compare", "convergence"];

function usage(): string {
  return `usage: octoarm-plot <run-dir> --kind <${KINDS.join("|")}> [--out <dir>]`;
}

export function main(argv: string[]): number {
  let runDir: string | undefined;
  let kind: string | undefined;
  let out: string | undefined;
  for (let i = 0; i < argv.length; i++) {
    const a = argv[i];
    if (a === "--kind") kind = argv[++i];
    else if (a === "--out") out = argv[++i];
    else if (a === "--help" || a === "-h") {
      console.log(usage());
      return 0;
    } else if (!runDir) runDir = a;
    else {
      console.error(`unexpected argument '${a}'\n${usage()}`);
      return 2;
    }
  }
  if (!runDir || !kind) {
    console.error(usage());
    return 2;
  }
  if (!KINDS.includes(kind as FigureKind)) {
    console.error(`unknown kind '${kind}'\n${usage()}`);
    return 2;
  }
  const outDir = out ?? runDir;
  try {
    const figures = render(runDir, kind as FigureKind);
    mkdirSync(outDir, { recursive: true });
    for (const [name, svg] of figures) {
      writeFileSync(join(outDir, name), svg);
      console.log(join(outDir, name));
    }
    return 0;
  } catch (e) {
    if (e instanceof SchemaError) {
      console.error(`schema error: ${e.message}`);
      return 2;
    }
    throw e;
  }
}

if (process.argv[1] && import.meta.url === pathToFileURL(process.argv[1]).href) {
  process.exit(main(process.argv.slice(2)));
}
