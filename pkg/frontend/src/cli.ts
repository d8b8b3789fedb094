#!/usr/bin/env node
/**
 * plots <kind> --in <dir> --out <file.svg>
 *
 * Renders one figure from the CSV traces in <dir>. Exits 0 on success, 2 on
 * bad arguments or schema-invalid inputs (with the offending column named).
 */

import { writeFileSync } from "fs";
import { KINDS, Kind, render } from "./figures.js";
import { SchemaError } from "./csv.js";

function usage(): string {
  return `usage: plots <${KINDS.join("|")}> --in <dir> --out <file.svg>`;
}

export function main(argv: string[]): number {
  const args = [...argv];
  const kind = args.shift();
  let inDir: string | undefined;
  let outFile: string | undefined;
  while (args.length > 0) {
    const flag = args.shift();
    if (flag === "--in") inDir = args.shift();
    else if (flag === "--out") outFile = args.shift();
    else {
      console.error(`unknown argument '${flag}'\n${usage()}`);
      return 2;
    }
  }
  if (!kind || !(KINDS as readonly string[]).includes(kind) || !inDir || !outFile) {
    console.error(usage());
    return 2;
  }
  try {
    const svg = render(kind as Kind, inDir);
    writeFileSync(outFile, svg, "utf-8");
  } catch (err) {
    if (err instanceof SchemaError) {
      console.error(`schema error: ${err.message}`);
      return 2;
    }
    throw err;
  }
  return 0;
}

import { pathToFileURL } from "url";

if (process.argv[1] && import.meta.url === pathToFileURL(process.argv[1]).href) {
  process.exit(main(process.argv.slice(2)));
}
