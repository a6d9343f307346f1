#!/usr/bin/env node
/** CLI: `plots <spec-file>` reads a JSON plot spec, renders the referenced
 * CSV traces to an SVG file. Exit 0 on success, 1 on any spec/CSV error. */

import * as fs from "fs";

import { CsvError, loadTraces } from "./csv";
import { RenderError, renderSvg } from "./render";
import { SpecError, parseSpec } from "./spec";

export function run(argv: string[]): number {
  if (argv.length !== 1) {
    process.stderr.write("usage: plots <spec-file.json>\n");
    return 1;
  }
  try {
    const raw = JSON.parse(fs.readFileSync(argv[0], "utf8"));
    const spec = parseSpec(raw);
    const rows = loadTraces(spec);
    fs.writeFileSync(spec.output, renderSvg(rows, spec));
    return 0;
  } catch (err) {
    if (err instanceof SpecError || err instanceof CsvError || err instanceof RenderError) {
      process.stderr.write(`plots: ${err.message}\n`);
    } else if (err instanceof SyntaxError) {
      process.stderr.write(`plots: invalid JSON spec: ${err.message}\n`);
    } else {
      process.stderr.write(`plots: ${(err as Error).message}\n`);
    }
    return 1;
  }
}

if (require.main === module) {
  process.exit(run(process.argv.slice(2)));
}
