/** Loading of solver trace CSVs against the documented schema. */

import * as fs from "fs";
import Papa from "papaparse";

import { PlotSpec, XAxis } from "./spec";

/** Column order written by the experiment harness. */
export const SCHEMA_COLUMNS = [
  "solver",
  "iter",
  "cum_lmo",
  "cum_proj",
  "cum_diag_proj",
  "cum_g_evals",
  "gap",
  "wardrop",
  "dist_to_oracle",
  "wall_ns",
] as const;

export class CsvError extends Error {}

export interface TraceRow {
  solver: string;
  values: Record<string, number>;
}

/** Columns a spec needs beyond the solver label. */
export function requiredColumns(xAxis: XAxis, yAxis: string): string[] {
  const xCols = xAxis === "cum_lmo_plus_proj" ? ["cum_lmo", "cum_proj"] : [xAxis];
  return [...xCols, yAxis];
}

export function parseCsv(text: string, path: string, needed: string[]): TraceRow[] {
  const parsed = Papa.parse<Record<string, string>>(text.trim(), {
    header: true,
    skipEmptyLines: true,
  });
  if (parsed.errors.length > 0) {
    throw new CsvError(`${path}: ${parsed.errors[0].message}`);
  }
  const header = parsed.meta.fields ?? [];
  for (const col of ["solver", ...needed]) {
    if (!header.includes(col)) {
      throw new CsvError(`${path}: missing column '${col}'`);
    }
  }
  return parsed.data.map((row, i) => {
    const values: Record<string, number> = {};
    for (const col of needed) {
      const v = Number(row[col]);
      if (Number.isNaN(v) && row[col] !== "nan") {
        throw new CsvError(`${path} row ${i + 1}: non-numeric value in '${col}'`);
      }
      values[col] = v;
    }
    return { solver: row["solver"], values };
  });
}

/** Load every input CSV of a spec; validation errors name the offending column. */
export function loadTraces(spec: PlotSpec): TraceRow[] {
  const needed = requiredColumns(spec.x_axis, spec.y_axis);
  const rows: TraceRow[] = [];
  for (const path of spec.input_csvs) {
    let text: string;
    try {
      text = fs.readFileSync(path, "utf8");
    } catch (err) {
      throw new CsvError(`cannot read ${path}: ${(err as Error).message}`);
    }
    rows.push(...parseCsv(text, path, needed));
  }
  return rows;
}
