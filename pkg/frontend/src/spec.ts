/** Plot description consumed by the renderer and the CLI. */

export const X_AXES = ["iter", "cum_lmo_plus_proj", "wall_ns"] as const;
export type XAxis = (typeof X_AXES)[number];

export interface PlotSpec {
  input_csvs: string[];
  x_axis: XAxis;
  y_axis: string;
  log_y: boolean;
  output: string;
}

export class SpecError extends Error {}

/** Validate an untyped object (parsed JSON) into a PlotSpec. */
export function parseSpec(raw: unknown): PlotSpec {
  if (typeof raw !== "object" || raw === null || Array.isArray(raw)) {
    throw new SpecError("spec must be a JSON object");
  }
  const obj = raw as Record<string, unknown>;
  const csvs = obj["input_csvs"];
  if (!Array.isArray(csvs) || csvs.length === 0 || !csvs.every((p) => typeof p === "string")) {
    throw new SpecError("input_csvs must be a non-empty list of paths");
  }
  const xAxis = obj["x_axis"];
  if (typeof xAxis !== "string" || !(X_AXES as readonly string[]).includes(xAxis)) {
    throw new SpecError(`x_axis must be one of ${X_AXES.join(", ")}`);
  }
  const yAxis = obj["y_axis"];
  if (typeof yAxis !== "string" || yAxis.length === 0) {
    throw new SpecError("y_axis must name a metric column");
  }
  const output = obj["output"];
  if (typeof output !== "string" || output.length === 0) {
    throw new SpecError("output must be a file path");
  }
  return {
    input_csvs: csvs as string[],
    x_axis: xAxis as XAxis,
    y_axis: yAxis,
    log_y: Boolean(obj["log_y"]),
    output,
  };
}
