/** Deterministic SVG rendering of convergence traces: one polyline per
 * solver, legend from solver names, optional log y-axis. The output is a
 * pure function of the spec and the CSV contents. */

import { TraceRow } from "./csv";
import { PlotSpec } from "./spec";

export class RenderError extends Error {}

const WIDTH = 800;
const HEIGHT = 500;
const MARGIN = { top: 30, right: 170, bottom: 50, left: 70 };
const PALETTE = [
  "#1f77b4",
  "#d62728",
  "#2ca02c",
  "#9467bd",
  "#ff7f0e",
  "#8c564b",
  "#e377c2",
];

interface Series {
  solver: string;
  points: Array<[number, number]>;
}

function xValue(row: TraceRow, spec: PlotSpec): number {
  if (spec.x_axis === "cum_lmo_plus_proj") {
    return row.values["cum_lmo"] + row.values["cum_proj"];
  }
  return row.values[spec.x_axis];
}

/** Group rows into per-solver series, dropping points unusable on the axes
 * (non-finite values; non-positive y under a log scale). Solver order is
 * first appearance, which the CSV writer keeps stable. */
export function buildSeries(rows: TraceRow[], spec: PlotSpec): Series[] {
  const order: string[] = [];
  const bySolver = new Map<string, Array<[number, number]>>();
  for (const row of rows) {
    const x = xValue(row, spec);
    const y = row.values[spec.y_axis];
    if (!Number.isFinite(x) || !Number.isFinite(y)) continue;
    if (spec.log_y && y <= 0) continue;
    if (!bySolver.has(row.solver)) {
      bySolver.set(row.solver, []);
      order.push(row.solver);
    }
    bySolver.get(row.solver)!.push([x, y]);
  }
  return order.map((solver) => ({ solver, points: bySolver.get(solver)! }));
}

function extent(values: number[]): [number, number] {
  let lo = Infinity;
  let hi = -Infinity;
  for (const v of values) {
    if (v < lo) lo = v;
    if (v > hi) hi = v;
  }
  return [lo, hi];
}

/** Tick positions: decades for log scale, five even steps for linear. */
export function tickValues(lo: number, hi: number, log: boolean): number[] {
  if (log) {
    const first = Math.ceil(Math.log10(lo) - 1e-9);
    const last = Math.floor(Math.log10(hi) + 1e-9);
    const ticks: number[] = [];
    for (let e = first; e <= last; e++) ticks.push(Math.pow(10, e));
    return ticks.length > 0 ? ticks : [lo];
  }
  if (lo === hi) return [lo];
  const ticks: number[] = [];
  for (let i = 0; i <= 5; i++) ticks.push(lo + ((hi - lo) * i) / 5);
  return ticks;
}

function fmt(v: number): string {
  if (v === 0) return "0";
  const abs = Math.abs(v);
  if (abs >= 1e-3 && abs < 1e4) {
    return String(Number(v.toPrecision(4)));
  }
  return v.toExponential(1).replace("e+", "e");
}

export function renderSvg(rows: TraceRow[], spec: PlotSpec): string {
  const series = buildSeries(rows, spec);
  if (series.length === 0) {
    throw new RenderError("no plottable points (all values filtered out)");
  }
  const xs = series.flatMap((s) => s.points.map((p) => p[0]));
  const ys = series.flatMap((s) => s.points.map((p) => p[1]));
  let [xLo, xHi] = extent(xs);
  let [yLo, yHi] = extent(ys);
  if (xLo === xHi) [xLo, xHi] = [xLo - 1, xHi + 1];
  if (yLo === yHi) [yLo, yHi] = spec.log_y ? [yLo / 10, yHi * 10] : [yLo - 1, yHi + 1];

  const plotW = WIDTH - MARGIN.left - MARGIN.right;
  const plotH = HEIGHT - MARGIN.top - MARGIN.bottom;
  const sx = (x: number) => MARGIN.left + ((x - xLo) / (xHi - xLo)) * plotW;
  const sy = (y: number) => {
    const t = spec.log_y
      ? (Math.log10(y) - Math.log10(yLo)) / (Math.log10(yHi) - Math.log10(yLo))
      : (y - yLo) / (yHi - yLo);
    return MARGIN.top + (1 - t) * plotH;
  };
  const px = (v: number) => v.toFixed(2);

  const parts: string[] = [];
  parts.push(
    `<svg xmlns="http://www.w3.org/2000/svg" width="${WIDTH}" height="${HEIGHT}" ` +
      `viewBox="0 0 ${WIDTH} ${HEIGHT}" data-y-scale="${spec.log_y ? "log" : "linear"}">`,
  );
  parts.push(`<rect width="${WIDTH}" height="${HEIGHT}" fill="white"/>`);

  // axes
  const x0 = MARGIN.left;
  const y0 = MARGIN.top + plotH;
  parts.push(
    `<g class="axes" stroke="#333" fill="none">` +
      `<line x1="${x0}" y1="${MARGIN.top}" x2="${x0}" y2="${y0}"/>` +
      `<line x1="${x0}" y1="${y0}" x2="${x0 + plotW}" y2="${y0}"/>` +
      `</g>`,
  );
  for (const t of tickValues(xLo, xHi, false)) {
    const x = px(sx(t));
    parts.push(
      `<g class="x-tick"><line x1="${x}" y1="${y0}" x2="${x}" y2="${y0 + 5}" stroke="#333"/>` +
        `<text x="${x}" y="${y0 + 20}" font-size="11" text-anchor="middle">${fmt(t)}</text></g>`,
    );
  }
  for (const t of tickValues(yLo, yHi, spec.log_y)) {
    const y = px(sy(t));
    parts.push(
      `<g class="y-tick"><line x1="${x0 - 5}" y1="${y}" x2="${x0}" y2="${y}" stroke="#333"/>` +
        `<text x="${x0 - 8}" y="${y}" font-size="11" text-anchor="end" dominant-baseline="middle">${fmt(t)}</text></g>`,
    );
  }
  parts.push(
    `<text x="${x0 + plotW / 2}" y="${HEIGHT - 10}" font-size="12" text-anchor="middle">${spec.x_axis}</text>`,
  );
  parts.push(
    `<text x="18" y="${MARGIN.top + plotH / 2}" font-size="12" text-anchor="middle" ` +
      `transform="rotate(-90 18 ${MARGIN.top + plotH / 2})">${spec.y_axis}</text>`,
  );

  // series
  series.forEach((s, i) => {
    const color = PALETTE[i % PALETTE.length];
    const pts = s.points.map(([x, y]) => `${px(sx(x))},${px(sy(y))}`).join(" ");
    parts.push(
      `<polyline class="series" data-solver="${s.solver}" points="${pts}" ` +
        `fill="none" stroke="${color}" stroke-width="1.5"/>`,
    );
  });

  // legend
  series.forEach((s, i) => {
    const color = PALETTE[i % PALETTE.length];
    const ly = MARGIN.top + 14 + i * 18;
    const lx = MARGIN.left + plotW + 12;
    parts.push(
      `<g class="legend-entry">` +
        `<line x1="${lx}" y1="${ly}" x2="${lx + 18}" y2="${ly}" stroke="${color}" stroke-width="2"/>` +
        `<text x="${lx + 24}" y="${ly + 4}" font-size="12">${s.solver}</text></g>`,
    );
  });

  parts.push("</svg>");
  return parts.join("\n") + "\n";
}
