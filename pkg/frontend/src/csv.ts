import { readFileSync } from "node:fs";
import { basename } from "node:path";
import Papa from "papaparse";

export interface GridField {
  nx: number;
  ny: number;
  values: number[][]; // [ix][iy]
  source: string;
}

export interface AngularHist {
  values: number[];
  source: string;
}

export interface Series {
  x: number[];
  y: number[];
  xLabel: string;
  yLabel: string;
  source: string;
}

type Row = Record<string, number>;

function parseRows(path: string): { fields: string[]; rows: Row[] } {
  const text = readFileSync(path, "utf-8");
  const parsed = Papa.parse<Row>(text.trim(), {
    header: true,
    dynamicTyping: true,
    skipEmptyLines: true,
  });
  if (parsed.errors.length > 0) {
    throw new Error(`${path}: ${parsed.errors[0].message}`);
  }
  const fields = parsed.meta.fields ?? [];
  return { fields, rows: parsed.data };
}

function hasFields(fields: string[], wanted: string[]): boolean {
  return wanted.every((f) => fields.includes(f));
}

/** Strip directory and extension; used for legend labels. */
export function labelFor(path: string): string {
  return basename(path).replace(/\.csv$/, "");
}

/**
 * Load a 2D density field. Accepts the hist2d (ix, iy, value),
 * rho2d (t, ix, iy, rho) and rhogrid (t, ix, iy, rho, phi, ...) layouts.
 */
export function loadGridField(path: string): GridField {
  const { fields, rows } = parseRows(path);
  let valueKey: string;
  if (hasFields(fields, ["ix", "iy", "value"])) {
    valueKey = "value";
  } else if (hasFields(fields, ["ix", "iy", "rho"])) {
    valueKey = "rho";
  } else {
    throw new Error(`${path}: not a grid CSV (fields: ${fields.join(", ")})`);
  }
  let nx = 0;
  let ny = 0;
  for (const row of rows) {
    nx = Math.max(nx, row.ix + 1);
    ny = Math.max(ny, row.iy + 1);
  }
  if (rows.length !== nx * ny) {
    throw new Error(`${path}: expected ${nx * ny} cells, got ${rows.length}`);
  }
  const values: number[][] = Array.from({ length: nx }, () =>
    new Array<number>(ny).fill(NaN)
  );
  for (const row of rows) {
    values[row.ix][row.iy] = row[valueKey];
  }
  return { nx, ny, values, source: path };
}

/** Load a θ-histogram CSV (itheta, value). */
export function loadAngular(path: string): AngularHist {
  const { fields, rows } = parseRows(path);
  if (!hasFields(fields, ["itheta", "value"])) {
    throw new Error(`${path}: not a θ-histogram CSV`);
  }
  const values = new Array<number>(rows.length).fill(NaN);
  for (const row of rows) {
    values[row.itheta] = row.value;
  }
  return { values, source: path };
}

/**
 * Load a curve for the decay figure: either an error series (t, l2_error)
 * or fitted rates over noise levels (A, B, lambda).
 */
export function loadSeries(path: string): Series {
  const { fields, rows } = parseRows(path);
  let xKey: string;
  let yKey: string;
  if (hasFields(fields, ["t", "l2_error"])) {
    xKey = "t";
    yKey = "l2_error";
  } else if (hasFields(fields, ["A", "lambda"])) {
    xKey = "A";
    yKey = "lambda";
  } else {
    throw new Error(`${path}: not an error-series or decay-rates CSV`);
  }
  return {
    x: rows.map((r) => r[xKey]),
    y: rows.map((r) => r[yKey]),
    xLabel: xKey,
    yLabel: yKey,
    source: path,
  };
}
