import { writeFileSync } from "node:fs";
import {
  AngularHist,
  GridField,
  Series,
  labelFor,
  loadAngular,
  loadGridField,
  loadSeries,
} from "./csv.js";
import { JET, LINE_COLORS, Stop, mapColor, toHex } from "./colormap.js";
import { Svg } from "./svg.js";

export type FigureKind = "heatmap" | "angular-overlay" | "decay-curve";

export interface FigureSpec {
  inputs: string[];
  kind: FigureKind;
  range: [number, number];
  out: string;
  colormap?: Stop[];
}

export interface HeatmapData {
  nx: number;
  ny: number;
  range: [number, number];
  /** Clamped field values, one panel per input, [ix][iy]. */
  panels: number[][][];
  labels: string[];
}

export interface OverlayData {
  x: number[];
  curves: number[][];
  labels: string[];
  logY: boolean;
}

const CELL = 6; // pixels per grid cell
const GAP = 14;
const MARGIN = 30;

/** Clamp every panel into the shared color range. */
export function heatmapData(
  fields: GridField[],
  range: [number, number]
): HeatmapData {
  if (fields.length === 0) {
    throw new Error("heatmap needs at least one input");
  }
  const { nx, ny } = fields[0];
  for (const f of fields) {
    if (f.nx !== nx || f.ny !== ny) {
      throw new Error(
        `grid geometry mismatch: ${f.source} is ${f.nx}x${f.ny}, ` +
          `expected ${nx}x${ny}`
      );
    }
  }
  const [lo, hi] = range;
  const panels = fields.map((f) =>
    f.values.map((col) => col.map((v) => Math.min(hi, Math.max(lo, v))))
  );
  return { nx, ny, range, panels, labels: fields.map((f) => labelFor(f.source)) };
}

function drawColorBar(
  svg: Svg,
  x: number,
  y: number,
  w: number,
  range: [number, number],
  stops: Stop[]
): void {
  const n = 120;
  for (let i = 0; i < n; i++) {
    svg.rect(x + (i * w) / n, y, w / n + 0.5, 10, toHex(mapColor(i / (n - 1), stops)));
  }
  svg.text(x, y + 22, String(range[0]), 10, "middle");
  svg.text(x + w, y + 22, String(range[1]), 10, "middle");
}

/** One panel per input field, one shared horizontal color bar. */
export function renderHeatmap(spec: FigureSpec): HeatmapData {
  const data = heatmapData(spec.inputs.map(loadGridField), spec.range);
  const stops = spec.colormap ?? JET;
  const { nx, ny, panels } = data;
  const pw = nx * CELL;
  const ph = ny * CELL;
  const width = 2 * MARGIN + panels.length * pw + (panels.length - 1) * GAP;
  const height = 2 * MARGIN + ph + 50;
  const svg = new Svg(width, height);
  const [lo, hi] = data.range;
  const span = hi - lo || 1;
  panels.forEach((panel, p) => {
    const x0 = MARGIN + p * (pw + GAP);
    for (let i = 0; i < nx; i++) {
      for (let j = 0; j < ny; j++) {
        const v = (panel[i][j] - lo) / span;
        // j grows upward; SVG y grows downward
        svg.rect(
          x0 + i * CELL,
          MARGIN + (ny - 1 - j) * CELL,
          CELL,
          CELL,
          toHex(mapColor(v, stops))
        );
      }
    }
    svg.text(x0 + pw / 2, MARGIN - 8, data.labels[p], 11, "middle");
  });
  drawColorBar(svg, MARGIN, MARGIN + ph + 16, width - 2 * MARGIN, data.range, stops);
  writeFileSync(spec.out, svg.toString());
  return data;
}

/** Bin-midpoint grid plus one normalized curve per input. */
export function angularData(hists: AngularHist[]): OverlayData {
  if (hists.length === 0) {
    throw new Error("angular overlay needs at least one input");
  }
  const nbins = hists[0].values.length;
  for (const h of hists) {
    if (h.values.length !== nbins) {
      throw new Error(
        `bin count mismatch: ${h.source} has ${h.values.length} bins, ` +
          `expected ${nbins}`
      );
    }
  }
  const x = Array.from(
    { length: nbins },
    (_, i) => ((i + 0.5) * 2 * Math.PI) / nbins
  );
  return {
    x,
    curves: hists.map((h) => h.values.slice()),
    labels: hists.map((h) => labelFor(h.source)),
    logY: false,
  };
}

/** Error series drop over decades; rate curves stay linear. */
export function decayData(series: Series[]): OverlayData {
  if (series.length === 0) {
    throw new Error("decay curve needs at least one input");
  }
  const kind = series[0].yLabel;
  for (const s of series) {
    if (s.yLabel !== kind) {
      throw new Error(`mixed series kinds: ${s.source} is ${s.yLabel}`);
    }
  }
  return {
    x: series[0].x.slice(),
    curves: series.map((s) => s.y.slice()),
    labels: series.map((s) => labelFor(s.source)),
    logY: kind === "l2_error",
  };
}

function drawOverlay(spec: FigureSpec, data: OverlayData): void {
  const width = 420;
  const height = 300;
  const x0 = 50;
  const y0 = 20;
  const pw = width - x0 - 20;
  const ph = height - y0 - 40;
  const svg = new Svg(width, height);
  const ys = data.curves.flat().map((v) => (data.logY ? Math.log10(Math.max(v, 1e-300)) : v));
  const xmin = Math.min(...data.x);
  const xmax = Math.max(...data.x);
  const ymin = Math.min(...ys, 0 * Number(!data.logY));
  const ymax = Math.max(...ys);
  const sx = (x: number) => x0 + ((x - xmin) / (xmax - xmin || 1)) * pw;
  const sy = (y: number) => y0 + ph - ((y - ymin) / (ymax - ymin || 1)) * ph;
  svg.line(x0, y0 + ph, x0 + pw, y0 + ph, "#000");
  svg.line(x0, y0, x0, y0 + ph, "#000");
  data.curves.forEach((curve, c) => {
    const pts = curve.map((v, i): [number, number] => [
      sx(data.x[i]),
      sy(data.logY ? Math.log10(Math.max(v, 1e-300)) : v),
    ]);
    const color = LINE_COLORS[c % LINE_COLORS.length];
    svg.polyline(pts, color);
    svg.line(x0 + pw - 110, y0 + 14 * c + 8, x0 + pw - 90, y0 + 14 * c + 8, color);
    svg.text(x0 + pw - 85, y0 + 14 * c + 12, data.labels[c], 10);
  });
  svg.text(x0 + pw / 2, height - 8, data.logY ? "t" : "x", 11, "middle");
  svg.text(12, y0 + ph / 2, data.logY ? "log10 error" : "value", 11, "middle");
  writeFileSync(spec.out, svg.toString());
}

/** Overlaid θ-distributions with one legend entry per input file. */
export function renderAngular(spec: FigureSpec): OverlayData {
  const data = angularData(spec.inputs.map(loadAngular));
  drawOverlay(spec, data);
  return data;
}

/** Overlaid decay curves (error series or fitted rates). */
export function renderDecay(spec: FigureSpec): OverlayData {
  const data = decayData(spec.inputs.map(loadSeries));
  drawOverlay(spec, data);
  return data;
}

export function renderFigure(spec: FigureSpec): HeatmapData | OverlayData {
  switch (spec.kind) {
    case "heatmap":
      return renderHeatmap(spec);
    case "angular-overlay":
      return renderAngular(spec);
    case "decay-curve":
      return renderDecay(spec);
  }
}
