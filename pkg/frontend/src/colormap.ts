export type Stop = [number, number, number]; // rgb in [0, 1]

export const JET: Stop[] = [
  [0.0, 0.0, 0.5],
  [0.0, 0.0, 1.0],
  [0.0, 1.0, 1.0],
  [1.0, 1.0, 0.0],
  [1.0, 0.0, 0.0],
  [0.5, 0.0, 0.0],
];

export const GRAY: Stop[] = [
  [0.0, 0.0, 0.0],
  [1.0, 1.0, 1.0],
];

export const COLORMAPS: Record<string, Stop[]> = { jet: JET, gray: GRAY };

/** Piecewise-linear map from [0, 1] to an rgb triple. */
export function mapColor(v: number, stops: Stop[] = JET): Stop {
  const t = Math.min(1, Math.max(0, v)) * (stops.length - 1);
  const i = Math.min(stops.length - 2, Math.floor(t));
  const f = t - i;
  const lo = stops[i];
  const hi = stops[i + 1];
  return [
    lo[0] + f * (hi[0] - lo[0]),
    lo[1] + f * (hi[1] - lo[1]),
    lo[2] + f * (hi[2] - lo[2]),
  ];
}

export function toHex([r, g, b]: Stop): string {
  const c = (x: number) =>
    Math.round(255 * x)
      .toString(16)
      .padStart(2, "0");
  return `#${c(r)}${c(g)}${c(b)}`;
}

/** Categorical line colors for overlay plots. */
export const LINE_COLORS = [
  "#1f3fbf",
  "#c23b22",
  "#1a8a3c",
  "#b58900",
  "#7a2fa0",
  "#00838f",
];
