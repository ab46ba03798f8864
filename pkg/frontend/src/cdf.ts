// Coverage-CDF chart model: turns one or two /cdf payloads into polylines in
// chart coordinates plus median markers, so "is the optimized curve right of
// the baseline at the median" is a plain number comparison.

import type { CdfPayload } from "./types";

export interface CdfCurve {
  label: string;
  /** (dbm, fraction) staircase vertices, ascending in dbm */
  steps: [number, number][];
  medianDbm: number;
}

export interface CdfChart {
  curves: CdfCurve[];
  xMinDbm: number;
  xMaxDbm: number;
}

/** First value whose cumulative fraction reaches one half. */
export function medianDbm(payload: CdfPayload): number {
  for (const [v, f] of payload.points) {
    if (f >= 0.5) return v;
  }
  throw new Error("CDF never reaches 0.5 — malformed payload");
}

function staircase(points: [number, number][]): [number, number][] {
  // horizontal run up to each point, then the vertical rise
  const out: [number, number][] = [];
  let prev = 0;
  for (const [v, f] of points) {
    out.push([v, prev], [v, f]);
    prev = f;
  }
  return out;
}

export function cdfChart(payloads: { label: string; cdf: CdfPayload }[]): CdfChart {
  if (payloads.length === 0) throw new Error("no curves to chart");
  const curves = payloads.map(({ label, cdf }) => {
    if (cdf.points.length === 0) throw new Error(`CDF ${label} is empty`);
    return { label, steps: staircase(cdf.points), medianDbm: medianDbm(cdf) };
  });
  const xs = payloads.flatMap((p) => [p.cdf.points[0][0], p.cdf.points[p.cdf.points.length - 1][0]]);
  return { curves, xMinDbm: Math.min(...xs), xMaxDbm: Math.max(...xs) };
}

/**
 * Median improvement of `optimized` over `baseline` in dB. Positive means
 * the optimized curve sits to the right of the baseline at the half mark.
 */
export function medianShiftDb(baseline: CdfPayload, optimized: CdfPayload): number {
  return medianDbm(optimized) - medianDbm(baseline);
}

export interface ChartTransform {
  x(dbm: number): number;
  y(fraction: number): number;
}

export function chartTransform(
  chart: CdfChart,
  widthPx: number,
  heightPx: number,
  pad = 30,
): ChartTransform {
  const span = Math.max(chart.xMaxDbm - chart.xMinDbm, 1e-9);
  return {
    x: (dbm) => pad + ((dbm - chart.xMinDbm) / span) * (widthPx - 2 * pad),
    y: (fraction) => heightPx - pad - fraction * (heightPx - 2 * pad),
  };
}
