// Slice rendering model. Kept separate from the canvas so the cell grid the
// viewer paints can be checked cell-for-cell against the service payload.

import { rampColor, VMAX_DBM, VMIN_DBM } from "./ramp";
import type { SlicePayload } from "./types";

export interface SliceCell {
  x: number;
  y: number;
  valueDbm: number;
  color: [number, number, number];
}

export interface SliceModel {
  zCenterM: number;
  nx: number;
  ny: number;
  /** cells[i][j] corresponds to payload values[i][j] */
  cells: SliceCell[][];
}

export function sliceModel(
  payload: SlicePayload,
  vmin = VMIN_DBM,
  vmax = VMAX_DBM,
): SliceModel {
  const nx = payload.x_centers.length;
  const ny = payload.y_centers.length;
  if (payload.values.length !== nx || payload.values.some((row) => row.length !== ny)) {
    throw new Error(`slice values are not ${nx}x${ny}`);
  }
  const cells = payload.values.map((row, i) =>
    row.map((v, j) => ({
      x: payload.x_centers[i],
      y: payload.y_centers[j],
      valueDbm: v,
      color: rampColor(v, vmin, vmax),
    })),
  );
  return { zCenterM: payload.z_center_m, nx, ny, cells };
}

interface FillRectContext {
  fillStyle: string | CanvasGradient | CanvasPattern;
  fillRect(x: number, y: number, w: number, h: number): void;
}

/**
 * Paint the model into a canvas-like context, one rectangle per voxel cell.
 * World y points up, canvas y points down, so row 0 of the image is max y.
 */
export function drawSlice(
  ctx: FillRectContext,
  model: SliceModel,
  widthPx: number,
  heightPx: number,
): void {
  const cw = widthPx / model.nx;
  const ch = heightPx / model.ny;
  for (let i = 0; i < model.nx; i++) {
    for (let j = 0; j < model.ny; j++) {
      const c = model.cells[i][j].color;
      ctx.fillStyle = `rgb(${c[0]},${c[1]},${c[2]})`;
      ctx.fillRect(i * cw, (model.ny - 1 - j) * ch, Math.ceil(cw), Math.ceil(ch));
    }
  }
}

/**
 * Voxel-center z values selectable for a map, derived from its meta doc.
 * The top voxel may be thinner than the resolution (the grid clips it to the
 * bounds), so its center is the midpoint of what is left, not z0+(k+0.5)*res.
 */
export function sliceHeights(meta: {
  bounds?: unknown;
  dims?: unknown;
  resolution_m?: unknown;
}): number[] {
  const dims = meta.dims as number[];
  const res = meta.resolution_m as number;
  const bounds = meta.bounds as { min: number[]; max: number[] };
  if (!dims || !bounds || typeof res !== "number") {
    throw new Error("map meta is missing dims/bounds/resolution_m");
  }
  const z0 = bounds.min[2];
  const extent = bounds.max[2] - z0;
  return Array.from({ length: dims[2] }, (_, k) => {
    const lo = k * res;
    return z0 + lo + Math.min(res, extent - lo) / 2;
  });
}
