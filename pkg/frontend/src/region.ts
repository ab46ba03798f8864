// Ceiling-rectangle region draft: the thing the editor drags around.
//
// Coordinates are stored raw while dragging and rounded to whole
// centimeters on serialization, so draw -> serialize -> load returns the
// same geometry to within 1 cm and a draft is always a valid region (corners
// ordered, clamped to the scene).

import type { RegionWire } from "./types";

export interface RegionDraft {
  z: number;
  x0: number;
  y0: number;
  x1: number;
  y1: number;
}

const roundCm = (v: number) => Math.round(v * 100) / 100;

/** Ordered, cm-rounded copy — what every serializer starts from. */
export function normalized(d: RegionDraft): RegionDraft {
  return {
    z: roundCm(d.z),
    x0: roundCm(Math.min(d.x0, d.x1)),
    y0: roundCm(Math.min(d.y0, d.y1)),
    x1: roundCm(Math.max(d.x0, d.x1)),
    y1: roundCm(Math.max(d.y0, d.y1)),
  };
}

export function clampToBounds(d: RegionDraft, min: number[], max: number[]): RegionDraft {
  const cx = (v: number) => Math.min(max[0], Math.max(min[0], v));
  const cy = (v: number) => Math.min(max[1], Math.max(min[1], v));
  return {
    z: Math.min(max[2], Math.max(min[2], d.z)),
    x0: cx(d.x0),
    y0: cy(d.y0),
    x1: cx(d.x1),
    y1: cy(d.y1),
  };
}

export function toWire(d: RegionDraft): RegionWire {
  const n = normalized(d);
  return { kind: "ceiling", z: n.z, rect: [n.x0, n.y0, n.x1, n.y1] };
}

export function fromWire(w: RegionWire): RegionDraft {
  if (w.kind !== "ceiling") {
    throw new Error(`editor only holds ceiling regions, got ${w.kind}`);
  }
  const [x0, y0, x1, y1] = w.rect;
  return normalized({ z: w.z, x0, y0, x1, y1 });
}

const fmt = (v: number) => String(roundCm(v));

/** The CLI's region text form, e.g. "ceiling:z=4:0,0,15,10". */
export function toGrammar(d: RegionDraft): string {
  const n = normalized(d);
  return `ceiling:z=${fmt(n.z)}:${fmt(n.x0)},${fmt(n.y0)},${fmt(n.x1)},${fmt(n.y1)}`;
}

export function fromGrammar(text: string): RegionDraft {
  const m = /^ceiling:z=([^:]+):([^,]+),([^,]+),([^,]+),([^,]+)$/.exec(text.trim());
  if (!m) throw new Error(`not a ceiling region: ${JSON.stringify(text)}`);
  const nums = m.slice(1).map(Number);
  if (nums.some((v) => !Number.isFinite(v))) {
    throw new Error(`non-numeric field in region: ${JSON.stringify(text)}`);
  }
  return normalized({ z: nums[0], x0: nums[1], y0: nums[2], x1: nums[3], y1: nums[4] });
}
