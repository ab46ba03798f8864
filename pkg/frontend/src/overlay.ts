// Overlay preview model: scale the service's per-pixel hits onto whatever
// canvas size the preview actually has, since the camera frame (e.g.
// 960x540) rarely matches the on-screen element.

import { rampColor } from "./ramp";
import type { OverlayPayload } from "./types";

export interface OverlayDot {
  xPx: number;
  yPx: number;
  color: [number, number, number];
  depthM: number;
  valueDbm: number;
}

export function overlayDots(
  payload: OverlayPayload,
  canvasW: number,
  canvasH: number,
): OverlayDot[] {
  const [fw, fh] = payload.frame_size;
  const sx = canvasW / fw;
  const sy = canvasH / fh;
  return payload.pixels.map(([u, v, dbm, depth]) => ({
    xPx: u * sx,
    yPx: v * sy,
    color: rampColor(dbm),
    depthM: depth,
    valueDbm: dbm,
  }));
}

/** Dot radius shrinking with distance, clamped to stay visible. */
export function dotRadiusPx(depthM: number, scale = 12): number {
  return Math.max(2, Math.min(10, scale / Math.max(depthM, 0.5)));
}

export type Quat = [number, number, number, number]; // (x, y, z, w)

/** Hamilton product a*b in scalar-last storage. */
export function qmul(a: Quat, b: Quat): Quat {
  const [x1, y1, z1, w1] = a;
  const [x2, y2, z2, w2] = b;
  return [
    w1 * x2 + x1 * w2 + y1 * z2 - z1 * y2,
    w1 * y2 - x1 * z2 + y1 * w2 + z1 * x2,
    w1 * z2 + x1 * y2 - y1 * x2 + z1 * w2,
    w1 * w2 - x1 * x2 - y1 * y2 - z1 * z2,
  ];
}

/** Rotate a point by a unit quaternion (camera-to-world convention). */
export function qrotate(q: Quat, p: [number, number, number]): [number, number, number] {
  const [x, y, z, w] = q;
  const qp = qmul([x, y, z, w], [p[0], p[1], p[2], 0]);
  const [rx, ry, rz] = qmul(qp, [-x, -y, -z, w]);
  return [rx, ry, rz];
}

/**
 * Camera-to-world quaternion for an upright camera: at yaw 0 the optical
 * axis looks along world +x with the image right edge toward -y; positive
 * yaw turns it counterclockwise (toward +y) about the world z axis.
 */
export function cameraQuaternion(yawDeg: number): Quat {
  const base: Quat = [-0.5, 0.5, -0.5, 0.5];
  const h = (yawDeg * Math.PI) / 360;
  const yaw: Quat = [0, 0, Math.sin(h), Math.cos(h)];
  return qmul(yaw, base);
}
