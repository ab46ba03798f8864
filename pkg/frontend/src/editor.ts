// Top-down scene view with a draggable ceiling rectangle.
//
// Plain canvas 2D: obstacles as filled boxes / wall lines, machines as dots
// sized by traffic weight, trajectories as dashed polylines, and the region
// draft as a translucent rectangle with corner handles. Dragging inside the
// rectangle moves it, dragging a handle resizes it, dragging on empty floor
// starts a new rectangle. Everything is clamped to the scene bounds, so the
// draft can always be submitted as-is.

import { clampToBounds, normalized, type RegionDraft } from "./region";
import type { SceneDoc } from "./types";

export interface WorldTransform {
  toPx(x: number, y: number): [number, number];
  toWorld(px: number, py: number): [number, number];
  scale: number;
}

export function worldTransform(
  bounds: { min: number[]; max: number[] },
  canvasW: number,
  canvasH: number,
  margin = 14,
): WorldTransform {
  const wx = bounds.max[0] - bounds.min[0];
  const wy = bounds.max[1] - bounds.min[1];
  const scale = Math.min((canvasW - 2 * margin) / wx, (canvasH - 2 * margin) / wy);
  const ox = (canvasW - wx * scale) / 2;
  const oy = (canvasH - wy * scale) / 2;
  return {
    scale,
    // world y up, canvas y down
    toPx: (x, y) => [ox + (x - bounds.min[0]) * scale, canvasH - oy - (y - bounds.min[1]) * scale],
    toWorld: (px, py) => [
      bounds.min[0] + (px - ox) / scale,
      bounds.min[1] + (canvasH - oy - py) / scale,
    ],
  };
}

type DragMode =
  | { kind: "none" }
  | { kind: "draw"; startX: number; startY: number }
  | { kind: "move"; offX: number; offY: number }
  | { kind: "resize"; corner: number };

const HANDLE_PX = 7;

export class RegionEditor {
  draft: RegionDraft | null = null;
  onChange: (draft: RegionDraft) => void = () => {};

  private scene: SceneDoc | null = null;
  private tf: WorldTransform | null = null;
  private drag: DragMode = { kind: "none" };
  private bestPosition: number[] | null = null;

  constructor(private canvas: HTMLCanvasElement) {
    canvas.addEventListener("pointerdown", (e) => this.pointerDown(e));
    canvas.addEventListener("pointermove", (e) => this.pointerMove(e));
    canvas.addEventListener("pointerup", (e) => this.pointerUp(e));
  }

  setScene(scene: SceneDoc, initialDraft: RegionDraft | null): void {
    this.scene = scene;
    this.tf = worldTransform(scene.bounds, this.canvas.width, this.canvas.height);
    this.draft = initialDraft;
    this.bestPosition = null;
    this.render();
  }

  /** Mark the planner's answer on the floorplan. */
  showBest(position: number[] | null): void {
    this.bestPosition = position;
    this.render();
  }

  setHeight(z: number): void {
    if (!this.draft || !this.scene) return;
    this.draft = clampToBounds({ ...this.draft, z }, this.scene.bounds.min, this.scene.bounds.max);
    this.onChange(this.draft);
    this.render();
  }

  private corners(d: RegionDraft): [number, number][] {
    const n = normalized(d);
    return [
      [n.x0, n.y0],
      [n.x1, n.y0],
      [n.x1, n.y1],
      [n.x0, n.y1],
    ];
  }

  private hitCorner(px: number, py: number): number | null {
    if (!this.draft || !this.tf) return null;
    const cs = this.corners(this.draft);
    for (let i = 0; i < 4; i++) {
      const [cx, cy] = this.tf.toPx(cs[i][0], cs[i][1]);
      if (Math.abs(px - cx) <= HANDLE_PX && Math.abs(py - cy) <= HANDLE_PX) return i;
    }
    return null;
  }

  private inside(x: number, y: number): boolean {
    if (!this.draft) return false;
    const n = normalized(this.draft);
    return x >= n.x0 && x <= n.x1 && y >= n.y0 && y <= n.y1;
  }

  private pointerDown(e: PointerEvent): void {
    if (!this.scene || !this.tf) return;
    this.canvas.setPointerCapture(e.pointerId);
    const r = this.canvas.getBoundingClientRect();
    const px = ((e.clientX - r.left) / r.width) * this.canvas.width;
    const py = ((e.clientY - r.top) / r.height) * this.canvas.height;
    const corner = this.hitCorner(px, py);
    const [x, y] = this.tf.toWorld(px, py);
    if (corner !== null) {
      this.drag = { kind: "resize", corner };
    } else if (this.inside(x, y)) {
      const n = normalized(this.draft!);
      this.drag = { kind: "move", offX: x - n.x0, offY: y - n.y0 };
    } else {
      const z = this.draft?.z ?? this.scene.bounds.max[2];
      this.draft = { z, x0: x, y0: y, x1: x, y1: y };
      this.drag = { kind: "draw", startX: x, startY: y };
    }
  }

  private pointerMove(e: PointerEvent): void {
    if (!this.scene || !this.tf || this.drag.kind === "none") return;
    const r = this.canvas.getBoundingClientRect();
    const px = ((e.clientX - r.left) / r.width) * this.canvas.width;
    const py = ((e.clientY - r.top) / r.height) * this.canvas.height;
    let [x, y] = this.tf.toWorld(px, py);
    const { min, max } = this.scene.bounds;
    x = Math.min(max[0], Math.max(min[0], x));
    y = Math.min(max[1], Math.max(min[1], y));

    if (this.drag.kind === "draw") {
      this.draft = { ...this.draft!, x1: x, y1: y };
    } else if (this.drag.kind === "move") {
      const n = normalized(this.draft!);
      const w = n.x1 - n.x0;
      const h = n.y1 - n.y0;
      let nx0 = x - this.drag.offX;
      let ny0 = y - this.drag.offY;
      nx0 = Math.min(max[0] - w, Math.max(min[0], nx0));
      ny0 = Math.min(max[1] - h, Math.max(min[1], ny0));
      this.draft = { z: n.z, x0: nx0, y0: ny0, x1: nx0 + w, y1: ny0 + h };
    } else {
      const n = normalized(this.draft!);
      const xs = [n.x0, n.x1, n.x1, n.x0];
      const ys = [n.y0, n.y0, n.y1, n.y1];
      xs[this.drag.corner] = x;
      ys[this.drag.corner] = y;
      // opposite corner stays put
      const opp = (this.drag.corner + 2) % 4;
      this.draft = { z: n.z, x0: xs[opp], y0: ys[opp], x1: x, y1: y };
    }
    this.render();
  }

  private pointerUp(e: PointerEvent): void {
    if (this.drag.kind === "none") return;
    this.canvas.releasePointerCapture(e.pointerId);
    this.drag = { kind: "none" };
    if (this.draft && this.scene) {
      this.draft = normalized(
        clampToBounds(this.draft, this.scene.bounds.min, this.scene.bounds.max),
      );
      this.onChange(this.draft);
    }
    this.render();
  }

  render(): void {
    const ctx = this.canvas.getContext("2d");
    if (!ctx || !this.scene || !this.tf) return;
    const { width, height } = this.canvas;
    ctx.clearRect(0, 0, width, height);

    // floor
    const [fx0, fy0] = this.tf.toPx(this.scene.bounds.min[0], this.scene.bounds.max[1]);
    const [fx1, fy1] = this.tf.toPx(this.scene.bounds.max[0], this.scene.bounds.min[1]);
    ctx.fillStyle = "#f4f2ec";
    ctx.fillRect(fx0, fy0, fx1 - fx0, fy1 - fy0);
    ctx.strokeStyle = "#444";
    ctx.lineWidth = 2;
    ctx.strokeRect(fx0, fy0, fx1 - fx0, fy1 - fy0);

    for (const ob of this.scene.obstacles) {
      if (ob.shape.type === "box") {
        const [cx, cy] = ob.shape.center;
        const [sx, sy] = ob.shape.size;
        const [px0, py0] = this.tf.toPx(cx - sx / 2, cy + sy / 2);
        const [px1, py1] = this.tf.toPx(cx + sx / 2, cy - sy / 2);
        ctx.fillStyle = "#b9b2a6";
        ctx.fillRect(px0, py0, px1 - px0, py1 - py0);
        ctx.strokeStyle = "#6f6a60";
        ctx.lineWidth = 1;
        ctx.strokeRect(px0, py0, px1 - px0, py1 - py0);
      } else {
        ctx.strokeStyle = "#6f6a60";
        ctx.lineWidth = 3;
        ctx.beginPath();
        const cs = ob.shape.corners;
        const [ax, ay] = this.tf.toPx(cs[0][0], cs[0][1]);
        ctx.moveTo(ax, ay);
        for (const c of cs.slice(1)) {
          const [bx, by] = this.tf.toPx(c[0], c[1]);
          ctx.lineTo(bx, by);
        }
        ctx.stroke();
      }
    }

    ctx.setLineDash([6, 4]);
    ctx.strokeStyle = "#7b9e6b";
    ctx.lineWidth = 2;
    for (const tr of this.scene.trajectories) {
      ctx.beginPath();
      tr.waypoints.forEach((wp, i) => {
        const [px, py] = this.tf!.toPx(wp[0], wp[1]);
        if (i === 0) ctx.moveTo(px, py);
        else ctx.lineTo(px, py);
      });
      ctx.stroke();
    }
    ctx.setLineDash([]);

    for (const m of this.scene.machines) {
      const [px, py] = this.tf.toPx(m.position[0], m.position[1]);
      ctx.fillStyle = "#3a6ea5";
      ctx.beginPath();
      ctx.arc(px, py, 3 + Math.sqrt(m.traffic_weight) * 2, 0, 2 * Math.PI);
      ctx.fill();
    }

    if (this.draft) {
      const n = normalized(this.draft);
      const [px0, py0] = this.tf.toPx(n.x0, n.y1);
      const [px1, py1] = this.tf.toPx(n.x1, n.y0);
      ctx.fillStyle = "rgba(221,134,40,0.18)";
      ctx.fillRect(px0, py0, px1 - px0, py1 - py0);
      ctx.strokeStyle = "#dd8628";
      ctx.lineWidth = 2;
      ctx.strokeRect(px0, py0, px1 - px0, py1 - py0);
      ctx.fillStyle = "#dd8628";
      for (const [cx, cy] of this.corners(n)) {
        const [hx, hy] = this.tf.toPx(cx, cy);
        ctx.fillRect(hx - 4, hy - 4, 8, 8);
      }
    }

    if (this.bestPosition) {
      const [px, py] = this.tf.toPx(this.bestPosition[0], this.bestPosition[1]);
      ctx.strokeStyle = "#c0392b";
      ctx.lineWidth = 3;
      ctx.beginPath();
      ctx.moveTo(px - 8, py - 8);
      ctx.lineTo(px + 8, py + 8);
      ctx.moveTo(px - 8, py + 8);
      ctx.lineTo(px + 8, py - 8);
      ctx.stroke();
    }
  }
}
