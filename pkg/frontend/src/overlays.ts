/** Canvas overlays: virtual-center markers, the S_* trace, the inversion circle. */

import type { Cx } from "./complex.js";
import { formatCx } from "./complex.js";
import type { CenterRecord } from "./api.js";
import type { BaseViewport, View } from "./transform.js";
import { complexToPixel } from "./transform.js";

export function drawCenters(
  ctx: CanvasRenderingContext2D, centers: CenterRecord[],
  base: BaseViewport, view: View, w: number, h: number,
): void {
  ctx.save();
  ctx.fillStyle = "#ffffff";
  ctx.strokeStyle = "#000000";
  ctx.font = "11px monospace";
  for (const c of centers) {
    const { px, py } = complexToPixel(base, view, c.location, w, h);
    if (px < -20 || px > w + 20 || py < -20 || py > h + 20) continue;
    ctx.beginPath();
    ctx.arc(px, py, 3, 0, 2 * Math.PI);
    ctx.fill();
    ctx.stroke();
    ctx.fillText(`[${c.itinerary.join(",")}]`, px + 5, py - 5);
  }
  ctx.restore();
}

export function drawPolyline(
  ctx: CanvasRenderingContext2D, points: Cx[],
  base: BaseViewport, view: View, w: number, h: number,
  color = "#ffffff", closed = true,
): void {
  if (points.length < 2) return;
  ctx.save();
  ctx.strokeStyle = color;
  ctx.lineWidth = 1.5;
  ctx.beginPath();
  points.forEach((z, i) => {
    const { px, py } = complexToPixel(base, view, z, w, h);
    if (i === 0) ctx.moveTo(px, py);
    else ctx.lineTo(px, py);
  });
  if (closed) ctx.closePath();
  ctx.stroke();
  ctx.restore();
}

export function drawCircle(
  ctx: CanvasRenderingContext2D, center: Cx, radius: number,
  base: BaseViewport, view: View, w: number, h: number,
  color = "#dddddd",
): void {
  const points: Cx[] = [];
  for (let i = 0; i < 128; i++) {
    const t = (2 * Math.PI * i) / 128;
    points.push({
      re: center.re + radius * Math.cos(t),
      im: center.im + radius * Math.sin(t),
    });
  }
  drawPolyline(ctx, points, base, view, w, h, color, true);
}

export function markerTitle(c: CenterRecord): string {
  return `order ${c.order} ${c.markedAv} [${c.itinerary.join(",")}] at ${formatCx(c.location)}`;
}
