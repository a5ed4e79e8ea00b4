/** Pixel <-> complex transforms for a pan/zoom view over a square base viewport.
 *
 * The server's tile pyramid covers the preset base viewport with 256*2^z
 * pixels at zoom z; the client view keeps a complex center and a continuous
 * zoom, and converts between CSS-pixel canvas coordinates and plane points.
 */

import type { Cx } from "./complex.js";

export const TILE_SIZE = 256;

export interface BaseViewport {
  center: Cx;
  width: number;
}

export interface View {
  center: Cx;
  zoom: number; // log2 scale relative to the base viewport at 256 px
}

/** Complex-plane units per CSS pixel at this view. */
export function unitsPerPixel(base: BaseViewport, view: View): number {
  return base.width / (TILE_SIZE * Math.pow(2, view.zoom));
}

export function pixelToComplex(
  base: BaseViewport, view: View, px: number, py: number,
  widthPx: number, heightPx: number,
): Cx {
  const s = unitsPerPixel(base, view);
  return {
    re: view.center.re + (px - widthPx / 2) * s,
    im: view.center.im - (py - heightPx / 2) * s,
  };
}

export function complexToPixel(
  base: BaseViewport, view: View, z: Cx,
  widthPx: number, heightPx: number,
): { px: number; py: number } {
  const s = unitsPerPixel(base, view);
  return {
    px: widthPx / 2 + (z.re - view.center.re) / s,
    py: heightPx / 2 - (z.im - view.center.im) / s,
  };
}

export interface TileAddress {
  z: number;
  x: number;
  y: number;
  /** CSS-pixel placement on the canvas. */
  left: number;
  top: number;
  size: number;
}

/** Tiles of the integer zoom level nearest the view that intersect the canvas. */
export function visibleTiles(
  base: BaseViewport, view: View, widthPx: number, heightPx: number,
  maxZoom = 40,
): TileAddress[] {
  const z = Math.max(0, Math.min(maxZoom, Math.round(view.zoom)));
  const n = Math.pow(2, z);
  const tileUnits = base.width / n;
  const s = unitsPerPixel(base, view);
  const sizePx = tileUnits / s;
  const origin: Cx = {
    re: base.center.re - base.width / 2,
    im: base.center.im + base.width / 2,
  };
  const topLeft = pixelToComplex(base, view, 0, 0, widthPx, heightPx);
  const x0 = Math.floor((topLeft.re - origin.re) / tileUnits);
  const y0 = Math.floor((origin.im - topLeft.im) / tileUnits);
  const cols = Math.ceil(widthPx / sizePx) + 1;
  const rows = Math.ceil(heightPx / sizePx) + 1;
  const out: TileAddress[] = [];
  for (let y = Math.max(0, y0); y < Math.min(n, y0 + rows + 1); y++) {
    for (let x = Math.max(0, x0); x < Math.min(n, x0 + cols + 1); x++) {
      const re = origin.re + x * tileUnits;
      const im = origin.im - y * tileUnits;
      const { px, py } = complexToPixel(base, view, { re, im }, widthPx, heightPx);
      out.push({ z, x, y, left: px, top: py, size: sizePx });
    }
  }
  return out;
}
