import { describe, expect, it } from "vitest";

import { cxAbs, cxSub } from "../src/complex.js";
import {
  BaseViewport,
  TILE_SIZE,
  View,
  complexToPixel,
  pixelToComplex,
  visibleTiles,
} from "../src/transform.js";

const BASE: BaseViewport = { center: { re: 1.5, im: 0 }, width: 5 };
const W = 768;
const H = 640;

describe("pixel/complex transforms", () => {
  it("inverse composition holds to 1e-12 relative across the f64 zoom range", () => {
    // beyond zoom ~14 one ulp of the center exceeds 1e-12 of the canvas, so
    // the tight bound is asserted there and a sub-pixel bound out to zoom 40
    for (let zoom = 0; zoom <= 40; zoom += 2) {
      const view: View = {
        center: { re: 0.9670147930553765, im: 2.2169914216039266 },
        zoom,
      };
      const pxTol = zoom <= 14 ? 1e-12 * Math.max(W, H) : 1e-3;
      for (const [px, py] of [[0, 0], [W, H], [123.25, 456.75], [W / 2, H / 2]]) {
        const z = pixelToComplex(BASE, view, px!, py!, W, H);
        const back = complexToPixel(BASE, view, z, W, H);
        expect(Math.abs(back.px - px!)).toBeLessThan(pxTol);
        expect(Math.abs(back.py - py!)).toBeLessThan(pxTol);
      }
      for (const z of [{ re: 2, im: 2 }, view.center, { re: 0.1, im: -0.4 }]) {
        const p = complexToPixel(BASE, view, z, W, H);
        const back = pixelToComplex(BASE, view, p.px, p.py, W, H);
        const scale = Math.max(1, cxAbs(z));
        expect(cxAbs(cxSub(back, z))).toBeLessThan(1e-12 * scale);
      }
    }
  });

  it("centers the view", () => {
    const view: View = { center: { re: 2, im: -1 }, zoom: 4 };
    const z = pixelToComplex(BASE, view, W / 2, H / 2, W, H);
    expect(z.re).toBeCloseTo(2, 12);
    expect(z.im).toBeCloseTo(-1, 12);
  });
});

describe("visible tiles", () => {
  it("covers the canvas at the rounded zoom", () => {
    const view: View = { center: BASE.center, zoom: 2 };
    const tiles = visibleTiles(BASE, view, W, H);
    expect(tiles.length).toBeGreaterThan(0);
    for (const t of tiles) {
      expect(t.z).toBe(2);
      expect(t.x).toBeGreaterThanOrEqual(0);
      expect(t.x).toBeLessThan(4);
      expect(t.y).toBeGreaterThanOrEqual(0);
      expect(t.y).toBeLessThan(4);
      expect(t.size).toBeCloseTo(TILE_SIZE, 6);
    }
    // the four canvas corners inside the base viewport are covered by a tile
    for (const [px, py] of [[1, 1], [W - 1, 1], [1, H - 1], [W - 1, H - 1], [W / 2, H / 2]]) {
      const covered = tiles.some((t) =>
        px! >= t.left && px! <= t.left + t.size &&
        py! >= t.top && py! <= t.top + t.size);
      expect(covered).toBe(true);
    }
  });

  it("clips to the pyramid bounds", () => {
    const view: View = { center: { re: -50, im: 50 }, zoom: 1 };
    expect(visibleTiles(BASE, view, W, H)).toEqual([]);
  });
});
