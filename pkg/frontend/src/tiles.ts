/** Slippy tile layer over the service pyramid with stale-load discarding. */

import type { BaseViewport, View } from "./transform.js";
import { visibleTiles } from "./transform.js";

type TileUrlFn = (z: number, x: number, y: number) => string;

export class TileLayer {
  private cache = new Map<string, HTMLImageElement>();
  private generation = 0;

  constructor(private tileUrl: TileUrlFn, private onTileReady: () => void) {}

  /** Invalidate in-flight loads (called on viewport changes). */
  bumpGeneration(): void {
    this.generation++;
  }

  draw(ctx: CanvasRenderingContext2D, base: BaseViewport, view: View,
       widthPx: number, heightPx: number): void {
    const generation = this.generation;
    for (const tile of visibleTiles(base, view, widthPx, heightPx)) {
      const key = `${tile.z}/${tile.x}/${tile.y}`;
      let img = this.cache.get(key);
      if (!img) {
        img = new Image();
        img.onload = () => {
          // a pan/zoom after the request started means this draw is stale
          if (this.generation === generation) this.onTileReady();
        };
        img.src = this.tileUrl(tile.z, tile.x, tile.y);
        this.cache.set(key, img);
      }
      if (img.complete && img.naturalWidth > 0) {
        ctx.drawImage(img, tile.left, tile.top, tile.size, tile.size);
      }
    }
  }

  clear(): void {
    this.cache.clear();
    this.bumpGeneration();
  }
}
