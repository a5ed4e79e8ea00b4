/** Explorer wiring: parameter-plane tile view, click-to-inspect dynamic panel,
 *  overlay toggles, inversion jumps, budget presets, shareable URL state.
 *
 *  Every number shown here comes from the service; the client only does
 *  view geometry.
 */

import { ApiClient, CenterRecord, PointReport, Preset, SingularParameterError } from "./api.js";
import type { Cx } from "./complex.js";
import { cxAbs, cxSub, formatCx } from "./complex.js";
import { drawCenters, drawCircle, drawPolyline } from "./overlays.js";
import { TileLayer } from "./tiles.js";
import type { View } from "./transform.js";
import { complexToPixel, pixelToComplex, unitsPerPixel } from "./transform.js";
import {
  BUDGET_ITERATIONS,
  BudgetPreset,
  OVERLAY_NAMES,
  OverlayName,
  ViewState,
  defaultViewState,
  parseViewState,
  serializeViewState,
} from "./viewstate.js";

const PANEL_PX = 512;
const CENTER_OVERLAY_MIN_ZOOM = 1;

export interface ExplorerOptions {
  width?: number;
  height?: number;
  fragment?: string;
  onFragmentChange?: (fragment: string) => void;
}

export class Explorer {
  readonly api: ApiClient;
  readonly canvas: HTMLCanvasElement;
  readonly infoPanel: HTMLElement;
  readonly dynImage: HTMLImageElement;
  readonly toastBox: HTMLElement;
  state: ViewState;
  preset: Preset | null = null;
  report: PointReport | null = null;

  private readonly width: number;
  private readonly height: number;
  private tiles: TileLayer | null = null;
  private centersCache: CenterRecord[] | null = null;
  private sstarCache: Cx[] | null = null;
  private onFragmentChange: (fragment: string) => void;
  private dragFrom: { x: number; y: number } | null = null;

  constructor(root: HTMLElement, api: ApiClient, options: ExplorerOptions = {}) {
    this.api = api;
    this.width = options.width ?? 768;
    this.height = options.height ?? 640;
    this.onFragmentChange = options.onFragmentChange ?? (() => undefined);
    this.state = parseViewState(options.fragment ?? "");

    root.innerHTML = `
      <div class="explorer">
        <div class="plane-pane">
          <canvas class="param-canvas" width="${this.width}" height="${this.height}"></canvas>
          <div class="controls">
            <span class="overlay-toggles"></span>
            <select class="budget"></select>
            <button class="jump-inverse" disabled>jump to I(&lambda;)</button>
          </div>
        </div>
        <div class="dyn-pane">
          <div class="info-panel">click a parameter to inspect it</div>
          <img class="dyn-image" alt="dynamic plane" width="${PANEL_PX}" height="${PANEL_PX}"/>
        </div>
        <div class="toast" hidden></div>
      </div>`;
    this.canvas = root.querySelector(".param-canvas") as HTMLCanvasElement;
    this.infoPanel = root.querySelector(".info-panel") as HTMLElement;
    this.dynImage = root.querySelector(".dyn-image") as HTMLImageElement;
    this.toastBox = root.querySelector(".toast") as HTMLElement;
    this.buildControls(root);
    this.bindCanvasEvents();
  }

  private buildControls(root: HTMLElement): void {
    const toggles = root.querySelector(".overlay-toggles") as HTMLElement;
    for (const name of OVERLAY_NAMES) {
      const label = document.createElement("label");
      const box = document.createElement("input");
      box.type = "checkbox";
      box.dataset.overlay = name;
      box.checked = this.state.overlays.includes(name);
      box.addEventListener("change", () => {
        void this.toggleOverlay(name, box.checked);
      });
      label.appendChild(box);
      label.appendChild(document.createTextNode(name));
      toggles.appendChild(label);
    }
    const budget = root.querySelector(".budget") as HTMLSelectElement;
    for (const preset of Object.keys(BUDGET_ITERATIONS) as BudgetPreset[]) {
      const option = document.createElement("option");
      option.value = preset;
      option.textContent = `${preset} (${BUDGET_ITERATIONS[preset]} it)`;
      option.selected = preset === this.state.budget;
      budget.appendChild(option);
    }
    budget.addEventListener("change", () => {
      this.state.budget = budget.value as BudgetPreset;
      this.refreshDynamicPanel();
      this.syncFragment();
    });
    const jump = root.querySelector(".jump-inverse") as HTMLButtonElement;
    jump.addEventListener("click", () => {
      void this.jumpToInverse();
    });
  }

  private bindCanvasEvents(): void {
    this.canvas.addEventListener("mousedown", (e) => {
      this.dragFrom = { x: e.offsetX, y: e.offsetY };
    });
    this.canvas.addEventListener("mousemove", (e) => {
      if (!this.dragFrom || !this.preset) return;
      const s = unitsPerPixel(this.baseViewport(), this.view());
      this.state.paramCenter = {
        re: this.state.paramCenter.re - (e.offsetX - this.dragFrom.x) * s,
        im: this.state.paramCenter.im + (e.offsetY - this.dragFrom.y) * s,
      };
      this.dragFrom = { x: e.offsetX, y: e.offsetY };
      this.viewChanged();
    });
    this.canvas.addEventListener("mouseup", (e) => {
      if (!this.dragFrom) return;
      const moved = Math.hypot(e.offsetX - this.dragFrom.x, e.offsetY - this.dragFrom.y);
      this.dragFrom = null;
      if (moved < 3) void this.handleClick(e.offsetX, e.offsetY);
    });
    this.canvas.addEventListener("wheel", (e) => {
      e.preventDefault();
      this.zoomBy(e.deltaY < 0 ? 0.5 : -0.5, e.offsetX, e.offsetY);
    });
  }

  async init(): Promise<void> {
    const presets = await this.api.presets();
    this.preset = presets.find((p) => p.id === this.state.presetId) ?? presets[0] ?? null;
    if (!this.preset) throw new Error("service offers no presets");
    this.tiles = new TileLayer(
      (z, x, y) => this.api.tileUrl(this.preset!.digest, z, x, y),
      () => this.render(),
    );
    if (this.state.selectedLambda !== null) {
      await this.selectLambda(this.state.selectedLambda, { recenterDyn: false });
    }
    this.render();
  }

  baseViewport() {
    if (!this.preset) throw new Error("explorer not initialized");
    return { center: this.preset.center, width: this.preset.width };
  }

  view(): View {
    return { center: this.state.paramCenter, zoom: this.state.paramZoom };
  }

  pixelToLambda(px: number, py: number): Cx {
    return pixelToComplex(this.baseViewport(), this.view(), px, py,
                          this.width, this.height);
  }

  lambdaToPixel(z: Cx): { px: number; py: number } {
    return complexToPixel(this.baseViewport(), this.view(), z,
                          this.width, this.height);
  }

  zoomBy(delta: number, px?: number, py?: number): void {
    const anchor = px !== undefined && py !== undefined
      ? this.pixelToLambda(px, py) : null;
    this.state.paramZoom = Math.max(0, Math.min(40, this.state.paramZoom + delta));
    if (anchor && px !== undefined && py !== undefined) {
      // keep the complex point under the cursor fixed
      const after = this.pixelToLambda(px, py);
      this.state.paramCenter = {
        re: this.state.paramCenter.re + (anchor.re - after.re),
        im: this.state.paramCenter.im + (anchor.im - after.im),
      };
    }
    this.viewChanged();
  }

  private viewChanged(): void {
    this.tiles?.bumpGeneration();
    this.render();
    this.syncFragment();
  }

  async handleClick(px: number, py: number): Promise<void> {
    await this.selectLambda(this.pixelToLambda(px, py));
  }

  async selectLambda(lambda: Cx, opts: { recenterDyn?: boolean } = {}): Promise<void> {
    if (!this.preset) return;
    try {
      this.report = await this.api.classify(this.preset.rho, lambda);
    } catch (err) {
      if (err instanceof SingularParameterError) {
        this.toast("singular parameter");
        return;
      }
      throw err;
    }
    this.state.selectedLambda = lambda;
    if (opts.recenterDyn !== false) {
      this.state.dynCenter = { re: 0, im: 0 };
    }
    this.renderInfoPanel();
    this.refreshDynamicPanel();
    const jump = document.querySelector(".jump-inverse") as HTMLButtonElement | null;
    if (jump) jump.disabled = false;
    this.render();
    this.syncFragment();
  }

  private renderInfoPanel(): void {
    const r = this.report;
    if (!r) return;
    const rows = [
      `<div class="kind">${r.kind}</div>`,
      `<div>&lambda; = ${formatCx(r.lambda)}</div>`,
      `<div>&mu; = ${formatCx(r.mu)}</div>`,
    ];
    if (r.period !== null) {
      rows.push(`<div>period ${r.period}</div>`);
    }
    if (r.multiplier !== null) {
      rows.push(`<div>multiplier ${formatCx(r.multiplier)} (|&nu;| = ${cxAbs(r.multiplier).toExponential(3)})</div>`);
    }
    if (r.itinerary !== null) {
      rows.push(`<div>itinerary [${r.itinerary.join(", ")}]</div>`);
    }
    if (r.sPartition !== null) {
      rows.push(`<div>partition ${r.sPartition}</div>`);
    }
    rows.push(`<div>orbits: &lambda; ${r.orbitLambda.verdict} (${r.orbitLambda.iterationsUsed}), ` +
      `&mu; ${r.orbitMu.verdict} (${r.orbitMu.iterationsUsed})</div>`);
    this.infoPanel.innerHTML = rows.join("\n");
  }

  refreshDynamicPanel(): void {
    if (!this.preset || this.state.selectedLambda === null) return;
    this.dynImage.src = this.api.dynamicImageUrl(
      this.preset.rho, this.state.selectedLambda, PANEL_PX,
      this.state.dynCenter, this.state.dynWidth,
      BUDGET_ITERATIONS[this.state.budget]);
  }

  async jumpToInverse(): Promise<void> {
    if (!this.preset || this.state.selectedLambda === null) return;
    const inverted = await this.api.invert(this.preset.rho, this.state.selectedLambda);
    this.state.paramCenter = inverted;
    this.viewChanged();
    await this.selectLambda(inverted);
  }

  async toggleOverlay(name: OverlayName, on: boolean): Promise<void> {
    const active = new Set(this.state.overlays);
    if (on) active.add(name);
    else active.delete(name);
    this.state.overlays = OVERLAY_NAMES.filter((n) => active.has(n));
    if (on && name === "centers" && this.centersCache === null && this.preset) {
      const b = this.baseViewport();
      this.centersCache = await this.api.centers(
        this.preset.rho,
        [b.center.re - b.width / 2, b.center.re + b.width / 2,
         b.center.im - b.width / 2, b.center.im + b.width / 2], 3);
    }
    if (on && name === "sstar" && this.sstarCache === null && this.preset) {
      this.sstarCache = await this.api.sstar(this.preset.rho, 128);
    }
    // toggling off only redraws; caches are kept so re-enabling needs no fetch
    this.render();
    this.syncFragment();
  }

  render(): void {
    const ctx = this.canvas.getContext("2d");
    if (!ctx || !this.preset || !this.tiles) return;
    const base = this.baseViewport();
    const view = this.view();
    ctx.fillStyle = "#101010";
    ctx.fillRect(0, 0, this.width, this.height);
    this.tiles.draw(ctx, base, view, this.width, this.height);
    if (this.state.overlays.includes("c0circle")) {
      drawCircle(ctx, { re: this.preset.rho.re / 2, im: this.preset.rho.im / 2 },
                 cxAbs(this.preset.rho) / 2, base, view, this.width, this.height);
    }
    if (this.state.overlays.includes("sstar") && this.sstarCache) {
      drawPolyline(ctx, this.sstarCache, base, view, this.width, this.height);
    }
    if (this.state.overlays.includes("centers") && this.centersCache
        && view.zoom >= CENTER_OVERLAY_MIN_ZOOM) {
      drawCenters(ctx, this.centersCache, base, view, this.width, this.height);
    }
    if (this.state.selectedLambda !== null) {
      const { px, py } = this.lambdaToPixel(this.state.selectedLambda);
      ctx.strokeStyle = "#ffffff";
      ctx.beginPath();
      ctx.arc(px, py, 6, 0, 2 * Math.PI);
      ctx.stroke();
    }
  }

  syncFragment(): void {
    this.onFragmentChange(serializeViewState(this.state));
  }

  toast(message: string): void {
    this.toastBox.textContent = message;
    this.toastBox.removeAttribute("hidden");
    setTimeout(() => this.toastBox.setAttribute("hidden", ""), 2500);
  }
}

export { defaultViewState, parseViewState, serializeViewState };
