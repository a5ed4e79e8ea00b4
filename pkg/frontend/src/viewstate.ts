/** Shareable explorer state, serialized into the URL fragment. */

import type { Cx } from "./complex.js";
import { parseWire, toWire } from "./complex.js";

export type BudgetPreset = "fast" | "normal" | "deep";

export const BUDGET_ITERATIONS: Record<BudgetPreset, number> = {
  fast: 400,
  normal: 2000,
  deep: 8000,
};

export const OVERLAY_NAMES = ["centers", "sstar", "c0circle"] as const;
export type OverlayName = (typeof OVERLAY_NAMES)[number];

export interface ViewState {
  presetId: string;
  paramCenter: Cx;
  paramZoom: number;
  selectedLambda: Cx | null;
  dynCenter: Cx;
  dynWidth: number;
  overlays: OverlayName[];
  budget: BudgetPreset;
}

export function defaultViewState(presetId = "preset-0"): ViewState {
  return {
    presetId,
    paramCenter: { re: 1.5, im: 0 },
    paramZoom: 1,
    selectedLambda: null,
    dynCenter: { re: 0, im: 0 },
    dynWidth: 8,
    overlays: [],
    budget: "normal",
  };
}

export function serializeViewState(state: ViewState): string {
  const parts = [
    `preset=${encodeURIComponent(state.presetId)}`,
    `pc=${toWire(state.paramCenter)}`,
    `pz=${state.paramZoom}`,
    `dc=${toWire(state.dynCenter)}`,
    `dw=${state.dynWidth}`,
    `budget=${state.budget}`,
  ];
  if (state.selectedLambda !== null) {
    parts.push(`lambda=${toWire(state.selectedLambda)}`);
  }
  if (state.overlays.length > 0) {
    parts.push(`ov=${state.overlays.join("+")}`);
  }
  return parts.join("&");
}

export function parseViewState(fragment: string): ViewState {
  const state = defaultViewState();
  const text = fragment.startsWith("#") ? fragment.slice(1) : fragment;
  if (!text) return state;
  for (const part of text.split("&")) {
    const eq = part.indexOf("=");
    if (eq < 0) continue;
    const key = part.slice(0, eq);
    const value = decodeURIComponent(part.slice(eq + 1));
    try {
      switch (key) {
        case "preset":
          state.presetId = value;
          break;
        case "pc":
          state.paramCenter = parseWire(value);
          break;
        case "pz": {
          const zoom = Number(value);
          if (Number.isFinite(zoom)) state.paramZoom = zoom;
          break;
        }
        case "lambda":
          state.selectedLambda = parseWire(value);
          break;
        case "dc":
          state.dynCenter = parseWire(value);
          break;
        case "dw": {
          const width = Number(value);
          if (Number.isFinite(width) && width > 0) state.dynWidth = width;
          break;
        }
        case "ov":
          state.overlays = value
            .split("+")
            .filter((s): s is OverlayName =>
              (OVERLAY_NAMES as readonly string[]).includes(s));
          break;
        case "budget":
          if (value === "fast" || value === "normal" || value === "deep") {
            state.budget = value;
          }
          break;
      }
    } catch {
      // ignore malformed fields; the rest of the fragment still applies
    }
  }
  return state;
}
