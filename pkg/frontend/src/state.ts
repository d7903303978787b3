/** View state and the pure gallery-filtering logic.
 *
 * Filtering shows a material exactly when its fingerprint lies inside every
 * attribute's [lo, hi] slider range; narrowing any range can therefore only
 * remove results (monotone).
 */

import { Fingerprint, MaterialRecord, N_ATTRIBUTES } from "./types.js";

export type SliderRange = [number, number];

export interface ViewState {
  query: Fingerprint | null;
  sliders: SliderRange[]; // one [lo, hi] per attribute id 1..16
  k: number;
  alpha: number;
  galleryPage: number;
}

export function initialState(): ViewState {
  return {
    query: null,
    sliders: Array.from({ length: N_ATTRIBUTES }, () => [-1, 1] as SliderRange),
    k: 5,
    alpha: 0.5,
    galleryPage: 0,
  };
}

export function setSliderRange(
  state: ViewState,
  attributeId: number,
  lo: number,
  hi: number,
): ViewState {
  if (attributeId < 1 || attributeId > N_ATTRIBUTES) {
    throw new Error(`attribute id out of range: ${attributeId}`);
  }
  if (lo > hi) {
    throw new Error(`empty slider range: [${lo}, ${hi}]`);
  }
  const clamp = (x: number) => Math.max(-1, Math.min(1, x));
  const sliders = state.sliders.slice();
  sliders[attributeId - 1] = [clamp(lo), clamp(hi)];
  return { ...state, sliders, galleryPage: 0 };
}

export function matchesSliders(record: MaterialRecord, sliders: SliderRange[]): boolean {
  return sliders.every(([lo, hi], i) => {
    const v = record.fingerprint.values[i];
    return v >= lo && v <= hi;
  });
}

export interface GalleryView {
  shown: MaterialRecord[];
  total: number;
  count: number;
}

/** Materials inside all 16 ranges, in the server-provided order. */
export function filterGallery(materials: MaterialRecord[], state: ViewState): GalleryView {
  const shown = materials.filter((m) => matchesSliders(m, state.sliders));
  return { shown, total: materials.length, count: shown.length };
}

/**
 * Slider range selecting the top decile of one attribute: [t, 1] where t is
 * the ceil(n/10)-th largest value.  Used by the gallery's "top 10%" shortcut
 * and cross-checked against the server-side ranking in tests.
 */
export function topDecileRange(materials: MaterialRecord[], attributeId: number): SliderRange {
  if (materials.length === 0) {
    return [-1, 1];
  }
  const values = materials
    .map((m) => m.fingerprint.values[attributeId - 1])
    .sort((a, b) => b - a);
  const count = Math.max(1, Math.ceil(values.length / 10));
  return [values[count - 1], 1];
}
