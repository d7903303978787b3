/** Radar-chart rendering of a 16-attribute fingerprint as an SVG string.
 *
 * Axes follow five perceptual clusters (gloss, texture and pattern, light
 * and color, physical, abstract) so charts of different materials stay
 * visually comparable.  A value of -1 sits at the center, 0 at mid radius,
 * +1 on the outer ring.  When standard errors are present they render as a
 * translucent band around the contour (thicker band = less certain).
 * Output is a pure function of the input, so identical fingerprints yield
 * identical SVG text.
 */

import { AttributeSchema, Fingerprint, N_ATTRIBUTES } from "./types.js";

/** Attribute ids (1-based) in display order, grouped by cluster. */
export const RADAR_AXIS_ORDER: number[] = [
  7, 8, 10, // gloss: shininess, sparkle, movement effect
  2, 3, 4, 5, 11, // texture and pattern: roughness, complexity, striped, checkered, scale
  6, 1, 14, // light and color: brightness, color vibrancy, multicolored
  9, 13, 16, // physical: hardness, thickness, warmth
  12, 15, // abstract: naturalness, value
];

const SIZE = 420;
const CENTER = SIZE / 2;
const RADIUS = 150;
const LABEL_RADIUS = RADIUS + 26;

function fmt(x: number): string {
  return x.toFixed(2);
}

function polar(axis: number, radius: number): [number, number] {
  const angle = -Math.PI / 2 + (2 * Math.PI * axis) / N_ATTRIBUTES;
  return [CENTER + radius * Math.cos(angle), CENTER + radius * Math.sin(angle)];
}

function valueRadius(value: number): number {
  const clamped = Math.max(-1, Math.min(1, value));
  return (RADIUS * (clamped + 1)) / 2;
}

function polygonPoints(radii: number[]): string {
  return radii
    .map((r, axis) => polar(axis, r).map(fmt).join(","))
    .join(" ");
}

export function renderFingerprint(fp: Fingerprint, schema: AttributeSchema): string {
  if (fp.values.length !== N_ATTRIBUTES || schema.attributes.length !== N_ATTRIBUTES) {
    throw new Error(`fingerprint and schema must both have ${N_ATTRIBUTES} attributes`);
  }
  if (fp.schema_version !== schema.version) {
    throw new Error(
      `schema mismatch: fingerprint ${fp.schema_version}, schema ${schema.version}`,
    );
  }
  const byId = new Map(schema.attributes.map((a) => [a.id, a]));
  const orderedValues = RADAR_AXIS_ORDER.map((id) => fp.values[id - 1]);
  const orderedErr = fp.stderr ? RADAR_AXIS_ORDER.map((id) => fp.stderr![id - 1]) : null;

  const parts: string[] = [];
  parts.push(
    `<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 ${SIZE} ${SIZE}" ` +
      `class="fingerprint-radar" data-material="${fp.material_id}">`,
  );

  // rings at values -0.5, 0, +0.5, +1
  for (const ringValue of [-0.5, 0, 0.5, 1]) {
    const r = valueRadius(ringValue);
    parts.push(
      `<polygon class="ring" fill="none" stroke="#ccc" stroke-width="0.5" ` +
        `points="${polygonPoints(new Array(N_ATTRIBUTES).fill(r))}"/>`,
    );
  }

  // axes and labels with boundary anchors
  RADAR_AXIS_ORDER.forEach((id, axis) => {
    const attr = byId.get(id)!;
    const [x1, y1] = polar(axis, 0);
    const [x2, y2] = polar(axis, RADIUS);
    const [lx, ly] = polar(axis, LABEL_RADIUS);
    parts.push(
      `<line class="axis" x1="${fmt(x1)}" y1="${fmt(y1)}" x2="${fmt(x2)}" y2="${fmt(y2)}" ` +
        `stroke="#999" stroke-width="0.5"/>`,
    );
    parts.push(
      `<text class="axis-label" x="${fmt(lx)}" y="${fmt(ly)}" font-size="9" ` +
        `text-anchor="middle">${attr.name}</text>`,
    );
    parts.push(
      `<text class="axis-bounds" x="${fmt(lx)}" y="${fmt(ly + 10)}" font-size="7" ` +
        `fill="#777" text-anchor="middle">${attr.boundary_low}–${attr.boundary_high}</text>`,
    );
  });

  // stderr band: region between (value - err) and (value + err)
  if (orderedErr) {
    const outer = orderedValues.map((v, i) => valueRadius(v + orderedErr[i]));
    const inner = orderedValues.map((v, i) => valueRadius(v - orderedErr[i]));
    parts.push(
      `<path class="stderr-band" fill="#4477aa" fill-opacity="0.25" fill-rule="evenodd" d="` +
        `M ${polygonPoints(outer).split(" ").join(" L ")} Z ` +
        `M ${polygonPoints(inner).split(" ").join(" L ")} Z"/>`,
    );
  }

  parts.push(
    `<polygon class="contour" fill="#4477aa" fill-opacity="0.35" stroke="#225588" ` +
      `stroke-width="1.5" points="${polygonPoints(orderedValues.map(valueRadius))}"/>`,
  );
  parts.push("</svg>");
  return parts.join("");
}
