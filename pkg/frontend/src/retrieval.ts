/** Neighbor-list rendering.  The API's ranked order is the display order;
 * no client-side re-sorting ever happens here. */

import { RetrieveResult } from "./types.js";

export function displayedOrder(results: RetrieveResult[]): string[] {
  return results.map((r) => r.material_id);
}

export function renderNeighborList(results: RetrieveResult[]): string {
  const items = results.map((r) => {
    const typ = r.typicality == null ? "" : ` <span class="typicality">typ ${r.typicality.toFixed(3)}</span>`;
    return (
      `<li class="neighbor" data-material="${r.material_id}">` +
      `<span class="mid">${r.material_id}</span> ` +
      `<span class="score">${r.score.toFixed(3)}</span>${typ}</li>`
    );
  });
  return `<ol class="neighbor-list">${items.join("")}</ol>`;
}
