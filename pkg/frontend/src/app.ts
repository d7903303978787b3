/** DOM wiring for the explorer page: load schema and materials, render the
 * gallery with 16 range sliders, show radar fingerprints, browse retrieval
 * neighbors, and accept a two-shot upload for prediction.  All data flows
 * through the /v1 API; logic lives in the pure modules. */

import { ApiClient, ApiRequestError, LatestWins } from "./api.js";
import { renderFingerprint } from "./radar.js";
import { renderNeighborList } from "./retrieval.js";
import { filterGallery, initialState, setSliderRange, topDecileRange, ViewState } from "./state.js";
import { AttributeSchema, MaterialRecord } from "./types.js";

export class App {
  private state: ViewState = initialState();
  private schema: AttributeSchema | null = null;
  private materials: MaterialRecord[] = [];
  private readonly retrieval = new LatestWins<string>();

  constructor(
    private readonly api: ApiClient,
    private readonly root: Document = document,
  ) {}

  async start(): Promise<void> {
    try {
      this.schema = await this.api.getAttributes();
      this.materials = await this.api.getMaterials();
    } catch (err) {
      this.showError(err);
      return;
    }
    this.renderSliders();
    this.renderGallery();
  }

  private el(id: string): HTMLElement {
    const node = this.root.getElementById(id);
    if (!node) throw new Error(`missing element #${id}`);
    return node;
  }

  private showError(err: unknown): void {
    const banner = this.el("error-banner");
    banner.hidden = false;
    banner.textContent =
      err instanceof ApiRequestError
        ? `${err.code}: ${err.message}`
        : "service unreachable; retry shortly";
    const retry = this.root.createElement("button");
    retry.textContent = "retry";
    retry.addEventListener("click", () => {
      banner.hidden = true;
      void this.start();
    });
    banner.appendChild(retry);
  }

  private renderSliders(): void {
    const host = this.el("sliders");
    host.innerHTML = "";
    for (const attr of this.schema!.attributes) {
      const row = this.root.createElement("div");
      row.className = "slider-row";
      row.innerHTML =
        `<label>${attr.name} <small>${attr.boundary_low}–${attr.boundary_high}</small></label>` +
        `<input type="range" min="-1" max="1" step="0.05" value="-1" data-attr="${attr.id}" data-end="lo">` +
        `<input type="range" min="-1" max="1" step="0.05" value="1" data-attr="${attr.id}" data-end="hi">` +
        `<button data-attr="${attr.id}" class="top-decile">top 10%</button>`;
      host.appendChild(row);
    }
    host.addEventListener("input", (event) => {
      const input = event.target as HTMLInputElement;
      if (!input.dataset.attr) return;
      const id = Number(input.dataset.attr);
      const [lo, hi] = this.state.sliders[id - 1];
      const value = Number(input.value);
      const next = input.dataset.end === "lo" ? [Math.min(value, hi), hi] : [lo, Math.max(value, lo)];
      this.state = setSliderRange(this.state, id, next[0], next[1]);
      this.renderGallery();
    });
    host.addEventListener("click", (event) => {
      const button = event.target as HTMLElement;
      if (!button.classList.contains("top-decile")) return;
      const id = Number(button.dataset.attr);
      const [lo, hi] = topDecileRange(this.materials, id);
      this.state = setSliderRange(this.state, id, lo, hi);
      this.renderGallery();
    });
  }

  private renderGallery(): void {
    const view = filterGallery(this.materials, this.state);
    this.el("gallery-count").textContent =
      view.count === 0
        ? `no materials match the current ranges (of ${view.total})`
        : `${view.count} of ${view.total} materials`;
    const host = this.el("gallery");
    host.innerHTML = "";
    for (const record of view.shown) {
      const card = this.root.createElement("div");
      card.className = "material-card";
      card.dataset.material = record.material_id;
      card.innerHTML =
        `<h3>${record.material_id} <small>${record.category}</small></h3>` +
        renderFingerprint(record.fingerprint, this.schema!);
      card.addEventListener("click", () => void this.showNeighbors(record.material_id));
      host.appendChild(card);
    }
  }

  private async showNeighbors(materialId: string): Promise<void> {
    const html = await this.retrieval.run(async () => {
      const response = await this.api.retrieve(
        { material_id: materialId },
        this.state.k,
        this.state.alpha,
      );
      return renderNeighborList(response.results);
    });
    if (html !== undefined) {
      this.el("neighbors").innerHTML = `<h2>similar to ${materialId}</h2>${html}`;
    }
  }
}

export function mount(baseUrl: string): App {
  const app = new App(new ApiClient(baseUrl));
  void app.start();
  return app;
}
