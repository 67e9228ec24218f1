/** Application wiring: model picker, scenario form, chart, comparison.
 *
 * One prediction may be in flight per scenario slot; responses landing
 * after a newer submission are discarded by request token.
 */

import { ApiClient, ApiError } from "./api.js";
import { renderSurvivalChart, type ChartSeries } from "./chart.js";
import { formatDelta, formatProbability, verdict } from "./format.js";
import { FormValidationError, renderModelForm, type ModelForm } from "./form.js";
import { deltaTable, MixedModelComparison, ScenarioStore } from "./scenarios.js";
import { HORIZONS, type ModelDescriptor, type PredictResponse, type Scenario } from "./types.js";

export class App {
  readonly store = new ScenarioStore();
  private descriptors: ModelDescriptor[] = [];
  private currentDescriptor: ModelDescriptor | null = null;
  private form: ModelForm | null = null;
  private currentScenario: Scenario | null = null;
  private requestToken = 0;

  constructor(
    private readonly root: HTMLElement,
    private readonly api: ApiClient,
  ) {}

  async boot(): Promise<void> {
    this.root.replaceChildren();
    this.root.appendChild(this.skeleton());
    try {
      this.descriptors = await this.api.models();
    } catch {
      this.showRetryBanner();
      return;
    }
    if (this.descriptors.length === 0) {
      this.section("form-section").textContent = "No models are loaded on the server.";
      return;
    }
    this.populateModelPicker();
    this.selectModel(this.descriptors[0].model_id);
  }

  private skeleton(): HTMLElement {
    const wrap = document.createElement("div");
    wrap.className = "app";
    wrap.innerHTML = `
      <header><h1>Survival what-if explorer</h1></header>
      <div id="banner"></div>
      <section id="picker-section">
        <label for="model-picker">Model</label>
        <select id="model-picker"></select>
      </section>
      <section id="form-section"></section>
      <section id="controls-section">
        <label><input type="checkbox" id="with-bands" checked> 95% band</label>
        <label>resamples <input type="number" id="n-resamples" value="1000" min="2"></label>
        <label>seed <input type="number" id="seed" value="0" min="0"></label>
        <button id="submit-btn" type="button">Predict</button>
        <button id="pin-btn" type="button" disabled>Pin scenario</button>
      </section>
      <section id="result-section">
        <div id="chips"></div>
        <div id="chart"></div>
      </section>
      <section id="compare-section">
        <h2>Pinned scenarios</h2>
        <div id="compare-message"></div>
        <div id="compare-chart"></div>
        <div id="compare-table"></div>
      </section>`;
    wrap.querySelector("#model-picker")!.addEventListener("change", (event) => {
      this.selectModel((event.target as HTMLSelectElement).value);
    });
    wrap.querySelector("#submit-btn")!.addEventListener("click", () => {
      void this.submit();
    });
    wrap.querySelector("#pin-btn")!.addEventListener("click", () => this.pinCurrent());
    return wrap;
  }

  private section(id: string): HTMLElement {
    return this.root.querySelector(`#${id}`) as HTMLElement;
  }

  private showRetryBanner(): void {
    const banner = this.section("banner");
    banner.innerHTML = "";
    const box = document.createElement("div");
    box.className = "retry-banner";
    box.setAttribute("role", "alert");
    box.textContent = "Could not load the model list. ";
    const retry = document.createElement("button");
    retry.type = "button";
    retry.textContent = "Retry";
    retry.addEventListener("click", () => void this.boot());
    box.appendChild(retry);
    banner.appendChild(box);
  }

  private populateModelPicker(): void {
    const picker = this.section("model-picker") as unknown as HTMLSelectElement;
    picker.replaceChildren();
    for (const d of this.descriptors) {
      const option = document.createElement("option");
      option.value = d.model_id;
      option.textContent = `${d.model_id} (${d.kind})`;
      picker.appendChild(option);
    }
  }

  /** Rebuild the form for a model; pinned scenarios survive the switch. */
  selectModel(modelId: string): void {
    const descriptor = this.descriptors.find((d) => d.model_id === modelId);
    if (!descriptor) {
      return;
    }
    this.currentDescriptor = descriptor;
    this.form = renderModelForm(descriptor, this.section("form-section"));
    this.currentScenario = null;
    (this.section("pin-btn") as unknown as HTMLButtonElement).disabled = true;
    this.section("chips").replaceChildren();
    this.section("chart").replaceChildren();
  }

  private numberControl(id: string): number {
    return Number((this.section(id) as unknown as HTMLInputElement).value);
  }

  async submit(): Promise<void> {
    if (!this.form || !this.currentDescriptor) {
      return;
    }
    let attributes: Record<string, string | number>;
    try {
      attributes = this.form.read();
    } catch (error) {
      if (error instanceof FormValidationError) {
        return; // field messages already shown
      }
      throw error;
    }

    const token = ++this.requestToken;
    const request = {
      model_id: this.currentDescriptor.model_id,
      attributes,
      with_bands: (this.section("with-bands") as unknown as HTMLInputElement).checked,
      n_resamples: this.numberControl("n-resamples"),
      seed: this.numberControl("seed"),
    };
    let response: PredictResponse;
    try {
      response = await this.api.predict(request);
    } catch (error) {
      if (token === this.requestToken && error instanceof ApiError) {
        for (const fieldError of error.fieldErrors) {
          this.form.setFieldError(fieldError.field, fieldError.message);
        }
        if (error.fieldErrors.length === 0) {
          this.section("chips").textContent = error.message;
        }
      }
      return;
    }
    if (token !== this.requestToken) {
      return; // a newer submission superseded this one
    }

    this.currentScenario = {
      label: this.scenarioLabel(attributes),
      modelId: this.currentDescriptor.model_id,
      attributes,
      response,
      pinned: false,
    };
    (this.section("pin-btn") as unknown as HTMLButtonElement).disabled = false;
    this.renderResult(response);
  }

  private scenarioLabel(attributes: Record<string, string | number>): string {
    const parts = Object.entries(attributes)
      .slice(0, 3)
      .map(([k, v]) => `${k}=${v}`);
    return parts.join(", ") || "scenario";
  }

  private renderResult(response: PredictResponse): void {
    const chips = this.section("chips");
    chips.replaceChildren();
    for (const h of HORIZONS) {
      const score = response.horizon_probs[String(h)];
      const chip = document.createElement("span");
      chip.className = `horizon-chip verdict-${verdict(score)}`;
      chip.dataset.horizon = String(h);
      chip.textContent = `S(${h}) = ${formatProbability(score)} · ${verdict(score)}`;
      chips.appendChild(chip);
    }
    renderSurvivalChart(this.section("chart"), [
      {
        label: this.currentScenario?.label ?? "scenario",
        months: response.months,
        survival: response.survival,
        lower: response.lower,
        upper: response.upper,
      },
    ]);
  }

  pinCurrent(): void {
    if (!this.currentScenario) {
      return;
    }
    const message = this.section("compare-message");
    try {
      this.store.pin(this.currentScenario);
      message.textContent = "";
    } catch (error) {
      if (error instanceof MixedModelComparison) {
        message.textContent = error.message;
        return;
      }
      throw error;
    }
    this.renderComparison();
  }

  renderComparison(): void {
    const pinned = this.store.pinned;
    const chart = this.section("compare-chart");
    const table = this.section("compare-table");
    if (pinned.length < 2) {
      chart.replaceChildren();
      table.replaceChildren();
      if (pinned.length === 1) {
        table.textContent = "Pin a second scenario to compare.";
      }
      return;
    }

    const series: ChartSeries[] = pinned.map((s) => ({
      label: s.label,
      months: (s.response as PredictResponse).months,
      survival: (s.response as PredictResponse).survival,
    }));
    renderSurvivalChart(chart, series);

    const rows = deltaTable(pinned);
    const html = document.createElement("table");
    html.className = "delta-table";
    const head = document.createElement("tr");
    head.innerHTML =
      "<th>scenario</th>" +
      HORIZONS.map((h) => `<th>S(${h})</th><th>ΔS(${h})</th>`).join("");
    html.appendChild(head);
    for (const row of rows) {
      const tr = document.createElement("tr");
      const cells = [`<td>${row.label}</td>`];
      for (const h of HORIZONS) {
        const key = String(h);
        cells.push(`<td>${formatProbability(row.probs[key])}</td>`);
        cells.push(`<td class="delta">${formatDelta(row.deltas[key])}</td>`);
      }
      tr.innerHTML = cells.join("");
      html.appendChild(tr);
    }
    table.replaceChildren(html);
  }
}

export function mount(root: HTMLElement, baseUrl = ""): App {
  const app = new App(root, new ApiClient(baseUrl));
  void app.boot();
  return app;
}
