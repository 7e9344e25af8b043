import { ApiClient } from "./api";
import { WhatIfStore } from "./store";
import { DemoConfig, DemoConfigSchema, FeatureControl } from "./types";

async function loadConfig(): Promise<DemoConfig> {
  const response = await fetch("./demo-config.json");
  return DemoConfigSchema.parse(await response.json());
}

function formatPhi(value: number): string {
  return value.toFixed(4);
}

function renderControls(store: WhatIfStore, root: HTMLElement): void {
  root.replaceChildren();
  for (const control of store.controls) {
    root.appendChild(buildControl(store, control));
  }
}

function buildControl(store: WhatIfStore, control: FeatureControl): HTMLElement {
  const wrapper = document.createElement("div");
  wrapper.className = "control";
  const id = `control-${control.spec.name}`;

  const label = document.createElement("label");
  label.htmlFor = id;
  label.textContent = control.spec.label;
  wrapper.appendChild(label);

  if (control.spec.kind === "continuous") {
    const input = document.createElement("input");
    input.type = "range";
    input.id = id;
    input.min = String(control.spec.min);
    input.max = String(control.spec.max);
    input.step = "any";
    input.value = String(control.value);
    const readout = document.createElement("output");
    readout.htmlFor.add(id);
    readout.textContent = String(control.value);
    input.addEventListener("input", () => {
      readout.textContent = input.value;
      store.editFeature(control.spec.name, Number(input.value));
    });
    wrapper.appendChild(input);
    wrapper.appendChild(readout);
  } else {
    const select = document.createElement("select");
    select.id = id;
    for (const [code, text] of Object.entries(control.spec.codes)) {
      const option = document.createElement("option");
      option.value = code;
      option.textContent = text;
      option.selected = Number(code) === control.value;
      select.appendChild(option);
    }
    select.addEventListener("change", () => {
      store.editFeature(control.spec.name, Number(select.value));
    });
    wrapper.appendChild(select);
  }
  return wrapper;
}

function renderView(store: WhatIfStore, config: DemoConfig): void {
  const banner = document.getElementById("banner")!;
  banner.hidden = store.banner === null;
  banner.textContent = store.banner ?? "";

  const toast = document.getElementById("toast")!;
  toast.hidden = store.toast === null;
  toast.textContent = store.toast ?? "";

  const view = store.view;
  const panel = document.getElementById("result")!;
  if (view === null) {
    panel.hidden = true;
    return;
  }
  panel.hidden = false;
  panel.classList.toggle("stale", view.stale);

  document.getElementById("prediction")!.textContent =
    `${config.decision.label}: ${view.prediction.toFixed(3)}`;
  const decision = document.getElementById("decision")!;
  decision.textContent = view.decision;
  decision.classList.toggle("positive", view.decision === config.decision.positive);

  const labels = new Map(config.features.map((f) => [f.name, f.label]));
  const maxAbs = Math.max(...view.bars.map((b) => Math.abs(b.phi)), 1e-12);

  const chart = document.getElementById("bars")!;
  chart.replaceChildren();
  const table = document.getElementById("bars-table")!;
  table.replaceChildren();

  for (const bar of view.bars) {
    const row = document.createElement("div");
    row.className = "bar-row";
    const name = document.createElement("span");
    name.className = "bar-name";
    name.textContent = labels.get(bar.name) ?? bar.name;
    const fill = document.createElement("span");
    fill.className = bar.phi >= 0 ? "bar positive" : "bar negative";
    fill.style.width = `${(Math.abs(bar.phi) / maxAbs) * 100}%`;
    fill.title = formatPhi(bar.phi);
    row.appendChild(name);
    row.appendChild(fill);
    chart.appendChild(row);

    // textual fallback for screen readers
    const tr = document.createElement("tr");
    const tdName = document.createElement("td");
    tdName.textContent = labels.get(bar.name) ?? bar.name;
    const tdPhi = document.createElement("td");
    tdPhi.textContent = formatPhi(bar.phi);
    tr.appendChild(tdName);
    tr.appendChild(tdPhi);
    table.appendChild(tr);
  }
}

async function start(): Promise<void> {
  const config = await loadConfig();
  const client = new ApiClient(config.api_base);
  const store = new WhatIfStore(client, config);

  const controlsRoot = document.getElementById("controls")!;
  renderControls(store, controlsRoot);
  store.subscribe(() => renderView(store, config));

  document.getElementById("refresh")!.addEventListener("click", () => {
    void store.loadProfile("random");
    renderControls(store, controlsRoot);
  });
  for (let i = 0; i < config.presets.length; i += 1) {
    const button = document.createElement("button");
    button.textContent = `Profile ${i + 1}`;
    button.addEventListener("click", () => {
      void store.loadProfile(i);
      renderControls(store, controlsRoot);
    });
    document.getElementById("presets")!.appendChild(button);
  }

  await store.loadProfile(0);
}

void start();
