import { ExplainClient } from "./api";
import { orderBars } from "./bars";
import {
  DemoConfig,
  ExplanationView,
  FeatureControl,
  FeatureSpec,
} from "./types";

export interface StoreOptions {
  /** Quiet period after the last edit before a request fires. */
  debounceMs?: number;
  /** Uniform [0, 1) source for RANDOM profiles; injectable for tests. */
  random?: () => number;
}

export type Listener = () => void;

function clampValue(spec: FeatureSpec, value: number): number {
  if (spec.kind === "continuous") {
    return Math.min(spec.max, Math.max(spec.min, value));
  }
  const codes = Object.keys(spec.codes).map(Number);
  return codes.includes(value) ? value : codes[0]!;
}

function randomValue(spec: FeatureSpec, random: () => number): number {
  if (spec.kind === "continuous") {
    const raw = spec.min + random() * (spec.max - spec.min);
    return Math.round(raw * 100) / 100;
  }
  const codes = Object.keys(spec.codes).map(Number);
  return codes[Math.floor(random() * codes.length)]!;
}

/**
 * Headless view model for the what-if loop: holds the feature controls,
 * debounces explain requests, and guarantees the displayed explanation is
 * never older than the one already shown (monotonic request counter).
 */
export class WhatIfStore {
  controls: FeatureControl[] = [];
  view: ExplanationView | null = null;
  banner: string | null = null;
  toast: string | null = null;

  private readonly debounceMs: number;
  private readonly random: () => number;
  private timer: ReturnType<typeof setTimeout> | null = null;
  private requestCounter = 0;
  private appliedRequest = 0;
  private inFlight: Promise<void> = Promise.resolve();
  private listeners: Listener[] = [];

  constructor(
    private readonly client: ExplainClient,
    private readonly config: DemoConfig,
    options: StoreOptions = {},
  ) {
    this.debounceMs = options.debounceMs ?? 150;
    this.random = options.random ?? Math.random;
    this.controls = config.features.map((spec, index) => ({
      spec,
      index,
      value: config.presets[0]?.[index] ?? (spec.kind === "continuous" ? spec.min : 0),
    }));
  }

  subscribe(listener: Listener): () => void {
    this.listeners.push(listener);
    return () => {
      this.listeners = this.listeners.filter((l) => l !== listener);
    };
  }

  private notify(): void {
    for (const listener of this.listeners) listener();
  }

  get values(): number[] {
    return this.controls.map((c) => c.value);
  }

  /** Populate controls from a bundled preset (or a random profile) and refresh. */
  loadProfile(preset: number | "random"): Promise<void> {
    if (preset === "random") {
      for (const control of this.controls) {
        control.value = randomValue(control.spec, this.random);
      }
    } else {
      const row = this.config.presets[preset];
      if (row === undefined) {
        throw new Error(`no preset ${preset}`);
      }
      for (const control of this.controls) {
        control.value = clampValue(control.spec, row[control.index]!);
      }
    }
    this.cancelPending();
    this.notify();
    return this.refresh();
  }

  /** Record an edit; the explain request fires after the debounce interval. */
  editFeature(name: string, value: number): void {
    const control = this.controls.find((c) => c.spec.name === name);
    if (control === undefined) {
      throw new Error(`unknown feature ${name}`);
    }
    control.value = clampValue(control.spec, value);
    this.notify();
    this.cancelPending();
    this.timer = setTimeout(() => {
      this.timer = null;
      void this.refresh();
    }, this.debounceMs);
  }

  /** Run any debounced request immediately and wait for every in-flight one. */
  async settle(): Promise<void> {
    if (this.timer !== null) {
      this.cancelPending();
      await this.refresh();
    }
    await this.inFlight;
  }

  private cancelPending(): void {
    if (this.timer !== null) {
      clearTimeout(this.timer);
      this.timer = null;
    }
  }

  private refresh(): Promise<void> {
    const id = ++this.requestCounter;
    if (this.view !== null) {
      this.view = { ...this.view, stale: true };
      this.notify();
    }
    const run = this.client
      .explain(this.values)
      .then((response) => {
        if (id <= this.appliedRequest) {
          return; // a newer explanation is already displayed
        }
        this.appliedRequest = id;
        const { threshold, positive, negative } = this.config.decision;
        this.view = {
          prediction: response.prediction,
          baseValue: response.base_value,
          bars: orderBars(response.phi, response.feature_names),
          decision: response.prediction >= threshold ? positive : negative,
          samplesUsed: response.samples_used,
          stale: false,
        };
        this.toast = null;
        this.banner = null;
        this.notify();
      })
      .catch((err) => {
        // keep the previous (stale-flagged) view on failure; with nothing to
        // show yet, surface a banner instead of a toast
        const message = err instanceof Error ? err.message : String(err);
        if (this.view === null) {
          this.banner = message;
        } else {
          this.toast = message;
        }
        this.notify();
      });
    this.inFlight = this.inFlight.then(() => run);
    return run;
  }
}
