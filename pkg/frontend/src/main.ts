/**
 * DOM wiring for the blend console.
 *
 * Configuration is the service base URL only: pass it as ?service=… or
 * fall back to the service's default local address.
 */

import { LayerServiceClient, type LayerName } from "./api.js";
import { FramePlayer } from "./player.js";
import {
  adjustSlider,
  applyPreset,
  currentFrame,
  initialState,
  scrubTo,
  simplexSum,
  type ConsoleState,
  type SliderKey,
} from "./state.js";
import { CompositeViewer } from "./viewer.js";

const SLIDERS: readonly SliderKey[] = ["alpha", "beta", "gamma", "delta"];
const LAYERS: readonly LayerName[] = ["fg", "bg", "mask", "xray"];

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing element #${id}`);
  return node as T;
}

const serviceUrl =
  new URLSearchParams(location.search).get("service") ?? "http://127.0.0.1:8754";
const client = new LayerServiceClient(serviceUrl);

let state: ConsoleState = initialState();
let shownObjectUrl: string | null = null;

const viewer = new CompositeViewer(
  client,
  (png) => {
    const next = URL.createObjectURL(png);
    el<HTMLImageElement>("composite").src = next;
    if (shownObjectUrl) URL.revokeObjectURL(shownObjectUrl);
    shownObjectUrl = next;
  },
  (message) => showError(message),
);

const player = new FramePlayer((cursor) => {
  update(scrubTo(state, cursor), { immediate: true });
  syncPlayButton();
});

function showError(message: string | null): void {
  const banner = el<HTMLDivElement>("error-banner");
  banner.textContent = message ?? "";
  banner.hidden = message === null;
}

function syncPlayButton(): void {
  el<HTMLButtonElement>("play").textContent = player.playing ? "Pause" : "Play";
}

function syncDom(): void {
  for (const key of SLIDERS) {
    el<HTMLInputElement>(`slider-${key}`).value = String(state.weights[key]);
    el<HTMLSpanElement>(`value-${key}`).textContent = state.weights[key].toFixed(3);
  }
  el<HTMLSpanElement>("simplex-sum").textContent = simplexSum(state.weights).toFixed(3);
  el<HTMLSpanElement>("preset-indicator").textContent = state.presetName ?? "custom";
  for (const button of document.querySelectorAll<HTMLButtonElement>("#presets button")) {
    button.classList.toggle("active", button.dataset.preset === state.presetName);
  }

  const scrubber = el<HTMLInputElement>("scrubber");
  scrubber.max = String(Math.max(state.frames.length - 1, 0));
  scrubber.value = String(state.cursor);
  const frame = currentFrame(state);
  el<HTMLSpanElement>("frame-label").textContent =
    frame === null ? "—" : `frame ${frame} (${state.cursor + 1}/${state.frames.length})`;
  showError(state.error);
}

function refreshSidePanel(frame: number): void {
  if (el<HTMLInputElement>("toggle-layers").checked) {
    for (const layer of LAYERS) {
      el<HTMLImageElement>(`layer-${layer}`).src = client.layerUrl(frame, layer);
    }
  }
  client
    .metrics(frame)
    .then((m) => {
      el<HTMLSpanElement>("metrics").textContent =
        `foreground ${m.foreground_px} px, recovered ${m.recovery_pct.toFixed(1)}%`;
    })
    .catch(() => {
      el<HTMLSpanElement>("metrics").textContent = "";
    });
}

function update(next: ConsoleState, opts: { immediate?: boolean } = {}): void {
  const frameChanged = next.cursor !== state.cursor || next.frames !== state.frames;
  state = next;
  syncDom();
  const frame = currentFrame(state);
  if (frame === null) return;
  const request = { frame, weights: state.weights };
  if (opts.immediate) {
    viewer.requestNow(request);
  } else {
    viewer.request(request);
  }
  if (frameChanged) refreshSidePanel(frame);
}

function wire(): void {
  for (const key of SLIDERS) {
    el<HTMLInputElement>(`slider-${key}`).addEventListener("input", (event) => {
      player.stop();
      syncPlayButton();
      const value = Number((event.target as HTMLInputElement).value);
      update(adjustSlider(state, key, value));
    });
  }

  el<HTMLInputElement>("scrubber").addEventListener("input", (event) => {
    player.stop();
    syncPlayButton();
    const cursor = Number((event.target as HTMLInputElement).value);
    update(scrubTo(state, cursor));
  });

  el<HTMLButtonElement>("play").addEventListener("click", () => {
    if (player.playing) {
      player.stop();
    } else if (state.frames.length > 0) {
      const from = state.cursor >= state.frames.length - 1 ? 0 : state.cursor;
      update(scrubTo(state, from), { immediate: true });
      player.play(from, state.frames.length);
    }
    syncPlayButton();
  });

  el<HTMLInputElement>("toggle-layers").addEventListener("change", (event) => {
    const panel = el<HTMLDivElement>("layers-panel");
    panel.hidden = !(event.target as HTMLInputElement).checked;
    const frame = currentFrame(state);
    if (!panel.hidden && frame !== null) refreshSidePanel(frame);
  });
}

async function init(): Promise<void> {
  el<HTMLSpanElement>("service-url").textContent = serviceUrl;
  wire();
  syncPlayButton();
  try {
    const [frameList, presets] = await Promise.all([client.frames(), client.presets()]);
    state = { ...state, frames: frameList.frames, presets, cursor: 0 };
    el<HTMLSpanElement>("sequence-name").textContent = frameList.sequence ?? "unnamed";
    const buttons = el<HTMLDivElement>("presets");
    for (const preset of presets) {
      const button = document.createElement("button");
      button.textContent = preset.name;
      button.dataset.preset = preset.name;
      button.addEventListener("click", () => update(applyPreset(state, preset.name)));
      buttons.appendChild(button);
    }
    const startName = state.presetName;
    if (startName && presets.some((p) => p.name === startName)) {
      update(applyPreset(state, startName), { immediate: true });
    } else {
      update({ ...state, presetName: null }, { immediate: true });
    }
    const frame = currentFrame(state);
    if (frame !== null) refreshSidePanel(frame);
  } catch (err) {
    showError(
      `cannot reach the layer service at ${serviceUrl}: ` +
        (err instanceof Error ? err.message : String(err)),
    );
  }
}

void init();
