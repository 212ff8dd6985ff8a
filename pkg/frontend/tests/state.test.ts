import { describe, expect, it } from "vitest";

import {
  adjustSlider,
  applyPreset,
  currentFrame,
  initialState,
  scrubTo,
  simplexSum,
  type ConsoleState,
  type Preset,
  type SliderKey,
} from "../src/state.js";

const PRESETS: Preset[] = [
  { name: "xray-only", alpha: 0, beta: 0, gamma: 1, delta: 1 },
  { name: "three-layer", alpha: 0.2, beta: 0.3, gamma: 0.5, delta: 0.5 },
  { name: "foreground", alpha: 1, beta: 0, gamma: 0, delta: 0 },
];

function state(overrides: Partial<ConsoleState> = {}): ConsoleState {
  return {
    ...initialState(),
    presets: PRESETS,
    frames: [0, 1, 2, 3, 4, 5],
    ...overrides,
  };
}

describe("adjustSlider", () => {
  it("rescales the other two weights proportionally", () => {
    const s0 = state({ weights: { alpha: 0.2, beta: 0.3, gamma: 0.5, delta: 0 } });
    const s1 = adjustSlider(s0, "alpha", 0.5);
    expect(s1.weights.alpha).toBeCloseTo(0.5, 12);
    expect(s1.weights.beta).toBeCloseTo(0.1875, 12);
    expect(s1.weights.gamma).toBeCloseTo(0.3125, 12);
  });

  it("splits the remainder equally when the other two were zero", () => {
    const s0 = state({ weights: { alpha: 1, beta: 0, gamma: 0, delta: 0 } });
    const s1 = adjustSlider(s0, "alpha", 0);
    expect(s1.weights).toMatchObject({ alpha: 0, beta: 0.5, gamma: 0.5 });
  });

  it("keeps the simplex sum at 1 after any interaction burst", () => {
    let s = state();
    const moves: Array<[SliderKey, number]> = [
      ["beta", 0.9],
      ["gamma", 0.05],
      ["alpha", 0.33],
      ["delta", 0.7],
      ["gamma", 1],
      ["alpha", 0.25],
    ];
    for (const [key, value] of moves) {
      s = adjustSlider(s, key, value);
      expect(Math.abs(simplexSum(s.weights) - 1)).toBeLessThan(1e-6);
    }
  });

  it("clamps values outside [0, 1]", () => {
    const s1 = adjustSlider(state(), "gamma", 7);
    expect(s1.weights.gamma).toBe(1);
    expect(simplexSum(s1.weights)).toBeCloseTo(1, 12);
    const s2 = adjustSlider(state(), "beta", -3);
    expect(s2.weights.beta).toBe(0);
  });

  it("clears the preset indicator on any manual move", () => {
    const s0 = applyPreset(state(), "three-layer");
    expect(s0.presetName).toBe("three-layer");
    expect(adjustSlider(s0, "alpha", 0.21).presetName).toBeNull();
    expect(adjustSlider(s0, "delta", 0.4).presetName).toBeNull();
  });

  it("moving the overlay opacity leaves the simplex untouched", () => {
    const s0 = state({ weights: { alpha: 0.2, beta: 0.3, gamma: 0.5, delta: 0.5 } });
    const s1 = adjustSlider(s0, "delta", 0.9);
    expect(s1.weights.alpha).toBe(0.2);
    expect(s1.weights.beta).toBe(0.3);
    expect(s1.weights.gamma).toBe(0.5);
    expect(s1.weights.delta).toBe(0.9);
  });
});

describe("applyPreset", () => {
  it("sets the weights and the indicator", () => {
    const s1 = applyPreset(state(), "xray-only");
    expect(s1.weights).toEqual({ alpha: 0, beta: 0, gamma: 1, delta: 1 });
    expect(s1.presetName).toBe("xray-only");
    expect(s1.error).toBeNull();
  });

  it("leaves state untouched and raises an error banner for unknown names", () => {
    const s0 = applyPreset(state(), "three-layer");
    const s1 = applyPreset(s0, "does-not-exist");
    expect(s1.weights).toEqual(s0.weights);
    expect(s1.presetName).toBe(s0.presetName);
    expect(s1.cursor).toBe(s0.cursor);
    expect(s1.error).toContain("does-not-exist");
  });
});

describe("scrubTo", () => {
  it("clamps out-of-range targets to the ends", () => {
    const s = state();
    expect(scrubTo(s, -5).cursor).toBe(0);
    expect(scrubTo(s, 99).cursor).toBe(5);
    expect(scrubTo(s, 3).cursor).toBe(3);
  });

  it("keeps blend parameters across frame changes", () => {
    let s = adjustSlider(state(), "beta", 0.8);
    const weights = s.weights;
    s = scrubTo(s, 4);
    expect(s.weights).toEqual(weights);
  });

  it("maps the cursor through the frame list", () => {
    const s = state({ frames: [2, 4, 8], cursor: 0 });
    expect(currentFrame(scrubTo(s, 1))).toBe(4);
    expect(currentFrame(state({ frames: [] }))).toBeNull();
  });
});
