/**
 * Console state and the interaction rules around it.
 *
 * The three blend weights (alpha, beta, gamma) live on the unit simplex:
 * moving one slider gives it the chosen value and rescales the other two
 * proportionally to absorb the remainder, so their sum stays 1 after every
 * interaction. Overlay opacity (delta) is independent. Any manual slider
 * move leaves preset mode.
 */

export interface BlendWeights {
  alpha: number;
  beta: number;
  gamma: number;
  delta: number;
}

export interface Preset extends BlendWeights {
  name: string;
}

export type SimplexKey = "alpha" | "beta" | "gamma";
export type SliderKey = SimplexKey | "delta";

export interface ConsoleState {
  weights: BlendWeights;
  /** Name of the active preset, or null after any manual slider move. */
  presetName: string | null;
  presets: Preset[];
  frames: number[];
  /** Scrubber position: an index into `frames`. */
  cursor: number;
  error: string | null;
}

const SIMPLEX: readonly SimplexKey[] = ["alpha", "beta", "gamma"];

export function initialState(): ConsoleState {
  return {
    weights: { alpha: 0.2, beta: 0.3, gamma: 0.5, delta: 0.5 },
    presetName: "three-layer",
    presets: [],
    frames: [],
    cursor: 0,
    error: null,
  };
}

function clamp01(value: number): number {
  if (!Number.isFinite(value)) return 0;
  return Math.min(1, Math.max(0, value));
}

/**
 * Move one slider to `value` (clamped to [0, 1]).
 *
 * Simplex sliders: the moved one takes the value; the other two share the
 * remainder in proportion to their current sizes, or equally when both
 * were zero. The preset indicator clears because the weights no longer
 * come from a named preset.
 */
export function adjustSlider(
  state: ConsoleState,
  key: SliderKey,
  value: number,
): ConsoleState {
  const v = clamp01(value);
  const weights = { ...state.weights };
  if (key === "delta") {
    weights.delta = v;
  } else {
    const others = SIMPLEX.filter((k) => k !== key) as [SimplexKey, SimplexKey];
    const rest = 1 - v;
    const sum = weights[others[0]] + weights[others[1]];
    if (sum > 0) {
      weights[others[0]] = (rest * weights[others[0]]) / sum;
      weights[others[1]] = (rest * weights[others[1]]) / sum;
    } else {
      weights[others[0]] = rest / 2;
      weights[others[1]] = rest / 2;
    }
    weights[key] = v;
  }
  return { ...state, weights, presetName: null, error: null };
}

/**
 * Apply a named preset. Unknown names change nothing except raising an
 * error banner.
 */
export function applyPreset(state: ConsoleState, name: string): ConsoleState {
  const preset = state.presets.find((p) => p.name === name);
  if (!preset) {
    return { ...state, error: `unknown preset "${name}"` };
  }
  return {
    ...state,
    weights: {
      alpha: preset.alpha,
      beta: preset.beta,
      gamma: preset.gamma,
      delta: preset.delta,
    },
    presetName: preset.name,
    error: null,
  };
}

/** Jump the scrubber; out-of-range targets clamp to the ends. */
export function scrubTo(state: ConsoleState, cursor: number): ConsoleState {
  if (state.frames.length === 0) return state;
  const clamped = Math.min(
    state.frames.length - 1,
    Math.max(0, Math.floor(cursor)),
  );
  return { ...state, cursor: clamped };
}

export function currentFrame(state: ConsoleState): number | null {
  const frame = state.frames[state.cursor];
  return frame === undefined ? null : frame;
}

export function simplexSum(weights: BlendWeights): number {
  return weights.alpha + weights.beta + weights.gamma;
}
