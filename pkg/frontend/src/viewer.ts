/**
 * Keeps the composite image coherent under rapid interaction.
 *
 * Slider bursts are debounced (~50 ms, last value wins). Every issued
 * request carries a monotonically increasing id and only the highest id
 * ever renders, so a slow response for an old parameter set can never
 * overwrite a newer image.
 */

import type { LayerServiceClient } from "./api.js";
import type { BlendWeights } from "./state.js";

export interface CompositeRequest {
  frame: number;
  weights: BlendWeights;
}

export class CompositeViewer {
  private nextId = 0;
  private latestIssued = -1;
  private timer: ReturnType<typeof setTimeout> | null = null;
  private pending: CompositeRequest | null = null;

  constructor(
    private readonly client: LayerServiceClient,
    private readonly render: (png: Blob, request: CompositeRequest) => void,
    private readonly onError: (message: string) => void = () => {},
    private readonly debounceMs = 50,
  ) {}

  /** Schedule a composite; bursts collapse to the latest request. */
  request(request: CompositeRequest): void {
    this.pending = request;
    if (this.timer !== null) clearTimeout(this.timer);
    this.timer = setTimeout(() => {
      this.timer = null;
      const r = this.pending;
      this.pending = null;
      if (r) void this.issue(r);
    }, this.debounceMs);
  }

  /** Fire immediately (frame playback must not lag behind the ticker). */
  requestNow(request: CompositeRequest): void {
    if (this.timer !== null) {
      clearTimeout(this.timer);
      this.timer = null;
      this.pending = null;
    }
    void this.issue(request);
  }

  private async issue(request: CompositeRequest): Promise<void> {
    const id = this.nextId++;
    this.latestIssued = id;
    try {
      const png = await this.client.composePng(request.frame, request.weights);
      if (id === this.latestIssued) {
        this.render(png, request);
      }
    } catch (err) {
      if (id === this.latestIssued) {
        this.onError(err instanceof Error ? err.message : String(err));
      }
    }
  }
}
