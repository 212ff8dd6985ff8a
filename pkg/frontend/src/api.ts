/**
 * Typed client for the layer service HTTP API.
 *
 * The console talks to the service only through the routes below; the
 * service base URL is the console's sole piece of configuration.
 */

import type { BlendWeights, Preset } from "./state.js";

export interface FrameList {
  sequence: string | null;
  frames: number[];
}

export interface FrameMetrics {
  index: number;
  width: number;
  height: number;
  foreground_px: number;
  recovered_px: number;
  recovery_pct: number;
  [key: string]: unknown;
}

export type LayerName = "fg" | "bg" | "mask" | "xray";

export type FetchLike = (url: string) => Promise<Response>;

export class ServiceError extends Error {
  constructor(
    readonly status: number,
    message: string,
  ) {
    super(message);
    this.name = "ServiceError";
  }
}

async function errorMessage(response: Response): Promise<string> {
  try {
    const body = (await response.json()) as { error?: unknown };
    if (typeof body.error === "string") return body.error;
  } catch {
    // not a JSON error body
  }
  return `HTTP ${response.status}`;
}

export class LayerServiceClient {
  private readonly base: string;

  constructor(
    baseUrl: string,
    private readonly fetchFn: FetchLike = (url) => fetch(url),
  ) {
    this.base = baseUrl.replace(/\/+$/, "");
  }

  private async json<T>(path: string): Promise<T> {
    const response = await this.fetchFn(this.base + path);
    if (!response.ok) {
      throw new ServiceError(response.status, await errorMessage(response));
    }
    return (await response.json()) as T;
  }

  frames(): Promise<FrameList> {
    return this.json<FrameList>("/api/frames");
  }

  presets(): Promise<Preset[]> {
    return this.json<Preset[]>("/api/presets");
  }

  metrics(frame: number): Promise<FrameMetrics> {
    return this.json<FrameMetrics>(`/api/frames/${frame}/metrics`);
  }

  layerUrl(frame: number, layer: LayerName): string {
    return `${this.base}/api/frames/${frame}/layer/${layer}`;
  }

  composeUrl(frame: number, weights: BlendWeights): string {
    const query = new URLSearchParams({
      alpha: String(weights.alpha),
      beta: String(weights.beta),
      gamma: String(weights.gamma),
      delta: String(weights.delta),
    });
    return `${this.base}/api/frames/${frame}/compose?${query.toString()}`;
  }

  async composePng(frame: number, weights: BlendWeights): Promise<Blob> {
    const response = await this.fetchFn(this.composeUrl(frame, weights));
    if (!response.ok) {
      throw new ServiceError(response.status, await errorMessage(response));
    }
    return await response.blob();
  }
}
