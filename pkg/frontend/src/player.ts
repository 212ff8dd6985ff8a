/**
 * Sequence playback for the frame scrubber.
 *
 * The shown position follows elapsed wall time, so when the browser or the
 * service falls behind, playback skips ahead to the frame that is due —
 * frames may be skipped but never shown out of order — and stops on the
 * last frame.
 */

export class FramePlayer {
  private handle: ReturnType<typeof setInterval> | null = null;

  constructor(
    private readonly show: (cursor: number) => void,
    private readonly clock: () => number = () => Date.now(),
  ) {}

  get playing(): boolean {
    return this.handle !== null;
  }

  play(fromCursor: number, frameCount: number, intervalMs = 250): void {
    this.stop();
    if (frameCount <= 0) return;
    const start = Math.min(Math.max(Math.floor(fromCursor), 0), frameCount - 1);
    const t0 = this.clock();
    let shown = start;
    this.handle = setInterval(() => {
      const due = start + Math.floor((this.clock() - t0) / intervalMs);
      const cursor = Math.min(due, frameCount - 1);
      if (cursor > shown || cursor === frameCount - 1) {
        shown = cursor;
        this.show(cursor);
      }
      if (cursor >= frameCount - 1) this.stop();
    }, intervalMs);
  }

  stop(): void {
    if (this.handle !== null) {
      clearInterval(this.handle);
      this.handle = null;
    }
  }
}
