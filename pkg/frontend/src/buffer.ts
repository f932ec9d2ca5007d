import type { WireFrame } from "./protocol.js";

/** Bounded rolling frame buffer with FIFO eviction.
 *
 * `total` counts every frame ever pushed, evicted or not, so frames the
 * renderer never got to are still accounted for.
 */
export class FrameBuffer {
  private ring: WireFrame[] = [];
  private start = 0;
  private pushed = 0;

  constructor(readonly capacity = 5000) {
    if (capacity < 1) throw new RangeError("capacity must be >= 1");
  }

  push(frame: WireFrame): void {
    if (this.ring.length < this.capacity) {
      this.ring.push(frame);
    } else {
      this.ring[this.start] = frame;
      this.start = (this.start + 1) % this.capacity;
    }
    this.pushed += 1;
  }

  get size(): number {
    return this.ring.length;
  }

  get total(): number {
    return this.pushed;
  }

  latest(): WireFrame | undefined {
    if (this.ring.length === 0) return undefined;
    const last = (this.start + this.ring.length - 1) % this.ring.length;
    return this.ring[last];
  }

  /** Frames in arrival order. */
  toArray(): WireFrame[] {
    return [...this.ring.slice(this.start), ...this.ring.slice(0, this.start)];
  }

  forEach(fn: (frame: WireFrame) => void): void {
    const n = this.ring.length;
    for (let i = 0; i < n; i++) {
      fn(this.ring[(this.start + i) % n]!);
    }
  }

  clear(): void {
    this.ring = [];
    this.start = 0;
  }
}
