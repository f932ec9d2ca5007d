/** Decayed 2D histogram over the unit square.
 *
 * Each deposit adds one count to its bin after decaying the whole grid
 * to the deposit's stream time, so the overlay is a function of the
 * delivered frames and their timestamps, not of wall-clock render
 * timing. Two grids fed the same frame sequence are bit-identical.
 */
export class HeatGrid {
  readonly grid: Float32Array;
  private lastT: number | null = null;

  constructor(
    readonly bins = 64,
    readonly halfLifeS = 2.0,
  ) {
    if (bins < 1) throw new RangeError("bins must be >= 1");
    if (halfLifeS <= 0) throw new RangeError("halfLifeS must be > 0");
    this.grid = new Float32Array(bins * bins);
  }

  decayTo(t: number): void {
    if (this.lastT !== null && t > this.lastT) {
      const factor = Math.pow(2, -(t - this.lastT) / this.halfLifeS);
      for (let i = 0; i < this.grid.length; i++) this.grid[i]! *= factor;
    }
    if (this.lastT === null || t > this.lastT) this.lastT = t;
  }

  deposit(x: number, y: number, t: number): void {
    if (!(x >= 0 && x <= 1 && y >= 0 && y <= 1)) return;
    this.decayTo(t);
    const ix = Math.min(this.bins - 1, Math.floor(x * this.bins));
    const iy = Math.min(this.bins - 1, Math.floor(y * this.bins));
    const at = iy * this.bins + ix;
    this.grid[at] = (this.grid[at] ?? 0) + 1;
  }

  get(ix: number, iy: number): number {
    return this.grid[iy * this.bins + ix] ?? 0;
  }

  maxValue(): number {
    let max = 0;
    for (let i = 0; i < this.grid.length; i++) {
      if (this.grid[i]! > max) max = this.grid[i]!;
    }
    return max;
  }

  clear(): void {
    this.grid.fill(0);
    this.lastT = null;
  }
}
