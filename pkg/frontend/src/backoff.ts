/** Exponential reconnect backoff: base, base*factor, ... capped. */
export class Backoff {
  private attempt = 0;

  constructor(
    readonly baseS = 0.5,
    readonly capS = 10.0,
    readonly factor = 2.0,
  ) {}

  next(): number {
    const delay = Math.min(this.capS, this.baseS * this.factor ** this.attempt);
    this.attempt += 1;
    return delay;
  }

  reset(): void {
    this.attempt = 0;
  }
}
