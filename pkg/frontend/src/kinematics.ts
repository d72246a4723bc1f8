// Pointer speed estimation shared by the live pointer layer and the tests.

export class SpeedTracker {
  private lastT: number | null = null;
  private lastX = 0;
  private lastY = 0;
  private smoothed = 0;

  /** Envelope follower: slower attack smooths jittery pointer motion, fast
   * release drops the estimate quickly once the pointer rests, so a settled
   * hand stops looking like a transition almost immediately. */
  constructor(
    private readonly attack = 0.08,
    private readonly release = 0.02,
  ) {}

  /** Feed one position sample; returns the smoothed speed in px/s. */
  update(t: number, x: number, y: number): number {
    if (this.lastT === null) {
      this.lastT = t;
      this.lastX = x;
      this.lastY = y;
      return 0;
    }
    const dt = t - this.lastT;
    if (dt <= 0) return this.smoothed;
    const raw = Math.hypot(x - this.lastX, y - this.lastY) / dt;
    const tau = raw >= this.smoothed ? this.attack : this.release;
    const alpha = 1 - Math.exp(-dt / tau);
    this.smoothed += alpha * (raw - this.smoothed);
    this.lastT = t;
    this.lastX = x;
    this.lastY = y;
    return this.smoothed;
  }

  reset(): void {
    this.lastT = null;
    this.smoothed = 0;
  }

  get speed(): number {
    return this.smoothed;
  }
}
