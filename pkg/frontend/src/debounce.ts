/** Keyed debouncer for slider-drag refreshes. */

export class Debouncer {
  private timers = new Map<string, ReturnType<typeof setTimeout>>();

  constructor(private delayMs = 250) {}

  debounce(key: string, op: () => void): void {
    const pending = this.timers.get(key);
    if (pending !== undefined) clearTimeout(pending);
    this.timers.set(key, setTimeout(() => {
      this.timers.delete(key);
      op();
    }, this.delayMs));
  }

  /** Run a pending op immediately (slider release). */
  flush(key: string, op: () => void): void {
    const pending = this.timers.get(key);
    if (pending !== undefined) {
      clearTimeout(pending);
      this.timers.delete(key);
    }
    op();
  }

  cancel(key: string): void {
    const pending = this.timers.get(key);
    if (pending !== undefined) {
      clearTimeout(pending);
      this.timers.delete(key);
    }
  }
}
