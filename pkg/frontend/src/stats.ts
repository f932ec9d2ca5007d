/** Model behind the heuristics panel: rows of the `/stats` snapshot,
 * the F < 0.9 highlight rule, and the staleness flag. Fetching and
 * scheduling live in main.ts; this stays pure and testable.
 */

export interface StatRow {
  key: string;
  kind: string;
  f: number | null;
  gf: number | null;
  mean_latency_s: number | null;
  v_in_bytes: number;
  v_out_bytes: number;
  frames_in: number;
  frames_out: number;
  errors: number;
}

export const FLUIDITY_ALERT = 0.9;

const num = (v: unknown): number | null =>
  typeof v === "number" && Number.isFinite(v) ? v : null;

export class HeuristicsPanel {
  rows: StatRow[] = [];
  stale = false;
  lastUpdated: number | null = null;

  /** Ingest one `/stats` body; lenient like every server decode. */
  applySnapshot(doc: unknown, now: number = Date.now()): void {
    const nodes =
      typeof doc === "object" && doc !== null
        ? (doc as { nodes?: unknown }).nodes
        : undefined;
    const rows: StatRow[] = [];
    if (typeof nodes === "object" && nodes !== null) {
      for (const [key, raw] of Object.entries(nodes as Record<string, unknown>)) {
        if (typeof raw !== "object" || raw === null) continue;
        const r = raw as Record<string, unknown>;
        rows.push({
          key,
          kind: typeof r.kind === "string" ? r.kind : "?",
          f: num(r.f),
          gf: num(r.gf),
          mean_latency_s: num(r.mean_latency_s),
          v_in_bytes: num(r.v_in_bytes) ?? 0,
          v_out_bytes: num(r.v_out_bytes) ?? 0,
          frames_in: num(r.frames_in) ?? 0,
          frames_out: num(r.frames_out) ?? 0,
          errors: num(r.errors) ?? 0,
        });
      }
    }
    rows.sort((a, b) => (a.key < b.key ? -1 : a.key > b.key ? 1 : 0));
    this.rows = rows;
    this.stale = false;
    this.lastUpdated = now;
  }

  /** A fetch failed; keep the last rows but badge them stale. */
  markStale(): void {
    this.stale = true;
  }

  /** Bottleneck rule: known fluidity below the alert line. */
  highlighted(row: StatRow): boolean {
    return row.f !== null && row.f < FLUIDITY_ALERT;
  }
}
