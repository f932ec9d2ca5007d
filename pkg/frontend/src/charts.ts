import type { AnalyticDoc, WireFrame } from "./protocol.js";
import { FrameBuffer } from "./buffer.js";

/** Declarative chart models: what to draw, never how.
 *
 * Everything a chart shows is a pure function of (buffer, playhead), so
 * replaying a recorded message log reproduces the exact same series.
 */

export type ChartKind = "gaze2d" | "timeseries";

export interface ChartModel {
  kind: ChartKind;
  subscriptionId: string;
  streamId: string;
  /** gaze2d: [xChannel, yChannel]; timeseries: plotted channels. */
  channels: string[];
  /** channel name -> index into frame values. */
  indices: number[];
  /** gaze2d: trail length in seconds; timeseries: visible time window. */
  windowS: number;
}

const NUMERIC_DTYPES = new Set(["f32", "f64", "i8", "i16", "i32", "i64", "bool"]);

/** One chart per visualization binding of a subscribed stream:
 * an x/y channel pair binds a gaze2d chart, every remaining numeric
 * channel set binds one shared timeseries chart.
 */
export function chartModelsFor(
  subscriptionId: string,
  analytic: AnalyticDoc,
): ChartModel[] {
  const meta = analytic.stream;
  const channels = meta.channels ?? [];
  const names = channels.map((c) => c.name);
  const models: ChartModel[] = [];

  const xi = names.indexOf("x");
  const yi = names.indexOf("y");
  if (xi >= 0 && yi >= 0) {
    models.push({
      kind: "gaze2d",
      subscriptionId,
      streamId: meta.stream_id,
      channels: ["x", "y"],
      indices: [xi, yi],
      windowS: 1.0,
    });
  }

  const series: string[] = [];
  const indices: number[] = [];
  channels.forEach((c, i) => {
    if (i === xi || i === yi) return;
    if (!NUMERIC_DTYPES.has(c.dtype)) return;
    series.push(c.name);
    indices.push(i);
  });
  if (series.length > 0) {
    models.push({
      kind: "timeseries",
      subscriptionId,
      streamId: meta.stream_id,
      channels: series,
      indices,
      windowS: 10.0,
    });
  }
  return models;
}

export interface GazePoint {
  x: number;
  y: number;
  /** seconds behind the playhead, >= 0 */
  age: number;
}

const clamp01 = (v: number) => (v < 0 ? 0 : v > 1 ? 1 : v);

/** Trail of (x, y) pairs inside the unit square, newest last. */
export function gazePoints(
  model: ChartModel,
  buffer: FrameBuffer,
  playhead: number,
): GazePoint[] {
  const [xi, yi] = model.indices as [number, number];
  const points: GazePoint[] = [];
  buffer.forEach((frame) => {
    if (frame.t > playhead || frame.t < playhead - model.windowS) return;
    const x = frame.values[xi];
    const y = frame.values[yi];
    if (typeof x !== "number" || typeof y !== "number") return;
    points.push({ x: clamp01(x), y: clamp01(y), age: playhead - frame.t });
  });
  return points;
}

export interface Series {
  channel: string;
  points: { t: number; v: number }[];
}

/** Per-channel polylines over [playhead - window, playhead]. */
export function seriesFor(
  model: ChartModel,
  buffer: FrameBuffer,
  playhead: number,
): Series[] {
  const out: Series[] = model.channels.map((channel) => ({
    channel,
    points: [],
  }));
  const from = playhead - model.windowS;
  buffer.forEach((frame) => {
    if (frame.t > playhead || frame.t < from) return;
    model.indices.forEach((vi, k) => {
      const v = frame.values[vi];
      if (typeof v === "number") out[k]!.points.push({ t: frame.t, v });
    });
  });
  return out;
}

/** Shared y-range of a series set, padded, never degenerate. */
export function valueRange(series: Series[]): [number, number] {
  let lo = Infinity;
  let hi = -Infinity;
  for (const s of series) {
    for (const p of s.points) {
      if (p.v < lo) lo = p.v;
      if (p.v > hi) hi = p.v;
    }
  }
  if (lo > hi) return [0, 1];
  if (lo === hi) return [lo - 0.5, hi + 0.5];
  const pad = (hi - lo) * 0.08;
  return [lo - pad, hi + pad];
}
