import { describe, expect, it } from "vitest";
import { FrameBuffer } from "../src/buffer.js";
import {
  chartModelsFor,
  gazePoints,
  seriesFor,
  valueRange,
} from "../src/charts.js";
import type { AnalyticDoc, Scalar } from "../src/protocol.js";

const gazeDoc: AnalyticDoc = {
  stream: {
    stream_id: "gaze/s01/scan",
    frequency_hz: 50,
    channels: [
      { name: "x", dtype: "f32" },
      { name: "y", dtype: "f32" },
      { name: "d", dtype: "f32" },
    ],
  },
};

const weatherDoc: AnalyticDoc = {
  stream: {
    stream_id: "weather/harborview",
    frequency_hz: 1,
    channels: [
      { name: "type", dtype: "label" },
      { name: "value", dtype: "f32" },
    ],
  },
};

function filled(values: Scalar[][], dt = 0.02): FrameBuffer {
  const buf = new FrameBuffer();
  values.forEach((v, i) =>
    buf.push({ stream_id: "s", seq: i, t: i * dt, values: v }),
  );
  return buf;
}

describe("chartModelsFor", () => {
  it("binds an x/y pair to gaze2d plus a timeseries for the rest", () => {
    const models = chartModelsFor("sub-1", gazeDoc);
    expect(models.map((m) => m.kind)).toEqual(["gaze2d", "timeseries"]);
    expect(models[0]!.channels).toEqual(["x", "y"]);
    expect(models[1]!.channels).toEqual(["d"]);
    expect(models[1]!.indices).toEqual([2]);
  });

  it("binds numeric channels only, skipping labels", () => {
    const models = chartModelsFor("sub-1", weatherDoc);
    expect(models.map((m) => m.kind)).toEqual(["timeseries"]);
    expect(models[0]!.channels).toEqual(["value"]);
  });

  it("makes no chart out of a label-only stream", () => {
    const doc: AnalyticDoc = {
      stream: {
        stream_id: "events",
        channels: [{ name: "label", dtype: "label" }],
      },
    };
    expect(chartModelsFor("sub-1", doc)).toEqual([]);
  });
});

describe("gazePoints", () => {
  const model = chartModelsFor("sub-1", gazeDoc)[0]!;

  it("keeps points inside the unit square", () => {
    const buf = filled([
      [0.5, 0.5, 4],
      [-0.2, 1.4, 4],
    ]);
    const pts = gazePoints(model, buf, 0.02);
    expect(pts).toHaveLength(2);
    expect(pts[1]).toMatchObject({ x: 0, y: 1 });
  });

  it("windows by the playhead, not by arrival", () => {
    const buf = filled([
      [0.1, 0.1, 4],
      [0.2, 0.2, 4],
      [0.3, 0.3, 4],
    ]);
    // playhead back at the first frame: later frames invisible
    const pts = gazePoints(model, buf, 0.0);
    expect(pts).toHaveLength(1);
    expect(pts[0]).toMatchObject({ x: 0.1, y: 0.1, age: 0 });
  });

  it("drops frames older than the trail window", () => {
    const buf = filled([
      [0.1, 0.1, 4],
      [0.2, 0.2, 4],
    ], 2.0); // 2 s apart, trail is 1 s
    const pts = gazePoints(model, buf, 2.0);
    expect(pts).toHaveLength(1);
    expect(pts[0]!.x).toBeCloseTo(0.2);
  });

  it("skips null samples", () => {
    const buf = filled([[null, 0.5, 4]]);
    expect(gazePoints(model, buf, 1)).toHaveLength(0);
  });

  it("is a pure function of (buffer, playhead)", () => {
    const buf = filled([
      [0.4, 0.6, 4],
      [0.5, 0.5, 4],
    ]);
    expect(gazePoints(model, buf, 0.02)).toEqual(gazePoints(model, buf, 0.02));
  });
});

describe("seriesFor", () => {
  const model = chartModelsFor("sub-1", weatherDoc)[0]!;

  it("collects per-channel points over the visible window", () => {
    const buf = filled(
      [
        ["temperature", 20],
        ["temperature", 21],
        ["temperature", 22],
      ],
      1.0,
    );
    const series = seriesFor(model, buf, 2.0);
    expect(series).toHaveLength(1);
    expect(series[0]!.channel).toBe("value");
    expect(series[0]!.points).toEqual([
      { t: 0, v: 20 },
      { t: 1, v: 21 },
      { t: 2, v: 22 },
    ]);
  });

  it("excludes future frames and nulls", () => {
    const buf = filled(
      [
        ["temperature", 20],
        ["temperature", null],
        ["temperature", 22],
      ],
      1.0,
    );
    const series = seriesFor(model, buf, 1.0);
    expect(series[0]!.points).toEqual([{ t: 0, v: 20 }]);
  });
});

describe("valueRange", () => {
  it("pads a real spread", () => {
    const [lo, hi] = valueRange([
      { channel: "v", points: [{ t: 0, v: 0 }, { t: 1, v: 10 }] },
    ]);
    expect(lo).toBeLessThan(0);
    expect(hi).toBeGreaterThan(10);
  });

  it("never returns a degenerate range", () => {
    expect(valueRange([])).toEqual([0, 1]);
    const [lo, hi] = valueRange([
      { channel: "v", points: [{ t: 0, v: 5 }] },
    ]);
    expect(hi).toBeGreaterThan(lo);
  });
});
