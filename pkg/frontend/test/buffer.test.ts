import { describe, expect, it } from "vitest";
import { FrameBuffer } from "../src/buffer.js";
import type { WireFrame } from "../src/protocol.js";

const frame = (seq: number): WireFrame => ({
  stream_id: "s",
  seq,
  t: seq / 50,
  values: [seq],
});

describe("FrameBuffer", () => {
  it("keeps arrival order below capacity", () => {
    const buf = new FrameBuffer(10);
    for (let i = 0; i < 4; i++) buf.push(frame(i));
    expect(buf.toArray().map((f) => f.seq)).toEqual([0, 1, 2, 3]);
    expect(buf.size).toBe(4);
    expect(buf.latest()?.seq).toBe(3);
  });

  it("evicts FIFO at capacity but keeps counting", () => {
    const buf = new FrameBuffer(5);
    for (let i = 0; i < 8; i++) buf.push(frame(i));
    expect(buf.size).toBe(5);
    expect(buf.toArray().map((f) => f.seq)).toEqual([3, 4, 5, 6, 7]);
    expect(buf.total).toBe(8); // dropped frames still counted
    expect(buf.latest()?.seq).toBe(7);
  });

  it("defaults to the documented 5000-frame bound", () => {
    const buf = new FrameBuffer();
    expect(buf.capacity).toBe(5000);
  });

  it("clear empties content, not the running total", () => {
    const buf = new FrameBuffer(3);
    buf.push(frame(0));
    buf.push(frame(1));
    buf.clear();
    expect(buf.size).toBe(0);
    expect(buf.latest()).toBeUndefined();
    expect(buf.total).toBe(2);
    buf.push(frame(2));
    expect(buf.toArray().map((f) => f.seq)).toEqual([2]);
  });

  it("forEach visits the same order as toArray", () => {
    const buf = new FrameBuffer(4);
    for (let i = 0; i < 9; i++) buf.push(frame(i));
    const seen: number[] = [];
    buf.forEach((f) => seen.push(f.seq));
    expect(seen).toEqual(buf.toArray().map((f) => f.seq));
  });

  it("rejects a zero capacity", () => {
    expect(() => new FrameBuffer(0)).toThrow(RangeError);
  });
});
