import { describe, expect, it } from "vitest";
import { HeatGrid } from "../src/heatmap.js";

describe("HeatGrid", () => {
  it("defaults to 64x64 bins", () => {
    const grid = new HeatGrid();
    expect(grid.bins).toBe(64);
    expect(grid.grid.length).toBe(64 * 64);
  });

  it("deposits land in the right bin, edges included", () => {
    const grid = new HeatGrid(4, 1.0);
    grid.deposit(0.0, 0.0, 0);
    grid.deposit(0.99, 0.0, 0);
    grid.deposit(1.0, 1.0, 0); // exactly 1.0 clamps into the last bin
    expect(grid.get(0, 0)).toBe(1);
    expect(grid.get(3, 0)).toBe(1);
    expect(grid.get(3, 3)).toBe(1);
  });

  it("ignores points outside the unit square", () => {
    const grid = new HeatGrid(4, 1.0);
    grid.deposit(-0.1, 0.5, 0);
    grid.deposit(0.5, 1.2, 0);
    expect(grid.maxValue()).toBe(0);
  });

  it("halves a cell after one half-life of stream time", () => {
    const grid = new HeatGrid(4, 2.0);
    grid.deposit(0.1, 0.1, 0.0);
    grid.decayTo(2.0);
    expect(grid.get(0, 0)).toBeCloseTo(0.5, 6);
    grid.decayTo(4.0);
    expect(grid.get(0, 0)).toBeCloseTo(0.25, 6);
  });

  it("never decays backwards", () => {
    const grid = new HeatGrid(4, 2.0);
    grid.deposit(0.1, 0.1, 5.0);
    grid.decayTo(1.0); // stale timestamp, no effect
    expect(grid.get(0, 0)).toBe(1);
  });

  it("is deterministic over a frame sequence", () => {
    const a = new HeatGrid();
    const b = new HeatGrid();
    for (let i = 0; i < 400; i++) {
      const x = 0.5 + 0.4 * Math.sin(i / 7);
      const y = 0.5 + 0.4 * Math.cos(i / 11);
      a.deposit(x, y, i / 50);
      b.deposit(x, y, i / 50);
    }
    expect([...a.grid]).toEqual([...b.grid]);
  });

  it("clear resets values and the decay clock", () => {
    const grid = new HeatGrid(4, 2.0);
    grid.deposit(0.1, 0.1, 10.0);
    grid.clear();
    expect(grid.maxValue()).toBe(0);
    grid.deposit(0.1, 0.1, 0.0); // earlier t fine after clear
    expect(grid.get(0, 0)).toBe(1);
  });
});
