import type { GazePoint, Series } from "./charts.js";
import type { HeatGrid } from "./heatmap.js";

/** Canvas painters. Pure consumers of chart-model output: all data
 * decisions happen in charts.ts, only pixels happen here.
 */

const BG = "#10141a";
const GRID = "#2a3442";
const PALETTE = ["#4fc1ff", "#ffb454", "#7ee787", "#ff7b72", "#d2a8ff"];

export function paintGaze(
  ctx: CanvasRenderingContext2D,
  w: number,
  h: number,
  points: GazePoint[],
  heat: HeatGrid | undefined,
  trailS: number,
): void {
  ctx.fillStyle = BG;
  ctx.fillRect(0, 0, w, h);

  if (heat) {
    const max = heat.maxValue();
    if (max > 0) {
      const bw = w / heat.bins;
      const bh = h / heat.bins;
      for (let iy = 0; iy < heat.bins; iy++) {
        for (let ix = 0; ix < heat.bins; ix++) {
          const v = heat.get(ix, iy);
          if (v <= 0.01 * max) continue;
          const a = Math.min(1, v / max);
          ctx.fillStyle = `rgba(255, 120, 40, ${(0.55 * a).toFixed(3)})`;
          ctx.fillRect(ix * bw, iy * bh, bw + 0.5, bh + 0.5);
        }
      }
    }
  }

  ctx.strokeStyle = GRID;
  ctx.strokeRect(0.5, 0.5, w - 1, h - 1);

  let prev: GazePoint | null = null;
  for (const p of points) {
    const x = p.x * w;
    const y = p.y * h;
    const fade = Math.max(0, 1 - p.age / trailS);
    if (prev) {
      ctx.strokeStyle = `rgba(79, 193, 255, ${(0.6 * fade).toFixed(3)})`;
      ctx.beginPath();
      ctx.moveTo(prev.x * w, prev.y * h);
      ctx.lineTo(x, y);
      ctx.stroke();
    }
    ctx.fillStyle = `rgba(79, 193, 255, ${(0.25 + 0.75 * fade).toFixed(3)})`;
    ctx.beginPath();
    ctx.arc(x, y, 1.5 + 2.5 * fade, 0, Math.PI * 2);
    ctx.fill();
    prev = p;
  }

  const last = points[points.length - 1];
  if (last) {
    const x = last.x * w;
    const y = last.y * h;
    ctx.strokeStyle = "#e6edf3";
    ctx.beginPath();
    ctx.moveTo(x - 7, y);
    ctx.lineTo(x + 7, y);
    ctx.moveTo(x, y - 7);
    ctx.lineTo(x, y + 7);
    ctx.stroke();
  }
}

export function paintSeries(
  ctx: CanvasRenderingContext2D,
  w: number,
  h: number,
  series: Series[],
  range: [number, number],
  windowS: number,
  playhead: number,
): void {
  ctx.fillStyle = BG;
  ctx.fillRect(0, 0, w, h);
  const [lo, hi] = range;
  const t0 = playhead - windowS;
  const px = (t: number) => ((t - t0) / windowS) * w;
  const py = (v: number) => h - ((v - lo) / (hi - lo)) * h;

  ctx.strokeStyle = GRID;
  for (let i = 1; i < 4; i++) {
    const y = (h * i) / 4;
    ctx.beginPath();
    ctx.moveTo(0, y);
    ctx.lineTo(w, y);
    ctx.stroke();
  }
  ctx.strokeRect(0.5, 0.5, w - 1, h - 1);

  series.forEach((s, k) => {
    if (s.points.length === 0) return;
    ctx.strokeStyle = PALETTE[k % PALETTE.length]!;
    ctx.lineWidth = 1.5;
    ctx.beginPath();
    s.points.forEach((p, i) => {
      if (i === 0) ctx.moveTo(px(p.t), py(p.v));
      else ctx.lineTo(px(p.t), py(p.v));
    });
    ctx.stroke();
  });
  ctx.lineWidth = 1;

  ctx.fillStyle = "#8b98a9";
  ctx.font = "10px system-ui, sans-serif";
  ctx.fillText(hi.toPrecision(3), 4, 12);
  ctx.fillText(lo.toPrecision(3), 4, h - 4);
  ctx.fillText(`t=${playhead.toFixed(2)}s`, w - 72, h - 4);
  series.forEach((s, k) => {
    ctx.fillStyle = PALETTE[k % PALETTE.length]!;
    ctx.fillText(s.channel, 40 + k * 64, 12);
  });
}
