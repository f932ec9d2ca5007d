import { Backoff } from "./backoff.js";
import { gazePoints, seriesFor, valueRange } from "./charts.js";
import { paintGaze, paintSeries } from "./render.js";
import { ClientSession, SubscriptionView } from "./session.js";
import { HeuristicsPanel } from "./stats.js";

/** Browser entry point: one WebSocket, one session, one render loop.
 * Socket ingestion mutates the session immediately; painting happens
 * on animation frames whenever the session revision moved, so a burst
 * of frames never backs up behind the canvas.
 */

const session = new ClientSession();
const panel = new HeuristicsPanel();
const backoff = new Backoff();

const $ = <T extends HTMLElement>(id: string): T => {
  const el = document.getElementById(id);
  if (!el) throw new Error(`missing #${id}`);
  return el as T;
};

// -- socket lifecycle

function connect(): void {
  const scheme = location.protocol === "https:" ? "wss" : "ws";
  const ws = new WebSocket(`${scheme}://${location.host}/ws`);
  ws.onopen = () => {
    backoff.reset();
    session.attach({
      send: (text) => ws.send(text),
      close: () => ws.close(),
    });
    session.discover();
  };
  ws.onmessage = (ev) => {
    if (typeof ev.data === "string") session.handleMessage(ev.data);
  };
  ws.onclose = () => {
    session.handleClose();
    setTimeout(connect, backoff.next() * 1000);
  };
  ws.onerror = () => ws.close();
}

// -- discovery panel

function renderDiscovery(): void {
  const list = $("datasets");
  list.textContent = "";
  if (session.datasets.length === 0) {
    list.appendChild(emptyState("no datasets on this server"));
  }
  for (const ds of session.datasets) {
    const li = document.createElement("li");
    const btn = document.createElement("button");
    btn.className = "link";
    btn.textContent = ds.dataset_id;
    btn.onclick = () => session.expandDataset(ds.dataset_id);
    li.appendChild(btn);
    const resolved = session.resolved.get(ds.dataset_id);
    if (resolved) {
      const ul = document.createElement("ul");
      for (const entry of resolved) {
        ul.appendChild(streamRow(entry.metadata.stream_id));
      }
      li.appendChild(ul);
    }
    list.appendChild(li);
  }

  const live = $("live");
  live.textContent = "";
  if (session.liveStreams.length === 0) {
    live.appendChild(emptyState("no live streams in sight"));
  }
  for (const meta of session.liveStreams) {
    live.appendChild(streamRow(meta.stream_id));
  }

  ($("confirm") as HTMLButtonElement).disabled = session.selected.size === 0;
}

function emptyState(text: string): HTMLElement {
  const li = document.createElement("li");
  li.className = "empty";
  li.textContent = text;
  return li;
}

function streamRow(streamId: string): HTMLElement {
  const li = document.createElement("li");
  const label = document.createElement("label");
  const box = document.createElement("input");
  box.type = "checkbox";
  box.checked = session.selected.has(streamId);
  box.onchange = () => session.toggleSelect(streamId);
  label.appendChild(box);
  label.appendChild(document.createTextNode(streamId));
  li.appendChild(label);
  return li;
}

// -- subscription cards

interface Card {
  root: HTMLElement;
  badge: HTMLElement;
  seek: HTMLInputElement;
  seekWrap: HTMLElement;
  errors: HTMLElement;
  canvases: Map<number, HTMLCanvasElement>;
  dragging: boolean;
}

const cards = new Map<string, Card>();

function buildCard(view: SubscriptionView): Card {
  const root = document.createElement("article");
  root.className = "card";

  const head = document.createElement("div");
  head.className = "card-head";
  const title = document.createElement("strong");
  title.textContent = `${view.id} (${view.mode})`;
  const badge = document.createElement("span");
  badge.className = "badge";
  head.append(title, badge);
  root.appendChild(head);

  const controls = document.createElement("div");
  controls.className = "controls";
  const verbs: [string, () => void][] = [
    ["start", () => session.control(view.id, "start")],
    ["pause", () => session.control(view.id, "pause")],
    ["resume", () => session.control(view.id, "resume")],
    ["stop", () => session.control(view.id, "stop")],
    ["unsubscribe", () => session.unsubscribe(view.id)],
  ];
  for (const [name, fn] of verbs) {
    if (view.mode === "live" && (name === "pause" || name === "resume")) {
      continue; // replay-only verbs stay hidden on live subscriptions
    }
    const b = document.createElement("button");
    b.textContent = name;
    b.onclick = fn;
    controls.appendChild(b);
  }
  root.appendChild(controls);

  const seekWrap = document.createElement("div");
  seekWrap.className = "seek";
  const seek = document.createElement("input");
  seek.type = "range";
  seek.min = "0";
  seek.max = "1";
  seek.step = "0.01";
  const card: Card = {
    root,
    badge,
    seek,
    seekWrap,
    errors: document.createElement("ul"),
    canvases: new Map(),
    dragging: false,
  };
  seek.onpointerdown = () => (card.dragging = true);
  seek.onchange = () => {
    card.dragging = false;
    session.control(view.id, "seek", Number(seek.value));
  };
  seekWrap.appendChild(seek);
  if (view.mode === "live") seekWrap.classList.add("hidden");
  root.appendChild(seekWrap);

  card.errors.className = "errors";
  root.appendChild(card.errors);

  for (const [i, model] of view.charts.entries()) {
    const canvas = document.createElement("canvas");
    canvas.width = model.kind === "gaze2d" ? 320 : 480;
    canvas.height = model.kind === "gaze2d" ? 320 : 160;
    canvas.title = `${model.kind}: ${model.streamId}`;
    card.canvases.set(i, canvas);
    root.appendChild(canvas);
  }
  return card;
}

function renderSubscriptions(): void {
  const host = $("subs");
  for (const [sid, view] of session.subs) {
    let card = cards.get(sid);
    if (!card) {
      card = buildCard(view);
      cards.set(sid, card);
      host.appendChild(card.root);
    }
    card.badge.textContent = view.endReason
      ? `${view.state} (${view.endReason})`
      : view.state;
    card.badge.dataset.state = view.state;
    if (!card.dragging) {
      card.seek.max = String(Math.max(1, view.maxT));
      card.seek.value = String(view.playhead);
    }
    card.errors.textContent = "";
    for (const err of view.errors.slice(-4)) {
      const li = document.createElement("li");
      li.textContent = err;
      card.errors.appendChild(li);
    }
    for (const [i, model] of view.charts.entries()) {
      const canvas = card.canvases.get(i);
      const ctx = canvas?.getContext("2d");
      if (!canvas || !ctx) continue;
      const buffer = view.buffers.get(model.streamId);
      if (!buffer) continue;
      if (model.kind === "gaze2d") {
        paintGaze(
          ctx,
          canvas.width,
          canvas.height,
          gazePoints(model, buffer, view.playhead),
          view.heat.get(model.streamId),
          model.windowS,
        );
      } else {
        const series = seriesFor(model, buffer, view.playhead);
        paintSeries(
          ctx,
          canvas.width,
          canvas.height,
          series,
          valueRange(series),
          model.windowS,
          view.playhead,
        );
      }
    }
  }
  for (const [sid, card] of cards) {
    if (!session.subs.has(sid)) {
      card.root.remove();
      cards.delete(sid);
    }
  }
}

// -- heuristics panel

function renderHeuristics(): void {
  $("stats-stale").classList.toggle("hidden", !panel.stale);
  const body = $("stats-body");
  body.textContent = "";
  for (const row of panel.rows) {
    const tr = document.createElement("tr");
    if (panel.highlighted(row)) tr.className = "alert";
    const cells = [
      row.key,
      row.kind,
      row.f === null ? "-" : row.f.toFixed(3),
      row.gf === null ? "-" : row.gf.toFixed(2),
      row.mean_latency_s === null
        ? "-"
        : `${(row.mean_latency_s * 1e6).toFixed(1)}us`,
      String(row.frames_out),
      String(row.errors),
    ];
    for (const text of cells) {
      const td = document.createElement("td");
      td.textContent = text;
      tr.appendChild(td);
    }
    body.appendChild(tr);
  }
}

async function pollStats(): Promise<void> {
  try {
    const res = await fetch("/stats");
    if (!res.ok) throw new Error(String(res.status));
    panel.applySnapshot(await res.json());
  } catch {
    panel.markStale();
  }
  renderHeuristics();
}

// -- frame loop

let lastRev = -1;

function tick(): void {
  if (session.rev !== lastRev) {
    lastRev = session.rev;
    $("banner").textContent = session.banner ?? "";
    $("banner").classList.toggle("hidden", session.banner === null);
    ($("socket") as HTMLElement).dataset.state = session.socketState;
    $("socket").textContent = session.socketState;
    renderDiscovery();
    renderSubscriptions();
    const log = $("error-log");
    log.textContent = "";
    for (const err of session.errorLog.slice(-6)) {
      const li = document.createElement("li");
      li.textContent = err;
      log.appendChild(li);
    }
  }
  requestAnimationFrame(tick);
}

$("refresh").onclick = () => session.discover();
($("confirm") as HTMLButtonElement).onclick = () => {
  const mode = ($("mode") as HTMLSelectElement).value as
    | "replay"
    | "live";
  const rate = Number(($("rate") as HTMLInputElement).value) || 1.0;
  session.confirmSelection(
    mode,
    mode === "replay" ? { rate_multiplier: rate } : undefined,
  );
};

connect();
setInterval(pollStats, 1000);
void pollStats();
requestAnimationFrame(tick);
