import type {
  AnalyticDoc,
  ControlAction,
  DatasetDoc,
  Mode,
  ResolvedEntry,
  ServerMessage,
  StreamMetaDoc,
  SubscribeOptions,
  SubscriptionState,
} from "./protocol.js";
import { decodeServer, encodeClient } from "./protocol.js";
import { FrameBuffer } from "./buffer.js";
import { ChartModel, chartModelsFor } from "./charts.js";
import { HeatGrid } from "./heatmap.js";

/** Anything that can carry text frames to the server. The browser
 * build wraps a WebSocket; tests wire a mock server directly.
 */
export interface Transport {
  send(text: string): void;
  close(): void;
}

export type SocketState = "connecting" | "open" | "retrying" | "closed";

export interface SubscriptionView {
  id: string;
  mode: Mode;
  streams: AnalyticDoc[];
  /** Server-confirmed playback state; never set optimistically. */
  state: SubscriptionState;
  buffers: Map<string, FrameBuffer>;
  /** One decayed histogram per gaze2d chart, keyed by stream id. */
  heat: Map<string, HeatGrid>;
  charts: ChartModel[];
  /** Data time of the newest confirmation (frame or seek). */
  playhead: number;
  /** Highest data time ever seen; the seek bar's range. */
  maxT: number;
  errors: string[];
  endReason: string | null;
}

type Pending =
  | { kind: "discover" }
  | { kind: "expand"; datasetId: string }
  | { kind: "subscribe"; mode: Mode; options?: SubscribeOptions }
  | { kind: "control"; sid: string; action: ControlAction; t?: number }
  | { kind: "unsubscribe"; sid: string };

/** Client-side session state: discovery results, the not-yet-sent
 * selection, active subscriptions with their bounded buffers, and the
 * request/reply bookkeeping that keeps every state change
 * server-confirmed. Pure with respect to the message log: feeding two
 * sessions the same text sequence yields identical chart inputs.
 */
export class ClientSession {
  socketState: SocketState = "connecting";
  banner: string | null = null;
  datasets: DatasetDoc[] = [];
  liveStreams: StreamMetaDoc[] = [];
  resolved = new Map<string, ResolvedEntry[]>();
  /** Stream ids picked in the UI; the server hears nothing about them
   * until confirmSelection(). */
  selected = new Set<string>();
  subs = new Map<string, SubscriptionView>();
  errorLog: string[] = [];
  /** Bumped on every visible mutation; render loops diff against it. */
  rev = 0;

  private transport: Transport | null = null;
  private reqCounter = 0;
  private pending = new Map<number, Pending>();

  constructor(readonly bufferCapacity = 5000) {}

  // -- connection lifecycle

  attach(transport: Transport): void {
    this.transport = transport;
    this.socketState = "open";
    this.banner = null;
    this.pending.clear();
    this.touch();
  }

  handleClose(): void {
    this.transport = null;
    this.socketState = "retrying";
    this.banner = "connection lost; retrying";
    for (const view of this.subs.values()) {
      if (view.state !== "ended") {
        view.state = "ended";
        view.endReason = "connection_lost";
      }
    }
    this.touch();
  }

  // -- outbound

  private send(text: string): boolean {
    if (!this.transport) {
      this.banner = "not connected";
      this.touch();
      return false;
    }
    this.transport.send(text);
    return true;
  }

  private nextReq(p: Pending): number {
    this.reqCounter += 1;
    this.pending.set(this.reqCounter, p);
    return this.reqCounter;
  }

  /** Refresh the dataset and live-stream lists. Never touches
   * subscriptions; safe to call at any time.
   */
  discover(): void {
    this.send(encodeClient.listDatasets(this.nextReq({ kind: "discover" })));
    this.send(encodeClient.listLive(this.nextReq({ kind: "discover" })));
  }

  /** Resolve one dataset's concrete streams for the selection list. */
  expandDataset(datasetId: string): void {
    const req = this.nextReq({ kind: "expand", datasetId });
    this.send(encodeClient.listStreams(req, datasetId));
  }

  toggleSelect(streamId: string): void {
    if (this.selected.has(streamId)) this.selected.delete(streamId);
    else this.selected.add(streamId);
    this.touch();
  }

  /** The one place selection reaches the server. */
  confirmSelection(mode: Mode = "replay", options?: SubscribeOptions): boolean {
    if (this.selected.size === 0) return false;
    const streams = [...this.selected].sort();
    const req = this.nextReq({ kind: "subscribe", mode, options });
    return this.send(encodeClient.subscribe(req, mode, streams, options));
  }

  control(sid: string, action: ControlAction, t?: number): void {
    const view = this.subs.get(sid);
    if (view && view.mode === "live" && action !== "start" && action !== "stop") {
      view.errors.push(`${action} is not available on a live subscription`);
      this.touch();
      return;
    }
    const req = this.nextReq({ kind: "control", sid, action, t });
    this.send(encodeClient.control(req, sid, action, t));
  }

  unsubscribe(sid: string): void {
    const req = this.nextReq({ kind: "unsubscribe", sid });
    this.send(encodeClient.unsubscribe(req, sid));
  }

  /** Drop an ended subscription's panel. */
  dismiss(sid: string): void {
    const view = this.subs.get(sid);
    if (view && view.state === "ended") {
      this.subs.delete(sid);
      this.touch();
    }
  }

  // -- inbound

  handleMessage(text: string): void {
    const msg = decodeServer(text);
    if (msg === null) return; // lenient: not ours, ignore
    this.dispatch(msg);
    this.touch();
  }

  private dispatch(msg: ServerMessage): void {
    switch (msg.type) {
      case "dataset_list":
        this.takePending(msg.req);
        this.datasets = msg.datasets ?? [];
        break;
      case "live_list":
        this.takePending(msg.req);
        this.liveStreams = msg.streams ?? [];
        break;
      case "stream_list": {
        const p = this.takePending(msg.req);
        if (p?.kind === "expand") {
          this.resolved.set(p.datasetId, msg.streams ?? []);
        }
        break;
      }
      case "subscribed": {
        const p = this.takePending(msg.req);
        const mode: Mode = p?.kind === "subscribe" ? p.mode : "replay";
        const autostart =
          p?.kind === "subscribe" ? p.options?.autostart !== false : true;
        this.addSubscription(msg.subscription_id, mode, msg.streams, autostart);
        this.selected.clear();
        break;
      }
      case "frame": {
        const view = this.subs.get(msg.subscription_id);
        if (!view) break;
        const frame = msg.frame;
        view.buffers.get(frame.stream_id)?.push(frame);
        if (frame.t > view.playhead) view.playhead = frame.t;
        if (frame.t > view.maxT) view.maxT = frame.t;
        const heat = view.heat.get(frame.stream_id);
        if (heat) {
          const model = view.charts.find(
            (c) => c.kind === "gaze2d" && c.streamId === frame.stream_id,
          );
          if (model) {
            const [xi, yi] = model.indices as [number, number];
            const x = frame.values[xi];
            const y = frame.values[yi];
            if (typeof x === "number" && typeof y === "number") {
              heat.deposit(x, y, frame.t);
            }
          }
        }
        break;
      }
      case "state": {
        const p = this.takePending(msg.req);
        const view = this.subs.get(msg.subscription_id);
        if (!view) break;
        if (p?.kind === "control" && p.action === "seek" && p.t !== undefined) {
          // the stream position moved: buffered history is stale
          for (const buffer of view.buffers.values()) buffer.clear();
          for (const heat of view.heat.values()) heat.clear();
          view.playhead = p.t;
        }
        view.state = msg.state;
        break;
      }
      case "end": {
        this.takePending(msg.req);
        const view = this.subs.get(msg.subscription_id);
        if (!view) break;
        view.state = "ended";
        view.endReason = msg.reason;
        break;
      }
      case "error": {
        const p = this.takePending(msg.req);
        const text = `${msg.code}: ${msg.detail}`;
        if (p?.kind === "control" || p?.kind === "unsubscribe") {
          this.subs.get(p.sid)?.errors.push(text);
        } else if (p?.kind === "subscribe") {
          this.banner = `subscribe failed (${text})`;
        } else {
          this.errorLog.push(text);
        }
        break;
      }
    }
  }

  private addSubscription(
    sid: string,
    mode: Mode,
    streams: AnalyticDoc[],
    autostart: boolean,
  ): void {
    const buffers = new Map<string, FrameBuffer>();
    const heat = new Map<string, HeatGrid>();
    const charts: ChartModel[] = [];
    for (const analytic of streams) {
      const id = analytic.stream.stream_id;
      buffers.set(id, new FrameBuffer(this.bufferCapacity));
      for (const model of chartModelsFor(sid, analytic)) {
        charts.push(model);
        if (model.kind === "gaze2d") heat.set(id, new HeatGrid());
      }
    }
    this.subs.set(sid, {
      id: sid,
      mode,
      streams,
      state: autostart ? "playing" : "idle",
      buffers,
      heat,
      charts,
      playhead: 0,
      maxT: 0,
      errors: [],
      endReason: null,
    });
  }

  private takePending(req: unknown): Pending | undefined {
    if (typeof req !== "number") return undefined;
    const p = this.pending.get(req);
    this.pending.delete(req);
    return p;
  }

  private touch(): void {
    this.rev += 1;
  }
}
