/** Client-side view of the wire protocol (see docs/protocol.md).
 *
 * Encoding is plain JSON. Decoding is deliberately lenient: unknown
 * message types and unknown fields are ignored so the server can grow
 * the protocol without breaking deployed dashboards.
 */

export type Scalar = number | string | null;

export interface WireFrame {
  stream_id: string;
  seq: number;
  t: number;
  values: Scalar[];
}

export interface ChannelDoc {
  name: string;
  dtype: string;
  unit?: string;
  [extra: string]: unknown;
}

export interface StreamMetaDoc {
  stream_id: string;
  name?: string;
  frequency_hz?: number;
  channels?: ChannelDoc[];
  [extra: string]: unknown;
}

export interface AnalyticDoc {
  stream: StreamMetaDoc;
  provenance?: { node_id?: string; node_kind?: string }[];
  [extra: string]: unknown;
}

export interface DatasetDoc {
  dataset_id: string;
  groups?: Record<string, string[]>;
  streams?: StreamMetaDoc[];
  [extra: string]: unknown;
}

export interface ResolvedEntry {
  attributes?: Record<string, string>;
  metadata: StreamMetaDoc;
  [extra: string]: unknown;
}

export type SubscriptionState = "idle" | "playing" | "paused" | "ended";
export type Mode = "live" | "replay" | "simulate";
export type ControlAction = "start" | "stop" | "pause" | "resume" | "seek";

export type ServerMessage =
  | { type: "dataset_list"; req?: unknown; datasets: DatasetDoc[] }
  | { type: "stream_list"; req?: unknown; streams: ResolvedEntry[] }
  | { type: "live_list"; req?: unknown; streams: StreamMetaDoc[] }
  | {
      type: "subscribed";
      req?: unknown;
      subscription_id: string;
      streams: AnalyticDoc[];
    }
  | { type: "frame"; subscription_id: string; frame: WireFrame }
  | {
      type: "state";
      req?: unknown;
      subscription_id: string;
      state: SubscriptionState;
    }
  | { type: "end"; req?: unknown; subscription_id: string; reason: string }
  | { type: "error"; req?: unknown; code: string; detail: string };

const SERVER_TYPES = new Set([
  "dataset_list",
  "stream_list",
  "live_list",
  "subscribed",
  "frame",
  "state",
  "end",
  "error",
]);

/** Parse one server frame; null means "not for us, ignore". */
export function decodeServer(text: string): ServerMessage | null {
  let doc: unknown;
  try {
    doc = JSON.parse(text);
  } catch {
    return null;
  }
  if (typeof doc !== "object" || doc === null || Array.isArray(doc)) {
    return null;
  }
  const type = (doc as { type?: unknown }).type;
  if (typeof type !== "string" || !SERVER_TYPES.has(type)) return null;
  return doc as ServerMessage;
}

export interface SubscribeOptions {
  rate_multiplier?: number;
  autostart?: boolean;
  simulation?: object;
}

export const encodeClient = {
  listDatasets(req: number): string {
    return JSON.stringify({ type: "list_datasets", req });
  },
  listLive(req: number, timeout = 2.0): string {
    return JSON.stringify({ type: "list_live", req, timeout });
  },
  listStreams(
    req: number,
    dataset: string,
    attributes?: Record<string, string>,
  ): string {
    const query: Record<string, unknown> = { dataset };
    if (attributes) query.attributes = attributes;
    return JSON.stringify({ type: "list_streams", req, query });
  },
  subscribe(
    req: number,
    mode: Mode,
    streams: string[],
    options?: SubscribeOptions,
  ): string {
    const msg: Record<string, unknown> = {
      type: "subscribe",
      req,
      mode,
      streams,
    };
    if (options && Object.keys(options).length > 0) msg.options = options;
    return JSON.stringify(msg);
  },
  control(
    req: number,
    subscription_id: string,
    action: ControlAction,
    t?: number,
  ): string {
    const msg: Record<string, unknown> = {
      type: "control",
      req,
      subscription_id,
      action,
    };
    if (t !== undefined) msg.t = t;
    return JSON.stringify(msg);
  },
  unsubscribe(req: number, subscription_id: string): string {
    return JSON.stringify({ type: "unsubscribe", req, subscription_id });
  },
};
