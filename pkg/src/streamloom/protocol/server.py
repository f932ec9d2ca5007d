"""Connection handling behind the WebSocket endpoint.

``ServerCore`` is synchronous and transport-free: ``handle`` takes one
client message and returns the direct replies, spawning paced source
handles for subscriptions as a side effect. Frames flow from per-stream
pump threads into each connection's single outbound queue, so one writer
serializes everything the client sees and ordering per subscription is
the subscription's own ordering. The WebSocket layer in ``build_app`` is
a thin shell: read text frames, call ``handle``, drain the outbound
queue.

Client-visible guarantees:

* the reply to `subscribe` is enqueued before any of its frames;
* frames of one subscription arrive in seq order, no duplicates;
* an `end` message is sent exactly once per subscription;
* a failed request leaves the connection usable.
"""

from __future__ import annotations

import queue
import threading
from typing import Optional

from ..errors import (
    BadMessage,
    IllegalTransition,
    InvariantError,
    LoomError,
    NotFound,
    ParamError,
    ResolverError,
    SpecError,
    UnknownStream,
    UnsupportedInLive,
)
from ..heuristics.stats import node_health
from ..live import LiveSource, discover_advertisements
from ..metadata import AnalyticMetadata, StreamQuery, discover_datasets, resolve
from ..sources import open_replay, open_simulation
from ..sources.frames import EndOfStream, Frame, StreamError
from ..sources.handle import control as control_handle
from ..workflow.runner import NodeCounters
from .messages import (
    Control,
    DatasetList,
    EndMessage,
    ErrorMessage,
    FrameMessage,
    ListDatasets,
    ListLive,
    ListStreams,
    LiveList,
    StateMessage,
    StreamList,
    Subscribe,
    Subscribed,
    Unsubscribe,
    decode_client,
)
from .state import ConnectionModel, transition

__all__ = ["Connection", "ServerCore", "build_app", "CLOSE"]

# terminal marker on a connection's outbound queue; the writer stops here
CLOSE = object()

_END_REASONS = {"end of data": "finished"}


class _Feed:
    """One stream inside a subscription: handle, queue, delivery counters."""

    def __init__(self, ref: str, handle, subscription):
        self.ref = ref
        self.handle = handle
        self.subscription = subscription
        self.counters = NodeCounters(node_id=ref, kind="delivery")
        self.thread: Optional[threading.Thread] = None


class _SubscriptionRuntime:
    def __init__(self, sid: str, mode: str, feeds: list):
        self.sid = sid
        self.mode = mode
        self.feeds = feeds
        self.ended = False          # terminal end message already sent
        self.ended_feeds: set = set()


class Connection:
    """Server-side state of one client connection."""

    def __init__(self, conn_id: str, outbound_size: int = 4096):
        self.conn_id = conn_id
        self.model = ConnectionModel()
        self.subscriptions: dict = {}
        self.outbound: queue.Queue = queue.Queue(outbound_size)
        self.closed = False
        self.lock = threading.RLock()
        self._sid_n = 0

    @property
    def state(self) -> str:
        return self.model.state

    def next_sid(self) -> str:
        with self.lock:
            self._sid_n += 1
            return f"sub-{self._sid_n}"

    def send(self, message) -> None:
        """Enqueue one outbound message; drops once the connection closed.

        Blocks in short slices while the queue is full so a slow client
        backpressures producers instead of ballooning memory, yet a
        disconnect still unblocks every producer promptly.
        """
        while not self.closed:
            try:
                self.outbound.put(message, timeout=0.1)
                return
            except queue.Full:
                continue

    def close_outbound(self) -> None:
        """Deliver the CLOSE marker even through a full queue."""
        while True:
            try:
                self.outbound.put_nowait(CLOSE)
                return
            except queue.Full:
                try:
                    self.outbound.get_nowait()
                except queue.Empty:
                    pass

    def next_message(self, timeout: Optional[float] = None):
        """Test/CLI convenience: blocking read of the outbound queue."""
        return self.outbound.get(timeout=timeout)


class ServerCore:
    """Protocol logic shared by the WebSocket endpoint and direct callers."""

    def __init__(self, dataset_root: Optional[str] = None, *,
                 live_timeout: float = 1.0,
                 subscription_queue: int = 1024,
                 outbound_queue: int = 4096):
        self.dataset_root = dataset_root
        self._live_timeout = live_timeout
        self._sub_queue = subscription_queue
        self._outbound_queue = outbound_queue
        self._lock = threading.Lock()
        self._conn_n = 0
        self.connections: dict = {}
        self.datasets: dict = {}
        self._stream_index: Optional[dict] = None
        if dataset_root is not None:
            for dataset in discover_datasets(dataset_root):
                self.datasets[dataset.dataset_id] = dataset

    # -- connection lifecycle

    def connect(self) -> Connection:
        with self._lock:
            self._conn_n += 1
            conn = Connection(f"conn-{self._conn_n}", self._outbound_queue)
            self.connections[conn.conn_id] = conn
        return conn

    def disconnect(self, conn: Connection) -> None:
        """Stop everything the connection owns; idempotent."""
        with conn.lock:
            sids = list(conn.subscriptions)
        for sid in sids:
            self._teardown(conn, sid, notify=False)
        conn.closed = True
        conn.close_outbound()
        with self._lock:
            self.connections.pop(conn.conn_id, None)

    # -- dataset index

    def _stored(self, ref: str):
        if self._stream_index is None or ref not in self._stream_index:
            index = {}
            for dataset in self.datasets.values():
                for rs in resolve(dataset, StreamQuery(dataset.dataset_id)):
                    index[rs.metadata.stream_id] = rs
            self._stream_index = index
        try:
            return self._stream_index[ref]
        except KeyError:
            raise UnknownStream(
                f"no stored stream {ref!r}; "
                f"known: {sorted(self._stream_index)}"
            ) from None

    # -- message dispatch

    def handle(self, conn: Connection, message) -> list:
        """Process one client message; returns (and enqueues) direct replies."""
        req = None
        try:
            if isinstance(message, (str, bytes)):
                req = _best_effort_req(message)
                message = decode_client(message)
            req = getattr(message, "req", req)
            if isinstance(message, ListLive):
                return self._list_live(conn, message)
            if isinstance(message, ListDatasets):
                return self._list_datasets(conn, message)
            if isinstance(message, ListStreams):
                return self._list_streams(conn, message)
            if isinstance(message, Subscribe):
                return self._subscribe(conn, message)
            if isinstance(message, Control):
                return self._control(conn, message)
            if isinstance(message, Unsubscribe):
                return self._unsubscribe(conn, message)
            raise BadMessage(f"not a client message: {type(message).__name__}")
        except LoomError as exc:
            reply = ErrorMessage(code=_code_for(exc), detail=str(exc), req=req)
            conn.send(reply)
            return [reply]

    def _reply(self, conn: Connection, messages: list) -> list:
        for message in messages:
            conn.send(message)
        return messages

    # -- discovery (never changes connection state)

    def _list_live(self, conn, msg: ListLive) -> list:
        from ..live import discover_live

        streams = tuple(discover_live(msg.timeout))
        return self._reply(conn, [LiveList(req=msg.req, streams=streams)])

    def _list_datasets(self, conn, msg: ListDatasets) -> list:
        datasets = tuple(
            self.datasets[k] for k in sorted(self.datasets)
        )
        return self._reply(conn, [DatasetList(req=msg.req, datasets=datasets)])

    def _list_streams(self, conn, msg: ListStreams) -> list:
        try:
            dataset = self.datasets[msg.query.dataset_id]
        except KeyError:
            raise ResolverError(
                f"unknown dataset {msg.query.dataset_id!r}; "
                f"known: {sorted(self.datasets)}"
            ) from None
        resolved = tuple(resolve(dataset, msg.query))
        return self._reply(conn, [StreamList(req=msg.req, streams=resolved)])

    # -- subscription lifecycle

    def _open_handles(self, mode: str, refs: tuple, options) -> list:
        handles = []
        try:
            if mode == "live":
                ads = discover_advertisements(self._live_timeout)
                for ref in refs:
                    match = [a for a in ads
                             if ref in (a.metadata.stream_id, a.metadata.name)]
                    if not match:
                        audible = sorted({a.metadata.stream_id for a in ads})
                        raise UnknownStream(
                            f"no live stream matches {ref!r}; audible: {audible}"
                        )
                    handles.append(LiveSource(match[0]))
            elif mode == "replay":
                for ref in refs:
                    handles.append(
                        open_replay(self._stored(ref), options.rate_multiplier)
                    )
            else:
                if options.simulation is None:
                    raise BadMessage(
                        "simulate subscriptions need options.simulation"
                    )
                for ref in refs:
                    resolved = self._stored(ref)
                    handles.append(
                        open_simulation(resolved.metadata, options.simulation)
                    )
        except BaseException:
            for handle in handles:
                handle.close()
            raise
        return handles

    def _subscribe(self, conn, msg: Subscribe) -> list:
        handles = self._open_handles(msg.mode, msg.streams, msg.options)
        feeds = [
            _Feed(ref, handle, handle.subscribe(maxsize=self._sub_queue))
            for ref, handle in zip(msg.streams, handles)
        ]
        with conn.lock:
            sid = conn.next_sid()
            runtime = _SubscriptionRuntime(sid, msg.mode, feeds)
            conn.subscriptions[sid] = runtime
            conn.model = transition(conn.model, "subscribed", sid)
        reply = Subscribed(
            req=msg.req,
            subscription_id=sid,
            streams=tuple(
                AnalyticMetadata(stream=h.metadata) for h in handles
            ),
        )
        # the reply must hit the outbound queue before the first frame can
        self._reply(conn, [reply])
        for feed in feeds:
            feed.thread = threading.Thread(
                target=self._pump, args=(conn, runtime, feed),
                name=f"{conn.conn_id}:{sid}:{feed.ref}", daemon=True,
            )
            feed.thread.start()
        if msg.options.autostart:
            for feed in feeds:
                feed.handle.start()
        return [reply]

    def _pump(self, conn, runtime, feed) -> None:
        while True:
            item = feed.subscription.get()
            if isinstance(item, Frame):
                feed.counters.saw_output("out", item)
                conn.send(FrameMessage(subscription_id=runtime.sid, frame=item))
                continue
            if isinstance(item, StreamError):
                conn.send(ErrorMessage(code="stream_error", detail=item.message))
                self._feed_finished(conn, runtime, feed, "error")
                return
            self._feed_finished(conn, runtime, feed,
                                _END_REASONS.get(item.reason, item.reason))
            return

    def _feed_finished(self, conn, runtime, feed, reason: str) -> None:
        with conn.lock:
            if runtime.ended:
                return
            runtime.ended_feeds.add(feed.ref)
            if len(runtime.ended_feeds) < len(runtime.feeds):
                return
            runtime.ended = True
            conn.subscriptions.pop(runtime.sid, None)
            conn.model = transition(conn.model, "subscription_ended",
                                    runtime.sid)
        conn.send(EndMessage(subscription_id=runtime.sid, reason=reason))

    def _teardown(self, conn, sid: str, *, notify: bool,
                  reason: str = "unsubscribed", req=None) -> Optional[EndMessage]:
        with conn.lock:
            runtime = conn.subscriptions.pop(sid, None)
            if runtime is not None:
                already_ended = runtime.ended
                runtime.ended = True
                conn.model = transition(conn.model, "subscription_ended", sid)
            else:
                return None
        for feed in runtime.feeds:
            feed.handle.close()
        for feed in runtime.feeds:
            if feed.thread is not None:
                feed.thread.join(timeout=5.0)
        if notify and not already_ended:
            message = EndMessage(subscription_id=sid, reason=reason, req=req)
            conn.send(message)
            return message
        return None

    def _control(self, conn, msg: Control) -> list:
        with conn.lock:
            runtime = conn.subscriptions.get(msg.subscription_id)
        if runtime is None:
            reply = ErrorMessage(
                code="unknown_subscription",
                detail=f"no active subscription {msg.subscription_id!r}",
                req=msg.req,
            )
            return self._reply(conn, [reply])
        # handles of one subscription share mode and action history, so
        # they are in the same state: the verb is legal for all or none
        for feed in runtime.feeds:
            control_handle(feed.handle, msg.action, msg.t)
        state = runtime.feeds[0].handle.state
        reply = StateMessage(subscription_id=msg.subscription_id, state=state,
                             req=msg.req)
        return self._reply(conn, [reply])

    def _unsubscribe(self, conn, msg: Unsubscribe) -> list:
        message = self._teardown(conn, msg.subscription_id, notify=True,
                                 reason="unsubscribed", req=msg.req)
        if message is None:
            message = ErrorMessage(
                code="unknown_subscription",
                detail=f"no active subscription {msg.subscription_id!r}",
                req=msg.req,
            )
            conn.send(message)
        return [message]

    # -- health

    def stats_snapshot(self) -> dict:
        """Delivery-health rows for every active feed, keyed conn/sid/ref."""
        nodes = {}
        with self._lock:
            connections = list(self.connections.values())
        for conn in connections:
            with conn.lock:
                runtimes = list(conn.subscriptions.values())
            for runtime in runtimes:
                for feed in runtime.feeds:
                    key = f"{conn.conn_id}/{runtime.sid}/{feed.ref}"
                    nodes[key] = node_health(
                        feed.counters,
                        feed.handle.metadata.frequency_hz,
                        1.0,
                    )
        return {"nodes": nodes}


def _best_effort_req(raw) -> Optional[object]:
    """Pull the correlation id out of a frame that may fail strict decoding."""
    import json

    try:
        doc = json.loads(raw)
    except Exception:
        return None
    if isinstance(doc, dict):
        req = doc.get("req")
        if isinstance(req, (str, int)) and not isinstance(req, bool):
            return req
    return None


def _code_for(exc: LoomError) -> str:
    if isinstance(exc, BadMessage):
        return "bad_message"
    if isinstance(exc, (UnknownStream, NotFound)):
        return "unknown_stream"
    if isinstance(exc, SpecError):
        return "bad_simulation"
    if isinstance(exc, IllegalTransition):
        return "illegal_transition"
    if isinstance(exc, UnsupportedInLive):
        return "unsupported_in_live"
    if isinstance(exc, (ResolverError, InvariantError)):
        return "bad_query"
    if isinstance(exc, ParamError):
        return "bad_message"
    return "internal"


# ---------------------------------------------------------------------------
# HTTP/WebSocket shell


def build_app(core: ServerCore, static_dir: Optional[str] = None):
    """FastAPI application exposing /ws, /healthz, /stats and static assets."""
    import asyncio

    from fastapi import FastAPI
    from fastapi.responses import PlainTextResponse
    from starlette.websockets import WebSocketDisconnect

    from .messages import encode

    app = FastAPI()

    @app.get("/healthz")
    async def healthz():
        return PlainTextResponse("ok")

    @app.get("/stats")
    async def stats():
        return core.stats_snapshot()

    async def _writer(websocket, conn, loop):
        while True:
            item = await loop.run_in_executor(None, conn.outbound.get)
            if item is CLOSE:
                return
            try:
                await websocket.send_text(encode(item))
            except Exception:
                return  # receive loop notices the disconnect and cleans up

    async def ws(websocket):
        await websocket.accept()
        conn = core.connect()
        loop = asyncio.get_running_loop()
        writer = asyncio.ensure_future(_writer(websocket, conn, loop))
        try:
            while True:
                text = await websocket.receive_text()
                await loop.run_in_executor(None, core.handle, conn, text)
        except WebSocketDisconnect:
            pass
        finally:
            disconnect = loop.run_in_executor(None, core.disconnect, conn)
            try:
                await asyncio.shield(disconnect)
            except asyncio.CancelledError:
                await disconnect  # teardown must finish even when cancelled
            await asyncio.gather(writer, return_exceptions=True)

    # plain starlette routing: the handler must run outside FastAPI's
    # annotation-driven injection, which cannot see function-local names
    from starlette.routing import WebSocketRoute

    app.router.routes.append(WebSocketRoute("/ws", ws))

    if static_dir is not None:
        from fastapi.staticfiles import StaticFiles

        app.mount("/", StaticFiles(directory=str(static_dir), html=True),
                  name="dashboard")

    return app
