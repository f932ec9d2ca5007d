"""A complete protocol session against an in-process server core.

The same message layer the WebSocket endpoint speaks, minus the socket:
discover datasets, subscribe to a replay at 20x speed, pause, seek back
to zero, and watch the exactly-once end message. Every line printed is
verbatim wire JSON.

For the networked version run `streamloom serve --root datasets` and
connect any WebSocket client to ws://127.0.0.1:8787/ws.
"""

import json
from pathlib import Path

from streamloom.protocol import ServerCore, messages as m

ROOT = Path(__file__).parent.parent / "datasets"


def show(direction, text):
    doc = json.loads(text)
    if doc.get("type") in ("dataset_list", "stream_list", "subscribed"):
        body = {k: ("..." if isinstance(v, list) else v) for k, v in doc.items()}
        print(f"{direction} {json.dumps(body, sort_keys=True)}")
    else:
        print(f"{direction} {text}")


def send(core, conn, message):
    text = m.encode(message)
    show(">>", text)
    core.handle(conn, text)


core = ServerCore(str(ROOT))
conn = core.connect()

send(core, conn, m.ListDatasets(req=1))
show("<<", m.encode(conn.next_message(2.0)))

send(core, conn, m.Subscribe(
    req=2, mode="replay", streams=("gaze/s01/scan",),
    options=m.SubscribeOptions(rate_multiplier=20.0),
))
reply = conn.next_message(2.0)
show("<<", m.encode(reply))
sid = reply.subscription_id

frames = [conn.next_message(2.0) for _ in range(3)]
for f in frames:
    show("<<", m.encode(f))

send(core, conn, m.Control(req=3, subscription_id=sid, action="pause"))
send(core, conn, m.Control(req=4, subscription_id=sid, action="seek", t=0.0))
send(core, conn, m.Control(req=5, subscription_id=sid, action="resume"))

# drain: state replies interleave with frames; stop at the end message
seen_after_seek = None
while True:
    msg = conn.next_message(5.0)
    if isinstance(msg, m.FrameMessage) and seen_after_seek is None:
        seen_after_seek = msg
    if isinstance(msg, m.StateMessage):
        show("<<", m.encode(msg))
    if isinstance(msg, m.EndMessage):
        show("<<", m.encode(msg))
        break

print(f"\nfirst frame after seek(0) restarted the data: "
      f"t={seen_after_seek.frame.t:g}, connection state is now "
      f"{core.connections[conn.conn_id].model.state}")
core.disconnect(conn)
