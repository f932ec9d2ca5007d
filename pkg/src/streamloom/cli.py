"""Operator entry points: serve, validate, run, bench.

The CLI is a thin front over the library; anything concurrent lives in
the modules it calls. Exit codes: 0 success, 1 validation or run
failure, 2 environment failure (unusable root, unbindable address,
unreadable config).
"""

import argparse
import csv
import itertools
import json
import socket
import sys
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Optional

from .errors import BadMessage, BindError, LoomError, SchemaError
from .metadata import StreamQuery, discover_datasets, resolve
from .metadata.jsonio import parse_metadata, parse_stream, serialize_metadata
from .sources import open_replay, open_simulation
from .workflow import load_workflow, run_workflow

DEFAULT_BIND = "127.0.0.1:8787"
DEFAULT_ROOT = "datasets"
LOG_LEVELS = ("debug", "info", "warning", "error")

# document kind by file name suffix; validate relies on this mapping
SUFFIX_KINDS = {
    ".source.json": "source",
    ".dataset.json": "dataset",
    ".analytic.json": "analytic",
    ".workflow.json": "workflow",
}


@dataclass(frozen=True)
class CliConfig:
    """Defaults < config file < explicit flags."""

    dataset_root: str = DEFAULT_ROOT
    bind: str = DEFAULT_BIND
    log_level: str = "info"
    static_dir: Optional[str] = None


def load_config(path: str) -> CliConfig:
    try:
        doc = json.loads(Path(path).read_text())
    except OSError as exc:
        raise BindError(f"config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise SchemaError(f"config {path}: not valid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise SchemaError(f"config {path}: expected an object")
    known = {"dataset_root", "bind", "log_level", "static_dir"}
    extra = sorted(set(doc) - known)
    if extra:
        raise SchemaError(f"config {path}: unknown keys {extra}")
    cfg = CliConfig()
    for key in known:
        if key in doc:
            value = doc[key]
            if not isinstance(value, str):
                raise SchemaError(f"config {path}: {key} must be a string")
            cfg = replace(cfg, **{key: value})
    if cfg.log_level not in LOG_LEVELS:
        raise SchemaError(
            f"config {path}: log_level must be one of {list(LOG_LEVELS)}"
        )
    return cfg


def effective_config(args) -> CliConfig:
    cfg = CliConfig()
    if getattr(args, "config", None):
        cfg = load_config(args.config)
    for flag, key in (("root", "dataset_root"), ("bind", "bind"),
                      ("log_level", "log_level"), ("static", "static_dir")):
        value = getattr(args, flag, None)
        if value is not None:
            cfg = replace(cfg, **{key: value})
    return cfg


def parse_bind(bind: str):
    host, sep, port = bind.rpartition(":")
    if not sep or not host:
        raise BindError(f"bind must be host:port, got {bind!r}")
    try:
        port_n = int(port)
    except ValueError:
        raise BindError(f"bind port must be an integer, got {port!r}") from None
    if not (0 < port_n < 65536):
        raise BindError(f"bind port out of range: {port_n}")
    return host, port_n


# ---------------------------------------------------------------------------
# serve


def prebind(host: str, port: int) -> socket.socket:
    """Claim the address before the server spins up, or fail with exit 2."""
    sock = socket.socket(socket.AF_INET, socket.SOCK_STREAM)
    sock.setsockopt(socket.SOL_SOCKET, socket.SO_REUSEADDR, 1)
    try:
        sock.bind((host, port))
        sock.listen(128)
    except OSError as exc:
        sock.close()
        raise BindError(f"cannot bind {host}:{port}: {exc}") from exc
    return sock


def cmd_serve(args) -> int:
    from .protocol import ServerCore, build_app

    cfg = effective_config(args)
    root = Path(cfg.dataset_root)
    if not root.is_dir():
        print(f"error: dataset root {root} is not a directory", file=sys.stderr)
        return 2
    static = cfg.static_dir
    if static is None and Path("frontend/dist").is_dir():
        static = "frontend/dist"
    if static is not None and not Path(static).is_dir():
        print(f"error: static dir {static} is not a directory", file=sys.stderr)
        return 2

    host, port = parse_bind(cfg.bind)
    sock = prebind(host, port)
    core = ServerCore(str(root))
    app = build_app(core, static_dir=static)

    import uvicorn

    print(f"serving on http://{host}:{port} (root {root})", flush=True)
    server = uvicorn.Server(uvicorn.Config(
        app, log_level=cfg.log_level, lifespan="on",
    ))
    try:
        server.run(sockets=[sock])
    finally:
        for conn in list(core.connections.values()):
            core.disconnect(conn)
        sock.close()
    return 0


# ---------------------------------------------------------------------------
# validate


def validate_file(path: Path) -> Optional[str]:
    """None when the document is valid, else the error message."""
    kind = next(
        (k for s, k in SUFFIX_KINDS.items() if path.name.endswith(s)), None
    )
    if kind is None:
        return (
            "cannot infer document kind from the file name; expected one of "
            + ", ".join(f"*{s}" for s in SUFFIX_KINDS)
        )
    try:
        data = path.read_bytes()
    except OSError as exc:
        return str(exc)
    try:
        if kind == "workflow":
            load_workflow(data)
        else:
            parse_metadata(data, kind)
    except LoomError as exc:
        return f"{type(exc).__name__}: {exc}"
    return None


def cmd_validate(args) -> int:
    results = []
    for raw in args.paths:
        error = validate_file(Path(raw))
        results.append({"path": raw, "ok": error is None}
                       | ({} if error is None else {"error": error}))
    ok = all(r["ok"] for r in results)
    if args.json:
        print(json.dumps({"ok": ok, "results": results}, indent=2))
    else:
        for r in results:
            if r["ok"]:
                print(f"OK     {r['path']}")
            else:
                print(f"ERROR  {r['path']}: {r['error']}")
    return 0 if ok else 1


# ---------------------------------------------------------------------------
# run


def stream_index(root: str) -> dict:
    """stream_id -> ResolvedStream over every dataset under root."""
    index = {}
    for dataset in discover_datasets(root):
        for rs in resolve(dataset, StreamQuery(dataset.dataset_id)):
            index[rs.metadata.stream_id] = rs
    return index


def parse_source_spec(value: str, path: str) -> dict:
    """A binding descriptor: inline JSON or the `replay:<stream-id>` form."""
    value = value.strip()
    if value.startswith("{"):
        try:
            doc = json.loads(value)
        except json.JSONDecodeError as exc:
            raise SchemaError(f"{path}: not valid JSON: {exc}") from exc
        if not isinstance(doc, dict):
            raise SchemaError(f"{path}: expected an object")
        return doc
    mode, sep, stream = value.partition(":")
    if sep and mode == "replay" and stream:
        return {"mode": "replay", "stream": stream}
    raise SchemaError(
        f"{path}: expected JSON or replay:<stream-id>, got {value!r}"
    )


def materialize_source(doc: dict, index: dict, duration: Optional[float],
                       path: str):
    """Turn one binding descriptor into the (metadata, frames) pair."""
    from .protocol.messages import parse_simulation

    if not isinstance(doc, dict):
        raise SchemaError(f"{path}: source binding must be an object")
    mode = doc.get("mode")
    if mode == "replay":
        stream = doc.get("stream")
        if not isinstance(stream, str):
            raise SchemaError(f"{path}: replay binding needs a stream id")
        try:
            resolved = index[stream]
        except KeyError:
            raise SchemaError(
                f"{path}: no stream {stream!r} under the dataset root; "
                f"known: {sorted(index)}"
            ) from None
        handle = open_replay(resolved, float(doc.get("rate_multiplier", 1.0)))
    elif mode == "simulate":
        if "metadata" in doc:
            metadata = parse_stream(doc["metadata"], f"{path}.metadata")
        elif isinstance(doc.get("stream"), str):
            try:
                metadata = index[doc["stream"]].metadata
            except KeyError:
                raise SchemaError(
                    f"{path}: no stream {doc['stream']!r} under the dataset "
                    f"root; known: {sorted(index)}"
                ) from None
        else:
            raise SchemaError(
                f"{path}: simulate binding needs a stream id or inline metadata"
            )
        spec = parse_simulation(doc.get("simulation"), f"{path}.simulation")
        if spec.kind == "unguided" and duration is None:
            raise SchemaError(
                f"{path}: unguided simulation never ends; pass --duration"
            )
        handle = open_simulation(metadata, spec)
    else:
        raise SchemaError(
            f"{path}: mode must be replay or simulate, got {mode!r}"
        )

    frames = handle.frames()
    if duration is not None:
        limit = int(round(duration * handle.metadata.frequency_hz))
        frames = itertools.islice(frames, limit)
    return handle.metadata, frames


def sink_filename(name: str) -> str:
    return name.replace("/", "_")


def write_sink(out_dir: Path, capture) -> dict:
    base = sink_filename(capture.name)
    csv_path = out_dir / f"{base}.csv"
    meta_path = out_dir / f"{base}.analytic.json"
    channels = [c.name for c in capture.metadata.stream.channels]
    with csv_path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["seq", "t"] + channels)
        for frame in capture.frames:
            writer.writerow(
                [frame.seq, frame.t]
                + ["" if v is None else v for v in frame.values]
            )
    meta_path.write_bytes(serialize_metadata(capture.metadata) + b"\n")
    return {"frames": len(capture.frames), "csv": str(csv_path),
            "analytic": str(meta_path)}


def cmd_run(args) -> int:
    cfg = effective_config(args)
    spec = load_workflow(Path(args.workflow).read_bytes())

    bindings = {}
    for key, value in spec.sources.items():
        if isinstance(value, str):
            # bare stream id (or replay:<id>) in the workflow file
            stream = value[len("replay:"):] if value.startswith("replay:") else value
            value = {"mode": "replay", "stream": stream}
        bindings[str(key)] = value
    for item in args.source or ():
        target, sep, value = item.partition("=")
        if not sep:
            raise SchemaError(
                f"--source {item!r}: expected target=binding"
            )
        bindings[target] = parse_source_spec(value, f"--source {target}")
    missing = sorted(
        t for t, b in bindings.items() if not isinstance(b, dict) or not b
    )
    if missing:
        raise SchemaError(
            "no binding for source port(s) "
            + ", ".join(missing)
            + "; pass --source <target>=<spec> or put descriptors in the "
            "workflow's sources map"
        )

    index = stream_index(cfg.dataset_root)
    sources = {
        target: materialize_source(doc, index, args.duration,
                                   f"sources.{target}")
        for target, doc in bindings.items()
    }

    result = run_workflow(spec, sources, mode=args.mode)

    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    summary = {}
    events = []
    for name in sorted(result.sinks):
        capture = result.sinks[name]
        summary[name] = write_sink(out_dir, capture)
        events.extend(
            {"sink": name, "node": e.node_id, "message": e.message}
            for e in capture.events
        )
    for e in events:
        print(f"warning: node {e['node']}: {e['message']}", file=sys.stderr)

    if args.json:
        print(json.dumps({"workflow": spec.name, "out": str(out_dir),
                          "sinks": summary, "events": events}, indent=2))
    else:
        for name, info in summary.items():
            print(f"wrote {info['csv']} ({info['frames']} frames) "
                  f"+ {info['analytic']}")
    return 0


# ---------------------------------------------------------------------------
# bench


def cmd_bench(args) -> int:
    from .heuristics.bench import bench_node, format_table, report_doc

    params = {}
    if args.params:
        try:
            params = json.loads(args.params)
        except json.JSONDecodeError as exc:
            raise SchemaError(f"--params: not valid JSON: {exc}") from exc
        if not isinstance(params, dict):
            raise SchemaError("--params: expected a JSON object")
    channels = tuple(args.channels.split(",")) if args.channels else ("vx", "vy")

    report = bench_node(
        args.node, params, n_samples=args.n, rate_hz=args.rate,
        mode=args.mode, dtype=args.dtype, channels=channels,
    )
    line = json.dumps(report_doc(report))
    if args.out:
        with open(args.out, "a") as fh:
            fh.write(line + "\n")
    print(line if args.json else format_table([report]))
    return 0


# ---------------------------------------------------------------------------
# wiring


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="streamloom",
        description="Serve, validate, run, and benchmark metadata-carrying "
                    "stream workflows.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("serve", help="serve datasets and live streams over "
                       "the WebSocket protocol")
    p.add_argument("--root", help=f"dataset root (default {DEFAULT_ROOT})")
    p.add_argument("--bind", help=f"host:port (default {DEFAULT_BIND})")
    p.add_argument("--static", help="directory of dashboard assets "
                   "(default frontend/dist when present)")
    p.add_argument("--log-level", choices=LOG_LEVELS, dest="log_level")
    p.add_argument("--config", help="JSON config file; flags override it")
    p.set_defaults(fn=cmd_serve)

    p = sub.add_parser("validate", help="check metadata and workflow files")
    p.add_argument("paths", nargs="+", metavar="PATH")
    p.add_argument("--json", action="store_true", help="machine-readable report")
    p.set_defaults(fn=cmd_validate)

    p = sub.add_parser("run", help="run a workflow headless and write sink "
                       "CSVs + analytic metadata")
    p.add_argument("--workflow", required=True, metavar="FILE")
    p.add_argument("--root", help="dataset root for stream lookups "
                   f"(default {DEFAULT_ROOT})")
    p.add_argument("--source", action="append", metavar="TARGET=SPEC",
                   help="bind an input port: JSON descriptor or "
                   "replay:<stream-id>; overrides the workflow file")
    p.add_argument("--duration", type=float, default=None, metavar="SECONDS",
                   help="cap each source at duration x frequency frames")
    p.add_argument("--out", default="out", metavar="DIR",
                   help="output directory (default ./out)")
    p.add_argument("--mode", choices=("deterministic", "pipelined"),
                   default="deterministic")
    p.add_argument("--json", action="store_true", help="machine-readable summary")
    p.add_argument("--config", help="JSON config file; flags override it")
    p.set_defaults(fn=cmd_run)

    p = sub.add_parser("bench", help="drive one node kind with synthetic "
                       "frames and report latency, F, and GF")
    p.add_argument("--node", required=True, metavar="KIND")
    p.add_argument("--params", metavar="JSON", help="node parameters")
    p.add_argument("--n", type=int, default=10_000, help="sample count")
    p.add_argument("--rate", type=float, default=50.0, help="stream rate (Hz)")
    p.add_argument("--mode", choices=("replay", "live-adapter"),
                   default="replay")
    p.add_argument("--dtype", default="f32", help="input channel dtype")
    p.add_argument("--channels", metavar="A,B", help="input channel names "
                   "(default vx,vy)")
    p.add_argument("--json", action="store_true",
                   help="print the report as one JSON line")
    p.add_argument("--out", metavar="FILE", help="append the JSON line here")
    p.set_defaults(fn=cmd_bench)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except BindError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (LoomError, BadMessage) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except KeyboardInterrupt:
        return 0


if __name__ == "__main__":
    raise SystemExit(main())
