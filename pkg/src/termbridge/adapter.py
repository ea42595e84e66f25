"""Client for the out-of-process host runtime.

Speaks newline-delimited JSON over a child process's stdio or a TCP socket:
one request object per line, responses echo the request id, ids strictly
increase per connection. Satisfies the same call/method/attribute contracts
as the in-repo runtime, so a bridge can swap runtimes untouched. Timeouts
and dropped connections surface as BridgeError(origin host, kind Timeout).
"""

from __future__ import annotations

import json
import math
import queue
import shlex
import socket
import subprocess
import sys
import threading
from typing import Any

from .errors import BridgeError, HostError
from .hostvals import ObjRef

PROTOCOL_VERSION = "1"


def encode_value(v: Any) -> dict:
    if v is None:
        return {"t": "null"}
    if isinstance(v, bool):
        return {"t": "i", "v": 1 if v else 0}
    t = type(v)
    if t is int:
        return {"t": "i", "v": v}
    if t is float:
        return {"t": "f", "v": v}
    if t is str:
        return {"t": "s", "v": v}
    if t is list:
        return {"t": "seq", "v": [encode_value(x) for x in v]}
    if t is tuple:
        return {"t": "tup", "v": [encode_value(x) for x in v]}
    if t is set or t is frozenset:
        ordered = sorted(v, key=_value_sort_key)
        return {"t": "set", "v": [encode_value(x) for x in ordered]}
    if t is dict:
        return {"t": "map", "v": [[encode_value(k), encode_value(x)] for k, x in v.items()]}
    if t is ObjRef:
        return {"t": "obj", "h": v.handle}
    raise HostError("ProtocolError", f"cannot encode {t.__name__} onto the wire")


def _value_sort_key(v: Any):
    # mirrors the canonical term ordering of the values' term images
    if v is None:
        return (2, "pyNone")
    if isinstance(v, bool):
        return (1, int(v), 0)
    t = type(v)
    if t is int:
        return (1, v, 0)
    if t is float:
        return (1, math.inf, 2) if v != v else (1, v, 1)
    if t is str:
        return (2, v)
    if t is tuple:
        return (3, len(v), "", tuple(_value_sort_key(x) for x in v))
    raise HostError("ProtocolError", f"unorderable set element {t.__name__}")


def decode_value(w: Any, handles: list[str] | None = None) -> Any:
    if not isinstance(w, dict) or "t" not in w:
        raise HostError("ProtocolError", f"malformed wire value: {w!r}")
    t = w["t"]
    if t == "null":
        return None
    if t in ("i", "f", "s"):
        v = w.get("v")
        if t == "i" and isinstance(v, bool):
            return 1 if v else 0
        if t == "i" and not isinstance(v, int):
            raise HostError("ProtocolError", f"bad integer wire value: {v!r}")
        if t == "f":
            return float(v)
        return v
    if t == "seq":
        return [decode_value(x, handles) for x in w["v"]]
    if t == "tup":
        return tuple(decode_value(x, handles) for x in w["v"])
    if t == "set":
        return {decode_value(x, handles) for x in w["v"]}
    if t == "map":
        return {decode_value(k, handles): decode_value(x, handles) for k, x in w["v"]}
    if t == "obj":
        h = w["h"]
        if handles is not None:
            handles.append(h)
        return ObjRef(h)
    raise HostError("ProtocolError", f"unknown wire tag {t!r}")


class _StdioTransport:
    """Child process speaking one JSON object per line over stdio."""

    def __init__(self, cmd: list[str]):
        self.proc = subprocess.Popen(
            cmd,
            stdin=subprocess.PIPE,
            stdout=subprocess.PIPE,
            text=True,
            bufsize=1,
        )
        self._lines: queue.Queue = queue.Queue()
        self._reader = threading.Thread(target=self._pump, daemon=True)
        self._reader.start()

    def _pump(self) -> None:
        try:
            for line in self.proc.stdout:
                self._lines.put(line)
        except ValueError:
            pass
        self._lines.put(None)  # EOF sentinel

    def send(self, line: str) -> None:
        try:
            self.proc.stdin.write(line + "\n")
            self.proc.stdin.flush()
        except (BrokenPipeError, ValueError, OSError):
            raise BridgeError("host", "Timeout", "adapter connection closed") from None

    def recv(self, timeout: float) -> str:
        try:
            line = self._lines.get(timeout=timeout)
        except queue.Empty:
            raise BridgeError("host", "Timeout", "adapter reply timed out") from None
        if line is None:
            raise BridgeError("host", "Timeout", "adapter connection closed")
        return line

    def close(self) -> None:
        try:
            if self.proc.stdin:
                self.proc.stdin.close()
            self.proc.wait(timeout=5)
        except Exception:  # noqa: BLE001
            self.proc.kill()


class _TcpTransport:
    def __init__(self, host: str, port: int):
        self.sock = socket.create_connection((host, port))
        self.rfile = self.sock.makefile("r", encoding="utf-8")
        self.wfile = self.sock.makefile("w", encoding="utf-8")

    def send(self, line: str) -> None:
        try:
            self.wfile.write(line + "\n")
            self.wfile.flush()
        except OSError:
            raise BridgeError("host", "Timeout", "adapter connection closed") from None

    def recv(self, timeout: float) -> str:
        self.sock.settimeout(timeout)
        try:
            line = self.rfile.readline()
        except (TimeoutError, OSError):
            raise BridgeError("host", "Timeout", "adapter reply timed out") from None
        if not line:
            raise BridgeError("host", "Timeout", "adapter connection closed")
        return line

    def close(self) -> None:
        try:
            self.sock.close()
        except OSError:
            pass


class AdapterRuntime:
    """Out-of-process host runtime satisfying the in-repo runtime contracts."""

    def __init__(self, transport, timeout: float = 10.0):
        self.transport = transport
        self.timeout = timeout
        self._next_id = 0
        self._live: set[str] = set()
        self.last_error: HostError | None = None
        info = self._request("ping")
        proto = info.get("protocol") if isinstance(info, dict) else None
        if proto != PROTOCOL_VERSION:
            raise BridgeError(
                "host", "ProtocolError", f"unsupported adapter protocol {proto!r}"
            )

    def clear_error(self) -> None:
        self.last_error = None

    def _request(self, op: str, **fields) -> Any:
        self._next_id += 1
        req = {"id": self._next_id, "op": op}
        for k, v in fields.items():
            if v is not None:
                req[k] = v
        self.transport.send(json.dumps(req))
        line = self.transport.recv(self.timeout)
        try:
            resp = json.loads(line)
        except json.JSONDecodeError:
            raise BridgeError("host", "ProtocolError", f"bad reply line: {line!r}") from None
        if resp.get("id") != req["id"]:
            raise BridgeError("host", "ProtocolError", "reply id mismatch")
        if not resp.get("ok"):
            err = resp.get("error") or {}
            e = HostError(
                err.get("kind", "HostError"),
                err.get("message", "unknown host failure"),
                [err.get("backtrace", "")] if err.get("backtrace") else [],
            )
            self.last_error = e
            raise e
        handles: list[str] = []
        value = decode_value(resp.get("value", {"t": "null"}), handles)
        self._live.update(handles)
        return value

    # --- host runtime contract ----------------------------------------------

    def load_module(self, name: str):
        self._request("call", module=name)  # probe: no function name
        return _RemoteModule(name)

    def call_host(self, module: str, fname: str, args: list, kwargs: dict) -> Any:
        return self._request(
            "call",
            module=module,
            name=fname,
            args=[encode_value(a) for a in args],
            kwargs={k: encode_value(v) for k, v in kwargs.items()} or None,
        )

    def call_method(self, handle: str, mname: str, args: list, kwargs: dict) -> Any:
        return self._request(
            "method",
            handle=handle,
            name=mname,
            args=[encode_value(a) for a in args],
            kwargs={k: encode_value(v) for k, v in kwargs.items()} or None,
        )

    def get_attribute(self, handle: str, name: str) -> Any:
        return self._request("getattr", handle=handle, name=name)

    def release_handle(self, handle: str) -> None:
        self._request("release", handle=handle)
        self._live.discard(handle)

    def is_live(self, handle: str) -> bool:
        return handle in self._live

    def live_count(self) -> int:
        info = self._request("ping")
        return int(info.get("live_handles", 0)) if isinstance(info, dict) else 0

    def register_object(self, obj: Any) -> str:
        raise HostError("Unsupported", "cannot register local objects on a remote runtime")

    register = register_object  # xlate's registry surface

    def ping(self) -> dict:
        return self._request("ping")

    def close(self) -> None:
        self.transport.close()


class _RemoteModule:
    __slots__ = ("name", "loaded")

    def __init__(self, name: str):
        self.name = name
        self.loaded = True


def default_server_command() -> list[str]:
    return [sys.executable, "-m", "hostserver"]


def adapter_client(endpoint: str | list[str], timeout: float = 10.0) -> AdapterRuntime:
    """Connect to an adapter server.

    Endpoint forms: "stdio:<command line>" (spawns a child process),
    "tcp:<host>:<port>", or an argv list for a stdio child.
    """
    if isinstance(endpoint, (list, tuple)):
        return AdapterRuntime(_StdioTransport(list(endpoint)), timeout)
    if endpoint.startswith("tcp:"):
        _, host, port = endpoint.split(":", 2)
        return AdapterRuntime(_TcpTransport(host, int(port)), timeout)
    if endpoint.startswith("stdio:"):
        return AdapterRuntime(_StdioTransport(shlex.split(endpoint[6:])), timeout)
    if endpoint == "stdio":
        return AdapterRuntime(_StdioTransport(default_server_command()), timeout)
    raise ValueError(f"unknown adapter endpoint {endpoint!r}")
