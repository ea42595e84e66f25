"""Request dispatch and the stdio/TCP serve loops.

One JSON object per line; responses echo the request id; request ids must
strictly increase per connection. Every failure, including unparseable
lines, becomes an error response; the connection is never dropped by the
server. Protocol version "1" is reported in ping diagnostics together with
the live handle count.
"""

from __future__ import annotations

import json
import socket
import sys
import traceback

from .runtime import CallError, Runtime
from .wire import WireError, decode, encode

PROTOCOL_VERSION = "1"

_OPS = ("call", "method", "getattr", "release", "ping")


class HostServer:
    def __init__(self):
        self.runtime = Runtime()
        self.last_id = 0

    def handle_line(self, line: str) -> str:
        try:
            req = json.loads(line)
        except json.JSONDecodeError as e:
            return self._error(None, "ProtocolError", f"bad request line: {e}")
        rid = req.get("id") if isinstance(req, dict) else None
        try:
            return json.dumps(self.dispatch(req))
        except Exception as e:  # noqa: BLE001 - crash containment is the contract
            return self._error(rid, type(e).__name__, str(e), traceback.format_exc())

    def dispatch(self, req) -> dict:
        if not isinstance(req, dict):
            return self._err_obj(None, "ProtocolError", "request must be an object")
        rid = req.get("id")
        if not isinstance(rid, int):
            return self._err_obj(rid, "ProtocolError", "request id must be an integer")
        if rid <= self.last_id:
            return self._err_obj(
                rid, "ProtocolError",
                f"ids must strictly increase (got {rid} after {self.last_id})",
            )
        self.last_id = rid
        op = req.get("op")
        if op not in _OPS:
            return self._err_obj(rid, "ProtocolError", f"unknown op {op!r}")
        try:
            if op == "ping":
                value = {
                    "protocol": PROTOCOL_VERSION,
                    "live_handles": self.runtime.registry.live_count(),
                }
            elif op == "call":
                module = req.get("module")
                if not isinstance(module, str):
                    return self._err_obj(rid, "ProtocolError", "call needs a module")
                name = req.get("name")
                if name is None:
                    # module probe: succeeds iff the module is allow-listed
                    self.runtime.module(module)
                    value = None
                else:
                    value = self.runtime.call(
                        module, name, self._args(req), self._kwargs(req)
                    )
            elif op == "method":
                value = self.runtime.method(
                    self._handle(req), req.get("name"), self._args(req), self._kwargs(req)
                )
            elif op == "getattr":
                value = self.runtime.getattr(self._handle(req), req.get("name"))
            else:  # release
                self.runtime.release(self._handle(req))
                value = None
            return {"id": rid, "ok": True, "value": encode(value)}
        except CallError as e:
            return self._err_obj(rid, e.kind, e.message)
        except WireError as e:
            return self._err_obj(rid, "ProtocolError", str(e))
        except Exception as e:  # noqa: BLE001
            return self._err_obj(rid, type(e).__name__, str(e), traceback.format_exc())

    @staticmethod
    def _args(req) -> list:
        return [decode(a) for a in req.get("args", [])]

    @staticmethod
    def _kwargs(req) -> dict:
        return {k: decode(v) for k, v in (req.get("kwargs") or {}).items()}

    @staticmethod
    def _handle(req) -> str:
        h = req.get("handle")
        if not isinstance(h, str):
            raise WireError("request needs a handle")
        return h

    @staticmethod
    def _err_obj(rid, kind: str, message: str, backtrace: str = "") -> dict:
        return {
            "id": rid,
            "ok": False,
            "error": {"kind": kind, "message": message, "backtrace": backtrace},
        }

    @classmethod
    def _error(cls, rid, kind, message, backtrace: str = "") -> str:
        return json.dumps(cls._err_obj(rid, kind, message, backtrace))


def serve_stdio() -> None:
    """Serve one client over stdin/stdout until EOF (the shutdown signal)."""
    server = HostServer()
    for line in sys.stdin:
        if not line.strip():
            continue
        sys.stdout.write(server.handle_line(line) + "\n")
        sys.stdout.flush()


def serve_tcp(port: int, host: str = "127.0.0.1") -> None:
    """Serve TCP clients sequentially, one connection at a time."""
    with socket.create_server((host, port)) as srv:
        while True:
            conn, _addr = srv.accept()
            server = HostServer()  # ids restart per connection
            with conn, conn.makefile("r", encoding="utf-8") as rf, conn.makefile(
                "w", encoding="utf-8"
            ) as wf:
                for line in rf:
                    if not line.strip():
                        continue
                    wf.write(server.handle_line(line) + "\n")
                    wf.flush()


def serve(endpoint: str = "stdio") -> None:
    if endpoint == "stdio":
        serve_stdio()
    elif endpoint.startswith("tcp:"):
        serve_tcp(int(endpoint.split(":", 1)[1]))
    else:
        raise ValueError(f"unknown endpoint {endpoint!r}")
